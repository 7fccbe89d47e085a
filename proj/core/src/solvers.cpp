#include "curvot/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <ostream>
#include <stdexcept>

#include "curvot/errors.hpp"
#include "curvot/power_diagram.hpp"
#include "small_linalg.hpp"

namespace curvot {

using detail::remove_mean;
using detail::vaxpy;
using detail::vdot;
using detail::vnorm;

const char* to_string(StepKind k) {
    switch (k) {
        case StepKind::initial: return "initial";
        case StepKind::gradient: return "gradient";
        case StepKind::quasi_newton: return "quasi-newton";
        case StepKind::newton: return "newton";
        case StepKind::momentum: return "momentum";
        case StepKind::bb_step: return "bb";
    }
    return "?";
}

void ConvergenceHistory::write_csv(std::ostream& os) const {
    os << "iteration,cost,grad_norm,step,empty_cells,branch\n";
    for (const auto& r : records) {
        os.precision(17);
        os << r.iteration << ',' << r.cost << ',' << r.grad_norm << ',' << r.step << ','
           << r.empty_cells << ',' << to_string(r.branch) << '\n';
    }
}

namespace {

std::vector<double> combine(const std::vector<double>& phi, double s,
                            const std::vector<double>& d) {
    std::vector<double> out(phi);
    vaxpy(s, d, out);
    return out;
}

std::vector<double> scaled(double s, const std::vector<double>& d) {
    std::vector<double> out(d);
    detail::vscale(out, s);
    return out;
}

/// Limited-memory BFGS pairs kept in the minimization convention for -g;
/// ascent_direction() hides the sign flips.
class LbfgsMemory {
public:
    explicit LbfgsMemory(int capacity) : cap_(std::max(1, capacity)) {}

    void add(std::vector<double> s, std::vector<double> y) {
        const double sy = vdot(s, y);
        if (!(sy > 1e-12 * vnorm(s) * vnorm(y))) return;  // curvature guard
        if (static_cast<int>(pairs_.size()) == cap_) pairs_.pop_front();
        pairs_.push_back({std::move(s), std::move(y), 1.0 / sy});
    }

    void reset() { pairs_.clear(); }

    bool empty() const { return pairs_.empty(); }

    std::vector<double> ascent_direction(const std::vector<double>& grad_g) const {
        if (pairs_.empty()) return grad_g;  // fresh memory: steepest ascent
        std::vector<double> q = scaled(-1.0, grad_g);

        std::vector<double> alpha(pairs_.size());
        for (int i = static_cast<int>(pairs_.size()) - 1; i >= 0; --i) {
            alpha[i] = pairs_[i].rho * vdot(pairs_[i].s, q);
            vaxpy(-alpha[i], pairs_[i].y, q);
        }
        const auto& last = pairs_.back();
        const double gamma = 1.0 / (last.rho * vdot(last.y, last.y));
        detail::vscale(q, gamma);
        for (std::size_t i = 0; i < pairs_.size(); ++i) {
            const double beta = pairs_[i].rho * vdot(pairs_[i].y, q);
            vaxpy(alpha[i] - beta, pairs_[i].s, q);
        }
        detail::vscale(q, -1.0);  // minimization direction for -g == ascent for g
        return q;
    }

private:
    struct Pair {
        std::vector<double> s, y;
        double rho;
    };
    int cap_;
    std::deque<Pair> pairs_;
};

/// Jacobi-preconditioned conjugate gradient for (-H) z = b with the
/// all-ones kernel projected out of the right-hand side; a kernel component
/// picked up by z is harmless (shift covariance of the objective). Accepts
/// only when ||H z + grad|| <= 1e-10 ||grad||. Rounding breaks the exact
/// n-step termination of CG, so the cap is 4n.
bool newton_direction(const SparseHessian& h, const std::vector<double>& grad,
                      std::vector<double>& dir) {
    const int n = h.n;
    const double gnorm = vnorm(grad);
    if (!(gnorm > 0.0)) return false;
    const double target = 1e-10 * gnorm;

    std::vector<double> precond(n);
    for (int i = 0; i < n; ++i) {
        const double d = -h.diagonal(i);
        if (!(d > 0.0)) return false;  // isolated cell: singular system
        precond[i] = 1.0 / d;
    }

    std::vector<double> b(grad);
    remove_mean(b);
    std::vector<double> x(n, 0.0), r(b), z(n), p(n), hp(n);
    for (int i = 0; i < n; ++i) p[i] = z[i] = precond[i] * r[i];
    double rz = vdot(r, z);
    for (long it = 0; it < 4L * n && vnorm(r) > 0.5 * target; ++it) {
        h.apply(p.data(), hp.data());
        for (double& v : hp) v = -v;  // A = -H is positive semidefinite
        const double pap = vdot(p, hp);
        if (!(pap > 0.0)) break;
        const double alpha = rz / pap;
        vaxpy(alpha, p, x);
        vaxpy(-alpha, hp, r);
        remove_mean(r);
        for (int i = 0; i < n; ++i) z[i] = precond[i] * r[i];
        const double rz_new = vdot(r, z);
        const double beta = rz_new / rz;
        for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        rz = rz_new;
    }

    h.apply(x.data(), hp.data());
    for (int i = 0; i < n; ++i) hp[i] += grad[i];
    if (vnorm(hp) > target) return false;
    dir = std::move(x);
    return true;
}

}  // namespace

WolfeResult wolfe_line_search(const DualObjective& g, const std::vector<double>& phi,
                              const DualEval& at_phi, const std::vector<double>& d,
                              double initial_step, double c1, double c2, int max_evals) {
    const double h0 = at_phi.cost;
    const double hp0 = vdot(at_phi.gradient, d);
    if (!(hp0 > 0.0)) throw std::invalid_argument("wolfe_line_search: not an ascent direction");

    WolfeResult res;
    auto probe = [&](double s) {
        res.eval = g(combine(phi, s, d));
        ++res.evaluations;
        return std::pair<double, double>(res.eval.cost, vdot(res.eval.gradient, d));
    };
    auto accept = [&](double s) {
        res.ok = true;
        res.step = s;
        return res;
    };

    // bracketing phase, then bisection zoom
    double lo = 0.0, lo_h = h0, hi = -1.0;
    double s = std::max(initial_step, 1e-16);
    double prev_s = 0.0, prev_h = h0;
    while (res.evaluations < max_evals) {
        auto [h, hp] = probe(s);
        if (h < h0 + c1 * s * hp0 || (prev_s > 0.0 && h <= prev_h)) {
            lo = prev_s;
            lo_h = prev_h;
            hi = s;
            break;
        }
        if (std::abs(hp) <= c2 * hp0) return accept(s);
        if (hp <= 0.0) {
            lo = s;
            lo_h = h;
            hi = prev_s;
            break;
        }
        prev_s = s;
        prev_h = h;
        s *= 2.0;
        if (s > 1e12) return res;
    }
    if (hi < 0.0) return res;  // evaluation budget spent while bracketing

    while (res.evaluations < max_evals) {
        s = 0.5 * (lo + hi);
        auto [h, hp] = probe(s);
        if (h < h0 + c1 * s * hp0 || h <= lo_h) {
            hi = s;
        } else {
            if (std::abs(hp) <= c2 * hp0) return accept(s);
            if (hp * (hi - lo) >= 0.0) hi = lo;
            lo = s;
            lo_h = h;
        }
        if (std::abs(hi - lo) <= 1e-16 * std::max(1.0, std::abs(lo))) break;
    }
    return res;
}

namespace {

struct Loop {
    const DualObjective& g;
    const HessianFactory& hess;
    const SolverConfig& cfg;
    SolveResult out;
    int evals = 0;

    DualEval eval(const std::vector<double>& phi) {
        ++evals;
        return g(phi);
    }

    void record(int it, const DualEval& e, double gn, double step, StepKind kind) {
        if (cfg.record_history)
            out.history.records.push_back({it, e.cost, gn, step, e.empty_cells, kind});
    }

    void finish(const DualEval& e, double gn, double tol) {
        out.final_cost = e.cost;
        out.final_grad_norm = gn;
        out.final_empty_cells = e.empty_cells;
        out.converged = gn <= tol;
        out.evaluations = evals;
    }
};

SolveResult run_wolfe_methods(const DualObjective& g, const HessianFactory& hess,
                              DualPotential phi, const SolverConfig& cfg) {
    Loop loop{g, hess, cfg, {}, 0};
    const double tol = cfg.effective_grad_tol();
    LbfgsMemory mem(cfg.lbfgs_memory);

    DualEval e = loop.eval(phi);
    double gn = vnorm(e.gradient);
    loop.record(0, e, gn, 0.0, StepKind::initial);

    double grad_step = 1.0;
    for (int it = 1; it <= cfg.outer_max && gn > tol; ++it) {
        std::vector<double> d;
        StepKind kind;
        if (cfg.method == SolveMethod::gradient) {
            d = e.gradient;
            kind = StepKind::gradient;
        } else if (cfg.method == SolveMethod::lbfgs || e.empty_cells != 0 || !hess) {
            d = mem.ascent_direction(e.gradient);
            kind = StepKind::quasi_newton;
        } else {
            SparseHessian h = hess(phi, e.trace);
            kind = StepKind::newton;
            if (h.near_tangent_count > 0 || !newton_direction(h, e.gradient, d)) {
                d = mem.ascent_direction(e.gradient);  // Algorithm keeps moving
                kind = StepKind::quasi_newton;
            }
        }
        if (!(vdot(e.gradient, d) > 0.0)) {
            d = e.gradient;
            kind = StepKind::gradient;
        }

        double s;
        DualEval e_new;
        if (cfg.method == SolveMethod::gradient && cfg.fixed_step > 0.0) {
            s = cfg.fixed_step;
            e_new = loop.eval(combine(phi, s, d));
        } else {
            const double s0 = (kind == StepKind::gradient) ? grad_step : 1.0;
            WolfeResult w = wolfe_line_search(g, phi, e, d, s0, cfg.c1, cfg.c2, 50);
            loop.evals += w.evaluations;
            if (!w.ok && kind != StepKind::gradient) {
                // a kink poisoned the direction: drop the memory, restart steep
                mem.reset();
                d = e.gradient;
                kind = StepKind::gradient;
                w = wolfe_line_search(g, phi, e, d, 1.0, cfg.c1, cfg.c2, 50);
                loop.evals += w.evaluations;
            }
            if (w.ok) {
                s = w.step;
                e_new = std::move(w.eval);
            } else {
                // safeguarded fallback: backtrack to a simple increase
                s = 1.0;
                bool found = false;
                for (int t = 0; t < 40; ++t) {
                    e_new = loop.eval(combine(phi, s, d));
                    if (e_new.cost > e.cost) {
                        found = true;
                        break;
                    }
                    s *= 0.5;
                }
                if (!found) break;  // no progress at any scale: stop here
            }
        }

        std::vector<double> y(e.gradient);  // grad_old - grad_new, pairs for -g
        vaxpy(-1.0, e_new.gradient, y);
        mem.add(scaled(s, d), std::move(y));

        vaxpy(s, d, phi);
        if (kind == StepKind::gradient) grad_step = s;
        e = std::move(e_new);
        gn = vnorm(e.gradient);
        loop.record(it, e, gn, s, kind);
    }
    loop.finish(e, gn, tol);
    loop.out.phi = std::move(phi);
    return loop.out;
}

SolveResult run_bb(const DualObjective& g, DualPotential phi, const SolverConfig& cfg) {
    Loop loop{g, nullptr, cfg, {}, 0};
    const double tol = cfg.effective_grad_tol();

    DualEval e = loop.eval(phi);
    double gn = vnorm(e.gradient);
    loop.record(0, e, gn, 0.0, StepKind::initial);

    std::vector<double> phi_prev, grad_prev;
    std::deque<double> recent{e.cost};
    for (int it = 1; it <= cfg.outer_max && gn > tol; ++it) {
        double s = 1.0;
        if (!phi_prev.empty()) {
            std::vector<double> ds(phi);
            vaxpy(-1.0, phi_prev, ds);
            std::vector<double> dy(grad_prev);  // f-convention difference
            vaxpy(-1.0, e.gradient, dy);
            const double sy = vdot(ds, dy);
            s = sy > 0.0 ? vdot(ds, ds) / sy : 1.0;
            if (!std::isfinite(s) || s <= 0.0) s = 1.0;
        } else {
            s = 1.0 / std::max(1.0, gn);  // conservative first step
        }

        // nonmonotone (GLL) safeguard against wild Barzilai-Borwein steps
        const double ref = *std::min_element(recent.begin(), recent.end());
        DualEval e_new;
        for (int t = 0; t < 30; ++t) {
            e_new = loop.eval(combine(phi, s, e.gradient));
            if (e_new.cost >= ref + cfg.c1 * s * gn * gn) break;
            s *= 0.5;
        }

        phi_prev = phi;
        grad_prev = e.gradient;
        vaxpy(s, e.gradient, phi);
        e = std::move(e_new);
        gn = vnorm(e.gradient);
        loop.record(it, e, gn, s, StepKind::bb_step);
        recent.push_back(e.cost);
        if (recent.size() > 10) recent.pop_front();
    }
    loop.finish(e, gn, tol);
    loop.out.phi = std::move(phi);
    return loop.out;
}

SolveResult run_nesterov(const DualObjective& g, const HessianFactory& hess, DualPotential phi,
                         const SolverConfig& cfg) {
    Loop loop{g, hess, cfg, {}, 0};
    const double tol = cfg.effective_grad_tol();

    DualEval e = loop.eval(phi);
    double gn = vnorm(e.gradient);
    loop.record(0, e, gn, 0.0, StepKind::initial);

    double L = cfg.nesterov_L;
    if (!(L > 0.0)) {
        L = 1.0;
        if (hess) {
            const double bound = gershgorin_bound(hess(phi, e.trace));
            if (bound > 0.0) L = 0.5 * bound;  // optimistic estimate, see Figs
        }
    }
    const double step = 1.0 / L;

    std::vector<double> x(phi), x_prev(phi), y(phi);
    double t = 1.0;
    for (int it = 1; it <= cfg.outer_max && gn > tol; ++it) {
        x_prev = x;
        x = combine(y, step, e.gradient);
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        y = x;
        const double beta = (t - 1.0) / t_next;
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += beta * (x[i] - x_prev[i]);
        t = t_next;

        e = loop.eval(y);
        gn = vnorm(e.gradient);
        loop.record(it, e, gn, step, StepKind::momentum);
    }
    loop.finish(e, gn, tol);
    loop.out.phi = std::move(y);
    return loop.out;
}

}  // namespace

SolveResult solve_objective(const DualObjective& g, const HessianFactory& hessian_factory,
                            DualPotential phi_init, const SolverConfig& config) {
    switch (config.method) {
        case SolveMethod::gradient:
        case SolveMethod::lbfgs:
        case SolveMethod::hybrid:
            return run_wolfe_methods(g, hessian_factory, std::move(phi_init), config);
        case SolveMethod::bb:
            return run_bb(g, std::move(phi_init), config);
        case SolveMethod::nesterov:
            return run_nesterov(g, hessian_factory, std::move(phi_init), config);
    }
    throw Error("unknown solve method");
}

template <int D>
SolveResult solve(const AtomicMeasure<D>& mu, const PolylineMeasure<D>& nu,
                  DualPotential phi_init, const SolverConfig& config) {
    if (phi_init.empty()) phi_init.assign(mu.size(), 0.0);
    if (static_cast<int>(phi_init.size()) != mu.size())
        throw Error("solve: phi_init size does not match measure");

    DualObjective obj = [&](const std::vector<double>& phi) {
        const NeighborOracle oracle = build_oracle(mu, phi, config.oracle_mode);
        TransportEvaluation ev = evaluate(mu, nu, phi, oracle, config.eval);
        return DualEval{ev.cost, std::move(ev.gradient), ev.empty_cells, std::move(ev.trace)};
    };
    HessianFactory hf = [&](const std::vector<double>& phi, const SegmentTrace& trace) {
        return hessian(mu, nu, phi, trace);
    };
    return solve_objective(obj, hf, std::move(phi_init), config);
}

template <int D>
SolveResult solve_first_order(const AtomicMeasure<D>& mu, const PolylineMeasure<D>& nu,
                              DualPotential phi_init, const SolverConfig& config) {
    if (config.method != SolveMethod::gradient && config.method != SolveMethod::bb &&
        config.method != SolveMethod::nesterov)
        throw Error("solve_first_order: method must be gradient, bb or nesterov");
    return solve(mu, nu, std::move(phi_init), config);
}

template SolveResult solve<2>(const AtomicMeasure<2>&, const PolylineMeasure<2>&, DualPotential,
                              const SolverConfig&);
template SolveResult solve<3>(const AtomicMeasure<3>&, const PolylineMeasure<3>&, DualPotential,
                              const SolverConfig&);
template SolveResult solve_first_order<2>(const AtomicMeasure<2>&, const PolylineMeasure<2>&,
                                          DualPotential, const SolverConfig&);
template SolveResult solve_first_order<3>(const AtomicMeasure<3>&, const PolylineMeasure<3>&,
                                          DualPotential, const SolverConfig&);

}  // namespace curvot
