#include "curvot/shape_opt.hpp"

#include <algorithm>
#include <cmath>

#include "curvot/errors.hpp"
#include "curvot/power_diagram.hpp"
#include "small_linalg.hpp"

namespace curvot {

namespace {

constexpr double kGaussOffset = 0.28867513459481288225;  // 1/(2*sqrt(3))

template <int D>
double dual_gradient_norm(const AtomicMeasure<D>& mu, const PolylineMeasure<D>& nu,
                          const SegmentTrace& trace) {
    std::vector<double> mass(mu.size(), 0.0);
    for (int a = 0; a < nu.segment_count(); ++a)
        for (const TraceEntry& e : trace.segments[a])
            mass[e.cell] += nu.densities[a] * (e.t_end - e.t_start);
    double s = 0.0;
    for (int i = 0; i < mu.size(); ++i) {
        const double gi = mu.masses[i] - mass[i];
        s += gi * gi;
    }
    return std::sqrt(s);
}

/// Per-unit-density cost of each segment: the coefficient of rho_a in g.
template <int D>
std::vector<double> density_derivatives(const AtomicMeasure<D>& mu, const PolylineMeasure<D>& nu,
                                        const DualPotential& phi, const SegmentTrace& trace) {
    std::vector<double> w(nu.segment_count(), 0.0);
    for (int a = 0; a < nu.segment_count(); ++a) {
        const Vec<D> A = nu.segment_start(a);
        const Vec<D> B = nu.segment_end(a);
        double acc = 0.0;
        for (const TraceEntry& e : trace.segments[a]) {
            const double len = e.t_end - e.t_start;
            const double mid = 0.5 * (e.t_start + e.t_end);
            const double h = kGaussOffset * len;
            const Vec<D>& xi = mu.positions[e.cell];
            const double f1 = dist_sq(lerp(A, B, mid - h), xi) - phi[e.cell];
            const double f2 = dist_sq(lerp(A, B, mid + h), xi) - phi[e.cell];
            acc += 0.5 * len * (f1 + f2);
        }
        w[a] = acc;
    }
    return w;
}

/// First moments of the Dirac positions over a segment trace:
///   sum_i x_i * int_{ts}^{te} t dt, and the same under the reversed
///   parameterization t -> 1 - t.
template <int D>
void trace_moments(const AtomicMeasure<D>& mu, const std::vector<TraceEntry>& entries,
                   Vec<D>& fwd, Vec<D>& rev) {
    fwd = Vec<D>{};
    rev = Vec<D>{};
    for (const TraceEntry& e : entries) {
        const double mf = 0.5 * (e.t_end * e.t_end - e.t_start * e.t_start);
        const double a = 1.0 - e.t_end, b = 1.0 - e.t_start;
        const double mr = 0.5 * (b * b - a * a);
        fwd += mf * mu.positions[e.cell];
        rev += mr * mu.positions[e.cell];
    }
}

template <int D>
Vec<D> ball_project(const Vec<D>& v, double radius) {
    const double n = norm(v);
    if (n <= radius || !std::isfinite(radius)) return v;
    return v * (radius / n);
}

}  // namespace

template <int D>
ShapeGradient<D> shape_gradient(const AtomicMeasure<D>& mu, const PolylineMeasure<D>& nu,
                                const DualPotential& phi, const SegmentTrace& trace,
                                const ShapeGradientOptions& options) {
    const double gn = dual_gradient_norm(mu, nu, trace);
    if (gn > 10.0 * options.dual_tolerance)
        throw StaleDual("shape_gradient: dual gradient norm " + std::to_string(gn) +
                        " exceeds 10x tolerance");

    const int p = nu.segment_count();
    const int nv = p + 1;
    ShapeGradient<D> out;
    out.position_part.assign(nv, Vec<D>{});

    // torque terms; the moment integrals carry the factor 2 of d|l-x|^2/dP
    std::vector<Vec<D>> fwd(p), rev(p);
    for (int a = 0; a < p; ++a) trace_moments(mu, trace.segments[a], fwd[a], rev[a]);

    for (int v = 0; v < nv; ++v) {
        Vec<D> g{};
        if (v >= 1 && nu.densities[v - 1] > 0.0) {
            const int a = v - 1;
            Vec<D> t = nu.vertices[v] + (nu.vertices[v - 1] - nu.vertices[v]) / 3.0;
            t -= 2.0 * fwd[a];
            g += nu.densities[a] * t;
        }
        if (v < p && nu.densities[v] > 0.0) {
            const int a = v;
            Vec<D> t = nu.vertices[v] + (nu.vertices[v + 1] - nu.vertices[v]) / 3.0;
            t -= 2.0 * rev[a];
            g += nu.densities[a] * t;
        }
        out.position_part[v] = g;
    }

    // chain rule through the length-normalized densities
    const std::vector<double> w = density_derivatives(mu, nu, phi, trace);
    std::vector<char> active(p, 0);
    double total_len = 0.0;
    double wbar = 0.0;
    for (int a = 0; a < p; ++a) {
        if (nu.disjoint_mode && (a % 2 == 1)) continue;
        const double len = nu.segment_length(a);
        if (!(len > 0.0)) continue;
        active[a] = 1;
        total_len += len;
        wbar += nu.densities[a] * w[a];
    }

    out.total = out.position_part;
    if (total_len > 0.0) {
        for (int v = 0; v < nv; ++v) {
            Vec<D> chain{};
            if (v >= 1 && active[v - 1]) {
                const int a = v - 1;
                const Vec<D> u = (nu.vertices[a + 1] - nu.vertices[a]) / nu.segment_length(a);
                chain += (w[a] - wbar) * u;
            }
            if (v < p && active[v]) {
                const Vec<D> u = (nu.vertices[v + 1] - nu.vertices[v]) / nu.segment_length(v);
                chain -= (w[v] - wbar) * u;
            }
            out.total[v] += chain / total_len;
        }
    }
    return out;
}

template <int D>
std::vector<std::pair<Vec<D>, Vec<D>>> barycenter_diagnostic(const AtomicMeasure<D>& mu,
                                                             const PolylineMeasure<D>& nu,
                                                             const DualPotential& phi,
                                                             const SegmentTrace& trace) {
    (void)phi;
    std::vector<std::pair<Vec<D>, Vec<D>>> out(nu.segment_count());
    for (int a = 0; a < nu.segment_count(); ++a) {
        Vec<D> xbar{};
        for (const TraceEntry& e : trace.segments[a])
            xbar += (e.t_end - e.t_start) * mu.positions[e.cell];
        out[a] = {0.5 * (nu.vertices[a] + nu.vertices[a + 1]), xbar};
    }
    return out;
}

template <int D>
AdmmResult<D> project_kinematic(const std::vector<Vec<D>>& vertices,
                                const KinematicConstraints& constraints,
                                const AdmmConfig& config) {
    AdmmResult<D> res;
    res.vertices = vertices;
    const int nv = static_cast<int>(vertices.size());
    const int p = nv - 1;
    const bool has1 = std::isfinite(constraints.k1) && p >= 1;
    const bool has2 = std::isfinite(constraints.k2) && p >= 2;
    if ((!has1 && !has2) || nv < 2) {
        res.converged = true;
        return res;
    }
    const double beta = config.penalty;

    detail::BandedSpd A(nv);
    for (int v = 0; v < nv; ++v) A.add(v, v, 1.0);
    if (has1) {
        for (int a = 0; a < p; ++a) {
            A.add(a, a, beta);
            A.add(a + 1, a + 1, beta);
            A.add(a, a + 1, -beta);
        }
    }
    if (has2) {
        for (int v = 1; v < p; ++v) {
            A.add(v - 1, v - 1, beta);
            A.add(v, v, 4.0 * beta);
            A.add(v + 1, v + 1, beta);
            A.add(v - 1, v, -2.0 * beta);
            A.add(v, v + 1, -2.0 * beta);
            A.add(v - 1, v + 1, beta);
        }
    }
    A.factor();

    auto d1 = [&](const std::vector<Vec<D>>& q, int a) { return q[a + 1] - q[a]; };
    auto d2 = [&](const std::vector<Vec<D>>& q, int v) {
        return 2.0 * q[v] - q[v - 1] - q[v + 1];
    };

    std::vector<Vec<D>> q = vertices;
    std::vector<Vec<D>> u(has1 ? p : 0), du(has1 ? p : 0);
    std::vector<Vec<D>> w(has2 ? p - 1 : 0), dw(has2 ? p - 1 : 0);
    for (int a = 0; a < p && has1; ++a) u[a] = ball_project(d1(vertices, a), constraints.k1);
    for (int v = 1; v < p && has2; ++v)
        w[v - 1] = ball_project(d2(vertices, v), constraints.k2);

    std::vector<double> rhs(nv);
    for (int it = 1; it <= config.max_iterations; ++it) {
        // vertex update, one banded solve per coordinate
        for (int c = 0; c < D; ++c) {
            for (int v = 0; v < nv; ++v) rhs[v] = vertices[v][c];
            if (has1) {
                for (int a = 0; a < p; ++a) {
                    const double t = beta * (u[a][c] - du[a][c]);
                    rhs[a] -= t;
                    rhs[a + 1] += t;
                }
            }
            if (has2) {
                for (int v = 1; v < p; ++v) {
                    const double t = beta * (w[v - 1][c] - dw[v - 1][c]);
                    rhs[v - 1] -= t;
                    rhs[v] += 2.0 * t;
                    rhs[v + 1] -= t;
                }
            }
            A.solve(rhs);
            for (int v = 0; v < nv; ++v) q[v][c] = rhs[v];
        }

        double primal = 0.0, dual = 0.0;
        if (has1) {
            for (int a = 0; a < p; ++a) {
                const Vec<D> t = d1(q, a) + du[a];
                const Vec<D> u_new = ball_project(t, constraints.k1);
                dual = std::max(dual, beta * norm(u_new - u[a]));
                du[a] = t - u_new;
                u[a] = u_new;
                primal = std::max(primal, norm(d1(q, a) - u[a]));
            }
        }
        if (has2) {
            for (int v = 1; v < p; ++v) {
                const Vec<D> t = d2(q, v) + dw[v - 1];
                const Vec<D> w_new = ball_project(t, constraints.k2);
                dual = std::max(dual, beta * norm(w_new - w[v - 1]));
                dw[v - 1] = t - w_new;
                w[v - 1] = w_new;
                primal = std::max(primal, norm(d2(q, v) - w[v - 1]));
            }
        }

        res.iterations = it;
        res.primal_residual = primal;
        res.dual_residual = dual;
        if (primal <= config.tolerance && dual <= config.tolerance) {
            res.converged = true;
            break;
        }
    }
    res.vertices = std::move(q);
    return res;
}

template <int D>
ShapeResult<D> optimize_polyline(const AtomicMeasure<D>& mu, const PolylineMeasure<D>& nu_init,
                                 const SolverConfig& inner, const ShapeConfig& config,
                                 const ShapeObserver<D>& observer) {
    ShapeResult<D> res;
    PolylineMeasure<D> nu = nu_init;
    if (config.constraints.any()) {
        nu.vertices = project_kinematic(nu.vertices, config.constraints, config.admm).vertices;
        nu.densities = density_from_lengths(nu.vertices, nu.disjoint_mode);
    }
    DualPotential phi(mu.size(), 0.0);

    PolylineMeasure<D> last_good = nu;
    DualPotential last_good_phi = phi;
    res.status = ShapeStatus::iteration_cap;

    SolveResult sol = solve(mu, nu, phi, inner);
    for (int it = 0; it < config.outer_max; ++it) {
        if (!sol.converged) {
            res.status = ShapeStatus::inner_solve_failed;
            res.polyline = last_good;
            res.phi = last_good_phi;
            return res;
        }
        phi = sol.phi;
        last_good = nu;
        last_good_phi = phi;

        const NeighborOracle oracle = build_oracle(mu, phi, inner.oracle_mode);
        const SegmentTrace trace = trace_polyline(mu, nu, phi, oracle, inner.eval);
        ShapeGradientOptions gopt;
        gopt.dual_tolerance = inner.effective_grad_tol();
        const ShapeGradient<D> grad = shape_gradient(mu, nu, phi, trace, gopt);

        double grad_inf = 0.0;
        for (const auto& gv : grad.total)
            for (int c = 0; c < D; ++c) grad_inf = std::max(grad_inf, std::abs(gv[c]));

        const int inner_iters =
            sol.history.records.empty() ? 0 : sol.history.records.back().iteration;
        res.history.push_back({it, sol.final_cost, grad_inf, inner_iters});
        if (observer) observer(it, nu, phi);

        if (grad_inf < config.grad_tol_inf) {
            res.status = ShapeStatus::converged;
            break;
        }

        // metric step: vertices with both adjacent densities zero stay put
        const int p = nu.segment_count();
        auto stepped = [&](double scale) {
            PolylineMeasure<D> next = nu;
            for (int v = 0; v <= p; ++v) {
                const double left = v >= 1 ? nu.densities[v - 1] : 0.0;
                const double right = v < p ? nu.densities[v] : 0.0;
                const double sigma = 0.5 * (left + right);
                if (sigma < 1e-12) continue;
                next.vertices[v] -= (scale / sigma) * grad.total[v];
            }
            if (config.constraints.any())
                next.vertices =
                    project_kinematic(next.vertices, config.constraints, config.admm).vertices;
            next.densities = density_from_lengths(next.vertices, next.disjoint_mode);
            return next;
        };

        PolylineMeasure<D> next = stepped(1.0);
        SolveResult next_sol = solve(mu, next, phi, inner);
        if (config.backtracking) {
            double scale = 1.0;
            for (int half = 0; half < 8; ++half) {
                if (next_sol.converged && next_sol.final_cost <= sol.final_cost) break;
                scale *= 0.5;
                next = stepped(scale);
                next_sol = solve(mu, next, phi, inner);
            }
        }
        nu = std::move(next);
        sol = std::move(next_sol);
    }

    res.polyline = nu;
    res.phi = phi;
    return res;
}

template struct ShapeGradient<2>;
template struct ShapeGradient<3>;

template ShapeGradient<2> shape_gradient<2>(const AtomicMeasure<2>&, const PolylineMeasure<2>&,
                                            const DualPotential&, const SegmentTrace&,
                                            const ShapeGradientOptions&);
template ShapeGradient<3> shape_gradient<3>(const AtomicMeasure<3>&, const PolylineMeasure<3>&,
                                            const DualPotential&, const SegmentTrace&,
                                            const ShapeGradientOptions&);
template std::vector<std::pair<Vec<2>, Vec<2>>> barycenter_diagnostic<2>(
    const AtomicMeasure<2>&, const PolylineMeasure<2>&, const DualPotential&,
    const SegmentTrace&);
template std::vector<std::pair<Vec<3>, Vec<3>>> barycenter_diagnostic<3>(
    const AtomicMeasure<3>&, const PolylineMeasure<3>&, const DualPotential&,
    const SegmentTrace&);
template AdmmResult<2> project_kinematic<2>(const std::vector<Vec<2>>&,
                                            const KinematicConstraints&, const AdmmConfig&);
template AdmmResult<3> project_kinematic<3>(const std::vector<Vec<3>>&,
                                            const KinematicConstraints&, const AdmmConfig&);
template ShapeResult<2> optimize_polyline<2>(const AtomicMeasure<2>&, const PolylineMeasure<2>&,
                                             const SolverConfig&, const ShapeConfig&,
                                             const ShapeObserver<2>&);
template ShapeResult<3> optimize_polyline<3>(const AtomicMeasure<3>&, const PolylineMeasure<3>&,
                                             const SolverConfig&, const ShapeConfig&,
                                             const ShapeObserver<3>&);

}  // namespace curvot
