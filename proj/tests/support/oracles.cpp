#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <random>
#include <stdexcept>
#include <thread>

#include "curvot/power_diagram.hpp"

namespace oracles {

namespace {

template <int D>
double power_of(const AtomicMeasure<D>& mu, const DualPotential& phi, const Vec<D>& x, int i) {
    return curvot::dist_sq(x, mu.positions[i]) - phi[i];
}

template <int D>
int power_argmin(const AtomicMeasure<D>& mu, const DualPotential& phi, const Vec<D>& x) {
    int best = 0;
    double bp = power_of(mu, phi, x, 0);
    for (int i = 1; i < mu.size(); ++i) {
        const double p = power_of(mu, phi, x, i);
        if (p < bp) {
            bp = p;
            best = i;
        }
    }
    return best;
}

}  // namespace

std::vector<std::pair<int, int>> clipped_neighbor_pairs(const AtomicMeasure<2>& mu,
                                                        const DualPotential& phi) {
    const int n = mu.size();
    curvot::Box<2> box = curvot::bounding_box(mu.positions);
    double pad = 3.0 * box.max_extent() + 1.0;
    for (double w : phi) pad += std::sqrt(std::abs(w));
    const double tol = 1e-9 * (box.max_extent() + 1.0);

    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < n; ++i) {
        // start from the padded box, clip by every power bisector
        std::vector<Vec<2>> poly{{{box.lo[0] - pad, box.lo[1] - pad}},
                                 {{box.hi[0] + pad, box.lo[1] - pad}},
                                 {{box.hi[0] + pad, box.hi[1] + pad}},
                                 {{box.lo[0] - pad, box.hi[1] + pad}}};
        for (int j = 0; j < n && !poly.empty(); ++j) {
            if (j == i) continue;
            // halfplane a.x <= b  <=>  pow_i(x) <= pow_j(x)
            const Vec<2> a = 2.0 * (mu.positions[j] - mu.positions[i]);
            const double b = curvot::norm_sq(mu.positions[j]) - phi[j] -
                             curvot::norm_sq(mu.positions[i]) + phi[i];
            std::vector<Vec<2>> next;
            const std::size_t m = poly.size();
            for (std::size_t k = 0; k < m; ++k) {
                const Vec<2>&p = poly[k], &q = poly[(k + 1) % m];
                const double fp = curvot::dot(a, p) - b;
                const double fq = curvot::dot(a, q) - b;
                if (fp <= 0.0) next.push_back(p);
                if ((fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq <= 0.0)) {
                    const double t = fp / (fp - fq);
                    next.push_back(curvot::lerp(p, q, t));
                }
            }
            poly = std::move(next);
        }
        if (poly.empty()) continue;  // hidden cell
        for (int j = i + 1; j < n; ++j) {
            const Vec<2> a = 2.0 * (mu.positions[j] - mu.positions[i]);
            const double b = curvot::norm_sq(mu.positions[j]) - phi[j] -
                             curvot::norm_sq(mu.positions[i]) + phi[i];
            const double scale = curvot::norm(a) + 1.0;
            int on_line = 0;
            for (const auto& p : poly)
                if (std::abs(curvot::dot(a, p) - b) <= tol * scale) ++on_line;
            if (on_line >= 2) pairs.push_back({i, j});  // an edge lies on the bisector
        }
    }
    return pairs;
}

template <int D>
SegmentTrace dense_sampling_trace(const AtomicMeasure<D>& mu, const PolylineMeasure<D>& nu,
                                  const DualPotential& phi, int samples_per_segment,
                                  int threads) {
    const int p = nu.segment_count();
    SegmentTrace trace;
    trace.segments.resize(p);

    auto run_segment = [&](int a) {
        if (nu.disjoint_mode && (a % 2 == 1)) return;
        const Vec<D> A = nu.segment_start(a);
        const Vec<D> B = nu.segment_end(a);
        auto cell_at = [&](double t) { return power_argmin(mu, phi, curvot::lerp(A, B, t)); };

        // Cells meet the segment in single intervals, so iterated bisection
        // between samples recovers every interval wider than ~1e-12 even when
        // it is narrower than the sample spacing.
        auto& entries = trace.segments[a];
        const int K = samples_per_segment;
        double t_cur = 0.0;
        int cell = cell_at(0.0);
        int k = 1;
        while (true) {
            while (k < K && cell_at(static_cast<double>(k) / (K - 1)) == cell) ++k;
            if (k >= K) {
                entries.push_back({static_cast<std::int32_t>(cell), t_cur, 1.0});
                break;
            }
            double lo = std::max(t_cur, static_cast<double>(k - 1) / (K - 1));
            double hi = static_cast<double>(k) / (K - 1);
            if (cell_at(lo) != cell) lo = t_cur;
            for (int it = 0; it < 80 && hi - lo > 1e-15; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (cell_at(mid) == cell)
                    lo = mid;
                else
                    hi = mid;
            }
            entries.push_back({static_cast<std::int32_t>(cell), t_cur, hi});
            t_cur = hi;
            int next = cell;
            for (double delta = 1e-13; delta <= 1e-7 && next == cell; delta *= 10.0)
                next = cell_at(std::min(t_cur + delta, 1.0));
            if (next == cell) next = cell_at(static_cast<double>(k) / (K - 1));
            cell = next;
        }
    };

    const int workers = std::max(1, std::min(threads, p));
    if (workers == 1) {
        for (int a = 0; a < p; ++a) run_segment(a);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (int a = w; a < p; a += workers) run_segment(a);
            });
        for (auto& t : pool) t.join();
    }
    return trace;
}

SegmentTrace canonical_trace(const SegmentTrace& t, double min_len) {
    SegmentTrace out;
    out.segments.resize(t.segments.size());
    for (std::size_t a = 0; a < t.segments.size(); ++a) {
        for (const auto& e : t.segments[a]) {
            if (e.t_end - e.t_start <= min_len) continue;
            auto& dst = out.segments[a];
            if (!dst.empty() && dst.back().cell == e.cell)
                dst.back().t_end = e.t_end;
            else
                dst.push_back(e);
        }
    }
    return out;
}

bool traces_match(const SegmentTrace& a, const SegmentTrace& b, double time_tol,
                  double min_len) {
    const SegmentTrace ca = canonical_trace(a, min_len);
    const SegmentTrace cb = canonical_trace(b, min_len);
    if (ca.segments.size() != cb.segments.size()) return false;
    for (std::size_t s = 0; s < ca.segments.size(); ++s) {
        const auto& ea = ca.segments[s];
        const auto& eb = cb.segments[s];
        if (ea.size() != eb.size()) return false;
        for (std::size_t k = 0; k < ea.size(); ++k) {
            if (ea[k].cell != eb[k].cell) return false;
            if (std::abs(ea[k].t_start - eb[k].t_start) > time_tol) return false;
            if (std::abs(ea[k].t_end - eb[k].t_end) > time_tol) return false;
        }
    }
    return true;
}

double sampled_transport_cost(const AtomicMeasure<2>& mu, const PolylineMeasure<2>& nu,
                              int samples_per_segment, double epsilon) {
    const int n = mu.size();
    const int p = nu.segment_count();
    const int total = p * samples_per_segment;

    for (int a = 1; a < p; ++a)
        if (std::abs(nu.densities[a] - nu.densities[0]) > 1e-12)
            throw std::invalid_argument("sampled_transport_cost needs uniform densities");

    std::vector<Vec<2>> samples;
    samples.reserve(total);
    for (int a = 0; a < p; ++a)
        for (int k = 0; k < samples_per_segment; ++k)
            samples.push_back(curvot::lerp(nu.segment_start(a), nu.segment_end(a),
                                           (k + 0.5) / samples_per_segment));

    std::vector<int> capacity(n);
    int cap_total = 0;
    for (int i = 0; i < n; ++i) {
        const double exact = mu.masses[i] * total;
        capacity[i] = static_cast<int>(std::llround(exact));
        if (std::abs(capacity[i] - exact) > 1e-6)
            throw std::invalid_argument("sampled_transport_cost needs integer capacities");
        cap_total += capacity[i];
    }
    if (cap_total != total) throw std::invalid_argument("capacities do not cover the samples");

    std::vector<std::vector<double>> value(total, std::vector<double>(n));
    double vmax = 0.0;
    for (int s = 0; s < total; ++s)
        for (int i = 0; i < n; ++i) {
            value[s][i] = -curvot::dist_sq(samples[s], mu.positions[i]);
            vmax = std::max(vmax, -value[s][i]);
        }

    // forward auction with epsilon scaling; objects hold a min-heap of bids
    std::vector<double> price(n, 0.0);
    std::vector<int> owner(total, -1);
    using Bid = std::pair<double, int>;  // (bid, person)
    std::vector<std::priority_queue<Bid, std::vector<Bid>, std::greater<>>> heap(n);

    double eps = std::max(vmax / 4.0, epsilon);
    while (true) {
        for (auto& h : heap) h = {};
        std::fill(owner.begin(), owner.end(), -1);
        std::vector<int> queue(total);
        for (int s = 0; s < total; ++s) queue[s] = s;

        while (!queue.empty()) {
            const int s = queue.back();
            queue.pop_back();
            double best = -1e300, second = -1e300;
            int bi = -1;
            for (int i = 0; i < n; ++i) {
                const double v = value[s][i] - price[i];
                if (v > best) {
                    second = best;
                    best = v;
                    bi = i;
                } else if (v > second) {
                    second = v;
                }
            }
            const double bid = price[bi] + best - second + eps;
            auto& h = heap[bi];
            if (static_cast<int>(h.size()) < capacity[bi]) {
                h.push({bid, s});
                owner[s] = bi;
                if (static_cast<int>(h.size()) == capacity[bi]) price[bi] = h.top().first;
            } else {
                const auto [low_bid, evicted] = h.top();
                h.pop();
                owner[evicted] = -1;
                queue.push_back(evicted);
                h.push({bid, s});
                owner[s] = bi;
                price[bi] = h.top().first;
            }
        }
        if (eps <= epsilon) break;
        eps = std::max(eps / 5.0, epsilon);
    }

    const double w = nu.densities[0] / samples_per_segment;  // mass per sample
    double cost = 0.0;
    for (int s = 0; s < total; ++s) cost += w * -value[s][owner[s]];
    return cost;
}

template <int D>
std::vector<double> fd_gradient(const AtomicMeasure<D>& mu, const PolylineMeasure<D>& nu,
                                const DualPotential& phi, double eps) {
    const int n = mu.size();
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) {
        DualPotential pp = phi, pm = phi;
        pp[i] += eps;
        pm[i] -= eps;
        const double cp = curvot::evaluate(mu, nu, pp, curvot::build_oracle(mu, pp)).cost;
        const double cm = curvot::evaluate(mu, nu, pm, curvot::build_oracle(mu, pm)).cost;
        g[i] = (cp - cm) / (2.0 * eps);
    }
    return g;
}

namespace {

std::vector<std::vector<std::int32_t>> topology_of(const SegmentTrace& t, double min_len) {
    const SegmentTrace c = canonical_trace(t, min_len);
    std::vector<std::vector<std::int32_t>> out(c.segments.size());
    for (std::size_t a = 0; a < c.segments.size(); ++a)
        for (const auto& e : c.segments[a]) out[a].push_back(e.cell);
    return out;
}

}  // namespace

template <int D>
std::vector<std::vector<double>> fd_hessian(const AtomicMeasure<D>& mu,
                                            const PolylineMeasure<D>& nu,
                                            const DualPotential& phi, double eps,
                                            std::vector<char>& column_ok) {
    const int n = mu.size();
    const auto base = curvot::evaluate(mu, nu, phi, curvot::build_oracle(mu, phi));
    const auto base_topo = topology_of(base.trace, 1e-12);

    std::vector<std::vector<double>> h(n, std::vector<double>(n, 0.0));
    column_ok.assign(n, 1);
    for (int j = 0; j < n; ++j) {
        DualPotential pp = phi, pm = phi;
        pp[j] += eps;
        pm[j] -= eps;
        const auto ep = curvot::evaluate(mu, nu, pp, curvot::build_oracle(mu, pp));
        const auto em = curvot::evaluate(mu, nu, pm, curvot::build_oracle(mu, pm));
        if (topology_of(ep.trace, 1e-12) != base_topo || topology_of(em.trace, 1e-12) != base_topo)
            column_ok[j] = 0;  // crossed a trace-topology change
        for (int i = 0; i < n; ++i) h[i][j] = (ep.gradient[i] - em.gradient[i]) / (2.0 * eps);
    }
    return h;
}

double power_iteration_norm(const SparseHessian& h, int iterations, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::vector<double> v(h.n), w(h.n);
    for (auto& x : v) x = uni(rng);
    double lambda = 0.0;
    for (int it = 0; it < iterations; ++it) {
        h.apply(v.data(), w.data());
        double nw = 0.0;
        for (double x : w) nw += x * x;
        nw = std::sqrt(nw);
        if (nw == 0.0) return 0.0;
        lambda = nw;
        for (int i = 0; i < h.n; ++i) v[i] = w[i] / nw;
    }
    return lambda;
}

template SegmentTrace dense_sampling_trace<2>(const AtomicMeasure<2>&, const PolylineMeasure<2>&,
                                              const DualPotential&, int, int);
template SegmentTrace dense_sampling_trace<3>(const AtomicMeasure<3>&, const PolylineMeasure<3>&,
                                              const DualPotential&, int, int);
template std::vector<double> fd_gradient<2>(const AtomicMeasure<2>&, const PolylineMeasure<2>&,
                                            const DualPotential&, double);
template std::vector<double> fd_gradient<3>(const AtomicMeasure<3>&, const PolylineMeasure<3>&,
                                            const DualPotential&, double);
template std::vector<std::vector<double>> fd_hessian<2>(const AtomicMeasure<2>&,
                                                        const PolylineMeasure<2>&,
                                                        const DualPotential&, double,
                                                        std::vector<char>&);
template std::vector<std::vector<double>> fd_hessian<3>(const AtomicMeasure<3>&,
                                                        const PolylineMeasure<3>&,
                                                        const DualPotential&, double,
                                                        std::vector<char>&);

}  // namespace oracles
