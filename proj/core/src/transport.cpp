#include "curvot/transport.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <string>
#include <thread>

#include "curvot/errors.hpp"

namespace curvot {

namespace {

constexpr double kGaussOffset = 0.28867513459481288225;  // 1/(2*sqrt(3))
constexpr double kParallelGuard = 1e-14;

/// Earliest crossing along the segment A->B out of cell j, ignoring
/// `exclude` (the cell just left). With `include_t_now` the closed bound
/// t >= t_now is used: that is how the tracer hops through corner ties,
/// emitting zero-length intervals. Ties on t prefer the candidate whose
/// power distance decreases fastest along the travel direction, then the
/// smallest index (candidates are scanned in ascending order).
template <int D>
std::optional<Crossing> crossing_along(const std::vector<Vec<D>>& x, const DualPotential& phi,
                                       const NeighborOracle& oracle, const Vec<D>& a,
                                       const Vec<D>& b, int j, int exclude, double t_now,
                                       bool include_t_now) {
    const Vec<D> u = b - a;
    const double pow_j = dist_sq(a, x[j]) - phi[j];

    int best = -1;
    double best_t = 0.0;
    double best_score = 0.0;
    for (std::int32_t m : oracle.crossing_candidates(j)) {
        if (m == j || m == exclude) continue;
        const double score = dot(u, x[m] - x[j]);
        const double denom = 2.0 * score;
        if (!(denom > 0.0)) continue;  // bisector behind, or never crossed
        const double numer = dist_sq(a, x[m]) - phi[m] - pow_j;
        if (denom <= kParallelGuard * std::abs(numer)) continue;
        const double t = numer / denom;
        if (t > 1.0) continue;
        if (t < t_now || (!include_t_now && t == t_now)) continue;
        if (best < 0 || t < best_t || (t == best_t && score > best_score)) {
            best = m;
            best_t = t;
            best_score = score;
        }
    }
    if (best < 0) return std::nullopt;
    return Crossing{best, best_t};
}

/// Index of the largest potential; x there always lies in its own cell.
inline int top_potential_cell(const DualPotential& phi) {
    return static_cast<int>(std::max_element(phi.begin(), phi.end()) - phi.begin());
}

/// Walks the diagram from a point with known cell to `target` along the
/// straight (dummy) segment between them; returns the cell containing
/// `target`.
template <int D>
int walk_to(const std::vector<Vec<D>>& x, const DualPotential& phi, const NeighborOracle& oracle,
            const Vec<D>& from, int from_cell, const Vec<D>& target) {
    int cur = from_cell;
    int prev = -1;
    double t = 0.0;
    long guard = static_cast<long>(x.size()) + 32;
    while (guard-- > 0) {
        auto c = crossing_along(x, phi, oracle, from, target, cur, prev, t, true);
        if (!c) return cur;
        prev = cur;
        cur = c->cell;
        t = c->t;
    }
    // tolerance breakdown in the walk: resolve by direct power minimization
    int bestc = 0;
    double bestp = std::numeric_limits<double>::infinity();
    for (int i = 0; i < static_cast<int>(x.size()); ++i) {
        const double p = dist_sq(target, x[i]) - phi[i];
        if (p < bestp) {
            bestp = p;
            bestc = i;
        }
    }
    return bestc;
}

template <int D>
int dummy_locate(const AtomicMeasure<D>& mu, const DualPotential& phi,
                 const NeighborOracle& oracle, const Vec<D>& target) {
    const int l = top_potential_cell(phi);
    return walk_to(mu.positions, phi, oracle, mu.positions[l], l, target);
}

template <int D>
void trace_segment(const AtomicMeasure<D>& mu, const PolylineMeasure<D>& nu,
                   const DualPotential& phi, const NeighborOracle& oracle, int a, int start_cell,
                   std::vector<TraceEntry>& out) {
    const Vec<D> A = nu.segment_start(a);
    const Vec<D> B = nu.segment_end(a);
    int cur = start_cell;
    int prev = -1;
    double t = 0.0;
    long guard = static_cast<long>(mu.size()) + 32;
    out.clear();
    while (true) {
        if (guard-- < 0)
            throw TraceStall("tracer stalled on segment " + std::to_string(a) +
                             "; tolerance violated");
        auto c = crossing_along(mu.positions, phi, oracle, A, B, cur, prev, t, true);
        const double te = c ? c->t : 1.0;
        out.push_back({static_cast<std::int32_t>(cur), t, te});
        if (!c) return;
        prev = cur;
        cur = c->cell;
        t = te;
    }
}

template <int D>
struct ChunkOutput {
    double cost = 0.0;
    std::vector<std::pair<std::int32_t, double>> mass;  // (cell, nu-mass) in trace order
};

/// Traces segments [first, last) and integrates on the fly. The first traced
/// segment locates its start with the dummy-segment rule; later segments
/// start in the previous ending cell. In disjoint mode odd segments are only
/// walked to carry the current cell across the gap.
template <int D>
void run_chunk(const AtomicMeasure<D>& mu, const PolylineMeasure<D>& nu,
               const DualPotential& phi, const NeighborOracle& oracle, int first, int last,
               bool integrate, SegmentTrace& trace, ChunkOutput<D>* out) {
    int cur = -1;
    for (int a = first; a < last; ++a) {
        if (nu.disjoint_mode && (a % 2 == 1)) {
            if (cur >= 0)
                cur = walk_to(mu.positions, phi, oracle, nu.segment_start(a), cur,
                              nu.segment_end(a));
            continue;
        }
        if (cur < 0) cur = dummy_locate(mu, phi, oracle, nu.segment_start(a));
        auto& entries = trace.segments[a];
        trace_segment(mu, nu, phi, oracle, a, cur, entries);
        cur = entries.back().cell;

        if (!integrate) continue;
        const double rho = nu.densities[a];
        if (rho <= 0.0) continue;
        const Vec<D> A = nu.segment_start(a);
        const Vec<D> B = nu.segment_end(a);
        for (const TraceEntry& e : entries) {
            const double len = e.t_end - e.t_start;
            out->mass.push_back({e.cell, rho * len});
            const double mid = 0.5 * (e.t_start + e.t_end);
            const double h = kGaussOffset * len;
            const Vec<D>& xi = mu.positions[e.cell];
            const double f1 = dist_sq(lerp(A, B, mid - h), xi) - phi[e.cell];
            const double f2 = dist_sq(lerp(A, B, mid + h), xi) - phi[e.cell];
            out->cost += rho * 0.5 * len * (f1 + f2);
        }
    }
}

inline std::vector<int> chunk_bounds(int p, int requested) {
    int c = requested > 0 ? std::min(requested, p) : std::min(p, 256);
    c = std::max(c, 1);
    std::vector<int> b(c + 1);
    for (int k = 0; k <= c; ++k) b[k] = static_cast<int>(static_cast<long>(p) * k / c);
    return b;
}

template <int D>
SegmentTrace traced(const AtomicMeasure<D>& mu, const PolylineMeasure<D>& nu,
                    const DualPotential& phi, const NeighborOracle& oracle,
                    const EvalOptions& options, bool integrate,
                    std::vector<ChunkOutput<D>>* outputs) {
    const int p = nu.segment_count();
    SegmentTrace trace;
    trace.segments.resize(p);
    const std::vector<int> bounds = chunk_bounds(p, options.chunk_count);
    const int chunks = static_cast<int>(bounds.size()) - 1;
    if (outputs) outputs->resize(chunks);

    const int threads = std::max(1, options.threads);
    if (threads == 1 || chunks == 1) {
        for (int k = 0; k < chunks; ++k)
            run_chunk(mu, nu, phi, oracle, bounds[k], bounds[k + 1], integrate, trace,
                      outputs ? &(*outputs)[k] : nullptr);
        return trace;
    }

    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (;;) {
                    const int k = next.fetch_add(1);
                    if (k >= chunks) return;
                    run_chunk(mu, nu, phi, oracle, bounds[k], bounds[k + 1], integrate, trace,
                              outputs ? &(*outputs)[k] : nullptr);
                }
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return trace;
}

}  // namespace

void SparseHessian::apply(const double* x, double* y) const {
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::int64_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += val[k] * x[col[k]];
        y[i] = s;
    }
}

double SparseHessian::diagonal(int i) const {
    for (std::int64_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
        if (col[k] == i) return val[k];
    return 0.0;
}

double SparseHessian::row_sum(int i) const {
    double s = 0.0;
    double diag = 0.0;
    for (std::int64_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
        if (col[k] == i)
            diag = val[k];
        else
            s += val[k];
    }
    return s + diag;
}

template <int D>
std::optional<Crossing> next_crossing(const AtomicMeasure<D>& mu, const PolylineMeasure<D>& nu,
                                      const DualPotential& phi, const NeighborOracle& oracle,
                                      int a, int current_cell, int previous_cell, double t_now) {
    return crossing_along(mu.positions, phi, oracle, nu.segment_start(a), nu.segment_end(a),
                          current_cell, previous_cell, t_now, false);
}

template <int D>
SegmentTrace trace_polyline(const AtomicMeasure<D>& mu, const PolylineMeasure<D>& nu,
                            const DualPotential& phi, const NeighborOracle& oracle,
                            const EvalOptions& options) {
    return traced<D>(mu, nu, phi, oracle, options, false, nullptr);
}

template <int D>
TransportEvaluation evaluate(const AtomicMeasure<D>& mu, const PolylineMeasure<D>& nu,
                             const DualPotential& phi, const NeighborOracle& oracle,
                             const EvalOptions& options) {
    const int n = mu.size();
    std::vector<ChunkOutput<D>> outputs;
    TransportEvaluation ev;
    ev.trace = traced<D>(mu, nu, phi, oracle, options, true, &outputs);

    // merge in fixed chunk order: results do not depend on the worker count
    std::vector<double> mass(n, 0.0);
    double cost = 0.0;
    for (const auto& o : outputs) {
        cost += o.cost;
        for (const auto& [cell, m] : o.mass) mass[cell] += m;
    }
    for (int i = 0; i < n; ++i) cost += phi[i] * mu.masses[i];

    ev.cost = cost;
    ev.gradient.resize(n);
    ev.empty_cells = 0;
    for (int i = 0; i < n; ++i) {
        ev.gradient[i] = mu.masses[i] - mass[i];
        if (mass[i] == 0.0) ++ev.empty_cells;
    }
    return ev;
}

template <int D>
SparseHessian hessian(const AtomicMeasure<D>& mu, const PolylineMeasure<D>& nu,
                      const DualPotential& phi, const SegmentTrace& trace) {
    (void)phi;
    const int n = mu.size();
    SparseHessian h;
    h.n = n;

    std::map<std::pair<int, int>, double> acc;
    for (int a = 0; a < nu.segment_count(); ++a) {
        const double rho = nu.densities[a];
        if (rho <= 0.0) continue;
        const double seg_len = nu.segment_length(a);
        if (!(seg_len > 0.0)) continue;
        const Vec<D> u = (nu.segment_end(a) - nu.segment_start(a)) / seg_len;
        const auto& entries = trace.segments[a];
        for (std::size_t k = 0; k + 1 < entries.size(); ++k) {
            const int i = entries[k].cell;
            const int j = entries[k + 1].cell;
            const Vec<D> d = mu.positions[j] - mu.positions[i];
            const double dn = norm(d);
            double c = std::abs(dot(u, d) / dn);
            if (c < 1e-10) {
                ++h.near_tangent_count;
                c = 1e-10;  // clamp: flagged Hessians are rejected upstream
            }
            const auto key = std::minmax(i, j);
            acc[{key.first, key.second}] += rho / (2.0 * dn * c * seg_len);
        }
    }

    std::vector<std::vector<std::pair<std::int32_t, double>>> rows(n);
    for (const auto& [ij, v] : acc) {
        rows[ij.first].push_back({ij.second, v});
        rows[ij.second].push_back({ij.first, v});
    }
    h.row_ptr.assign(n + 1, 0);
    for (int i = 0; i < n; ++i) h.row_ptr[i + 1] = h.row_ptr[i] + rows[i].size() + 1;
    h.col.resize(h.row_ptr[n]);
    h.val.resize(h.row_ptr[n]);
    for (int i = 0; i < n; ++i) {
        auto& r = rows[i];
        std::sort(r.begin(), r.end());
        double offsum = 0.0;
        for (const auto& [c, v] : r) offsum += v;
        std::int64_t k = h.row_ptr[i];
        bool placed = false;
        for (const auto& [c, v] : r) {
            if (!placed && c > i) {
                h.col[k] = i;
                h.val[k] = -offsum;
                ++k;
                placed = true;
            }
            h.col[k] = c;
            h.val[k] = v;
            ++k;
        }
        if (!placed) {
            h.col[k] = i;
            h.val[k] = -offsum;
        }
    }
    return h;
}

double gershgorin_bound(const SparseHessian& h) {
    double worst = 0.0;
    for (int i = 0; i < h.n; ++i) {
        double s = 0.0;
        for (std::int64_t k = h.row_ptr[i]; k < h.row_ptr[i + 1]; ++k)
            if (h.col[k] != i) s += std::abs(h.val[k]);
        worst = std::max(worst, s);
    }
    return 2.0 * worst;
}

template std::optional<Crossing> next_crossing<2>(const AtomicMeasure<2>&,
                                                  const PolylineMeasure<2>&,
                                                  const DualPotential&, const NeighborOracle&,
                                                  int, int, int, double);
template std::optional<Crossing> next_crossing<3>(const AtomicMeasure<3>&,
                                                  const PolylineMeasure<3>&,
                                                  const DualPotential&, const NeighborOracle&,
                                                  int, int, int, double);
template SegmentTrace trace_polyline<2>(const AtomicMeasure<2>&, const PolylineMeasure<2>&,
                                        const DualPotential&, const NeighborOracle&,
                                        const EvalOptions&);
template SegmentTrace trace_polyline<3>(const AtomicMeasure<3>&, const PolylineMeasure<3>&,
                                        const DualPotential&, const NeighborOracle&,
                                        const EvalOptions&);
template TransportEvaluation evaluate<2>(const AtomicMeasure<2>&, const PolylineMeasure<2>&,
                                         const DualPotential&, const NeighborOracle&,
                                         const EvalOptions&);
template TransportEvaluation evaluate<3>(const AtomicMeasure<3>&, const PolylineMeasure<3>&,
                                         const DualPotential&, const NeighborOracle&,
                                         const EvalOptions&);
template SparseHessian hessian<2>(const AtomicMeasure<2>&, const PolylineMeasure<2>&,
                                  const DualPotential&, const SegmentTrace&);
template SparseHessian hessian<3>(const AtomicMeasure<3>&, const PolylineMeasure<3>&,
                                  const DualPotential&, const SegmentTrace&);

}  // namespace curvot
