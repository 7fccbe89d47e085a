#include "curvot/power_diagram.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_map>

#include "curvot/errors.hpp"

namespace curvot {

namespace {

inline double det2(double a, double b, double c, double d) { return a * d - b * c; }

inline double det3(const double m[3][3]) {
    return m[0][0] * det2(m[1][1], m[1][2], m[2][1], m[2][2]) -
           m[0][1] * det2(m[1][0], m[1][2], m[2][0], m[2][2]) +
           m[0][2] * det2(m[1][0], m[1][1], m[2][0], m[2][1]);
}

inline double det4(const double m[4][4]) {
    double r = 0.0;
    for (int c = 0; c < 4; ++c) {
        double sub[3][3];
        for (int i = 1; i < 4; ++i) {
            int cc = 0;
            for (int j = 0; j < 4; ++j) {
                if (j == c) continue;
                sub[i - 1][cc++] = m[i][j];
            }
        }
        const double term = m[0][c] * det3(sub);
        r += (c % 2 == 0) ? term : -term;
    }
    return r;
}

/// Incremental Bowyer-Watson construction of the regular triangulation,
/// dimension-generic over D in {2,3}. Sites are recentred and rescaled so a
/// fixed super-simplex encloses everything; weights rescale accordingly
/// (power diagrams are invariant under that change of coordinates).
template <int D>
class RegularTriangulation {
public:
    static constexpr int V = D + 1;

    struct Simplex {
        std::array<std::int32_t, V> v;
        std::array<std::int32_t, V> nb;  // nb[k] faces the facet opposite v[k]
        bool alive = true;
    };

    void build(const std::vector<Vec<D>>& sites, const std::vector<double>& weights) {
        n_ = static_cast<int>(sites.size());
        normalize_input(sites, weights);
        make_super_simplex();

        std::vector<int> order(n_);
        std::iota(order.begin(), order.end(), 0);
        std::mt19937_64 rng(0x7a61c0f5u);
        std::shuffle(order.begin(), order.end(), rng);

        mark_.assign(simp_.capacity() + 64, 0);
        for (int id : order) insert(id);
    }

    int site_count() const { return n_; }
    const std::vector<Simplex>& simplices() const { return simp_; }
    bool is_super(int v) const { return v >= n_; }

private:
    int n_ = 0;
    std::vector<Vec<D>> pts_;    // n sites then D+1 super vertices
    std::vector<double> lift_;   // |x|^2 - w in normalized coordinates
    std::vector<Simplex> simp_;
    std::vector<int> mark_;
    int epoch_ = 0;
    int hint_ = 0;

    void normalize_input(const std::vector<Vec<D>>& sites, const std::vector<double>& weights) {
        Box<D> box = bounding_box(sites);
        const Vec<D> c = box.center();
        double scale = 0.5 * box.max_extent();
        if (!(scale > 0.0)) scale = 1.0;
        const double inv = 1.0 / scale;
        const double inv2 = inv * inv;

        // Deterministic symbolic-perturbation substitute: jitter coordinates
        // and lifts well above rounding noise and far below any real facet
        // scale. Orientation and in-sphere predicates then answer with
        // consistent, decisive signs even on degenerate (grid) inputs; the
        // diagram only changes within ~1e-11 slivers, which the tracer
        // tolerances absorb.
        auto hash01 = [](std::uint64_t h) {
            h += 0x9e3779b97f4a7c15ull;
            h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ull;
            h = (h ^ (h >> 27)) * 0x94d049bb133111ebull;
            h ^= h >> 31;
            return static_cast<double>(h >> 11) * 0x1.0p-53 - 0.5;
        };
        pts_.resize(n_);
        lift_.resize(n_);
        double lift_scale = 1.0;
        for (int i = 0; i < n_; ++i) {
            pts_[i] = (sites[i] - c) * inv;
            for (int k = 0; k < D; ++k)
                pts_[i][k] += 2e-12 * hash01(static_cast<std::uint64_t>(i) * D + k);
            lift_[i] = norm_sq(pts_[i]) - weights[i] * inv2;
            lift_scale = std::max(lift_scale, std::abs(lift_[i]));
        }
        for (int i = 0; i < n_; ++i)
            lift_[i] += 2e-11 * lift_scale * hash01(0x5eedull + i);
    }

    void make_super_simplex() {
        double m = 1.0;
        for (int i = 0; i < n_; ++i) m = std::max(m, std::abs(lift_[i]));
        const double R = 64.0 * std::max(1.0, std::sqrt(m));

        std::array<Vec<D>, V> sv{};
        if constexpr (D == 2) {
            sv[0] = Vec<2>{{0.0, R}};
            sv[1] = Vec<2>{{-0.866025403784438647 * R, -0.5 * R}};
            sv[2] = Vec<2>{{0.866025403784438647 * R, -0.5 * R}};
        } else {
            const double s = R / std::sqrt(3.0);
            sv[0] = Vec<3>{{s, s, s}};
            sv[1] = Vec<3>{{s, -s, -s}};
            sv[2] = Vec<3>{{-s, s, -s}};
            sv[3] = Vec<3>{{-s, -s, s}};
        }
        for (int k = 0; k < V; ++k) {
            pts_.push_back(sv[k]);
            lift_.push_back(norm_sq(sv[k]));
        }

        Simplex s0;
        for (int k = 0; k < V; ++k) {
            s0.v[k] = n_ + k;
            s0.nb[k] = -1;
        }
        if (orientation(s0.v) < 0.0) std::swap(s0.v[0], s0.v[1]);
        simp_.clear();
        simp_.push_back(s0);
        hint_ = 0;
    }

    double orientation(const std::array<std::int32_t, V>& v) const {
        if constexpr (D == 2) {
            const Vec<2>&a = pts_[v[0]], &b = pts_[v[1]], &c = pts_[v[2]];
            return det2(b[0] - a[0], b[1] - a[1], c[0] - a[0], c[1] - a[1]);
        } else {
            const Vec<3>&a = pts_[v[0]], &b = pts_[v[1]], &c = pts_[v[2]], &d = pts_[v[3]];
            const double m[3][3] = {{b[0] - a[0], b[1] - a[1], b[2] - a[2]},
                                    {c[0] - a[0], c[1] - a[1], c[2] - a[2]},
                                    {d[0] - a[0], d[1] - a[1], d[2] - a[2]}};
            return det3(m);
        }
    }

    // Signed volume with vertex k replaced by q; negative means q lies
    // beyond the facet opposite v[k] of a positively oriented simplex.
    double facet_side(const Simplex& s, int k, const Vec<D>& q) const {
        std::array<Vec<D>, V> p;
        for (int i = 0; i < V; ++i) p[i] = pts_[s.v[i]];
        p[k] = q;
        if constexpr (D == 2) {
            return det2(p[1][0] - p[0][0], p[1][1] - p[0][1], p[2][0] - p[0][0],
                        p[2][1] - p[0][1]);
        } else {
            const double m[3][3] = {{p[1][0] - p[0][0], p[1][1] - p[0][1], p[1][2] - p[0][2]},
                                    {p[2][0] - p[0][0], p[2][1] - p[0][1], p[2][2] - p[0][2]},
                                    {p[3][0] - p[0][0], p[3][1] - p[0][1], p[3][2] - p[0][2]}};
            return det3(m);
        }
    }

    // Lifted in-sphere predicate: for a positively oriented simplex the
    // query point q is in conflict iff the determinant is positive. Ties
    // (cospherical sites, e.g. grid inputs with equal weights) count as
    // conflicts so the inserted site is never misclassified as hidden.
    bool in_conflict(const Simplex& s, int q) const {
        const Vec<D>& qp = pts_[q];
        const double ql = lift_[q];
        // the tie band scales with the product of row magnitudes, which keeps
        // it proportionate when super-vertex rows dwarf the data rows
        double scale = 1.0;
        if constexpr (D == 2) {
            double m[3][3];
            for (int i = 0; i < 3; ++i) {
                const Vec<2>& p = pts_[s.v[i]];
                m[i][0] = p[0] - qp[0];
                m[i][1] = p[1] - qp[1];
                m[i][2] = lift_[s.v[i]] - ql;
                scale *= std::max({std::abs(m[i][0]), std::abs(m[i][1]), std::abs(m[i][2])});
            }
            return det3(m) > 0.0 && det3(m) > 1e-15 * scale;
        } else {
            double m[4][4];
            for (int i = 0; i < 4; ++i) {
                const Vec<3>& p = pts_[s.v[i]];
                m[i][0] = p[0] - qp[0];
                m[i][1] = p[1] - qp[1];
                m[i][2] = p[2] - qp[2];
                m[i][3] = lift_[s.v[i]] - ql;
                scale *= std::max({std::abs(m[i][0]), std::abs(m[i][1]), std::abs(m[i][2]),
                                   std::abs(m[i][3])});
            }
            return det4(m) > 0.0 && det4(m) > 1e-15 * scale;
        }
    }

    // Walks toward the simplex containing q, falling back to a full conflict
    // scan if the walk cycles. Returns -1 when q is hidden (no conflict).
    int locate_conflict(int q) {
        const Vec<D>& qp = pts_[q];
        int cur = hint_;
        if (cur >= static_cast<int>(simp_.size()) || !simp_[cur].alive) {
            cur = -1;
            for (int i = static_cast<int>(simp_.size()) - 1; i >= 0; --i)
                if (simp_[i].alive) {
                    cur = i;
                    break;
                }
        }
        long cap = 8 * static_cast<long>(simp_.size()) + 64;
        int spin = 0;
        while (cap-- > 0) {
            const Simplex& s = simp_[cur];
            int next = -1;
            for (int kk = 0; kk < V; ++kk) {
                const int k = (kk + spin) % V;
                if (facet_side(s, k, qp) < 0.0) {
                    next = s.nb[k];
                    break;
                }
            }
            ++spin;
            if (next == -1) {
                // contained: the conflict status of this simplex decides, with
                // a one-ring safety check against a slightly-off landing
                if (in_conflict(s, q)) return cur;
                for (int k = 0; k < V; ++k) {
                    const int t = s.nb[k];
                    if (t != -1 && simp_[t].alive && in_conflict(simp_[t], q)) return t;
                }
                return -1;
            }
            cur = next;
        }
        // walk cycled (defeated by degeneracy): exhaustive conflict scan;
        // any conflicting simplex seeds the same cavity
        for (int i = 0; i < static_cast<int>(simp_.size()); ++i)
            if (simp_[i].alive && in_conflict(simp_[i], q)) return i;
        return -1;
    }

    struct RidgeKey {
        // a cavity ridge: the D-1 facet vertices shared by two new simplices
        std::array<std::int32_t, D - 1> v;
        bool operator==(const RidgeKey&) const = default;
    };
    struct RidgeHash {
        std::size_t operator()(const RidgeKey& k) const {
            std::size_t h = 1469598103934665603ull;
            for (auto x : k.v) h = (h ^ static_cast<std::size_t>(x)) * 1099511628211ull;
            return h;
        }
    };

    void insert(int q) {
        const int seed = locate_conflict(q);
        if (seed < 0) return;  // hidden site: empty power cell at insertion time

        if (static_cast<int>(mark_.size()) < static_cast<int>(simp_.size()) + 8)
            mark_.resize(simp_.size() * 2 + 64, 0);
        ++epoch_;

        // flood fill the (connected) conflict region
        std::vector<int> dead;
        std::vector<std::pair<int, int>> boundary;  // (dead simplex, facet slot)
        std::vector<int> stack{seed};
        mark_[seed] = epoch_;
        while (!stack.empty()) {
            const int cur = stack.back();
            stack.pop_back();
            dead.push_back(cur);
            for (int k = 0; k < V; ++k) {
                const int t = simp_[cur].nb[k];
                if (t == -1) {
                    boundary.push_back({cur, k});
                    continue;
                }
                if (mark_[t] == epoch_) continue;
                if (in_conflict(simp_[t], q)) {
                    mark_[t] = epoch_;
                    stack.push_back(t);
                } else {
                    boundary.push_back({cur, k});
                }
            }
        }
        for (int s : dead) simp_[s].alive = false;

        std::unordered_map<RidgeKey, std::pair<int, int>, RidgeHash> ridges;
        ridges.reserve(boundary.size() * D);

        for (const auto& [ds, k] : boundary) {
            const Simplex& old = simp_[ds];
            Simplex ns;
            ns.v[0] = q;
            int w = 1;
            for (int i = 0; i < V; ++i)
                if (i != k) ns.v[w++] = old.v[i];
            if (orientation(ns.v) < 0.0) std::swap(ns.v[1], ns.v[2]);

            const int outer = old.nb[k];
            ns.nb[0] = outer;
            for (int i = 1; i < V; ++i) ns.nb[i] = -1;

            const int id = static_cast<int>(simp_.size());
            // patch the surviving outer neighbor to point at the new simplex
            if (outer != -1) {
                Simplex& o = simp_[outer];
                for (int i = 0; i < V; ++i)
                    if (o.nb[i] == ds) o.nb[i] = id;
            }
            simp_.push_back(ns);
            if (static_cast<int>(mark_.size()) < static_cast<int>(simp_.size()) + 8)
                mark_.resize(simp_.size() * 2 + 64, 0);

            // ridge wiring between new simplices around the cavity
            for (int i = 1; i < V; ++i) {
                RidgeKey key;
                int c = 0;
                for (int j = 1; j < V; ++j)
                    if (j != i) key.v[c++] = simp_[id].v[j];
                std::sort(key.v.begin(), key.v.end());
                auto it = ridges.find(key);
                if (it == ridges.end()) {
                    ridges.emplace(key, std::make_pair(id, i));
                } else {
                    simp_[id].nb[i] = it->second.first;
                    simp_[it->second.first].nb[it->second.second] = id;
                    ridges.erase(it);
                }
            }
            hint_ = id;
        }
    }
};

template <int D>
NeighborOracle adjacency_from_triangulation(const AtomicMeasure<D>& mu,
                                            const DualPotential& phi) {
    const int n = mu.size();
    RegularTriangulation<D> tri;
    tri.build(mu.positions, phi);

    std::vector<std::vector<std::int32_t>> lists(n);
    std::vector<char> seen(n, 0);
    for (const auto& s : tri.simplices()) {
        if (!s.alive) continue;
        for (int a = 0; a <= D; ++a) {
            const int va = s.v[a];
            if (va >= n) continue;
            seen[va] = 1;
            for (int b = a + 1; b <= D; ++b) {
                const int vb = s.v[b];
                if (vb >= n) continue;
                lists[va].push_back(vb);
                lists[vb].push_back(va);
            }
        }
    }
    for (auto& l : lists) {
        std::sort(l.begin(), l.end());
        l.erase(std::unique(l.begin(), l.end()), l.end());
    }

    // hidden sites borrow the candidates of their power-nearest visible
    // site, found by greedy descent of the power distance over the adjacency
    // graph; the lists are then symmetrized to keep j in N(i) <=> i in N(j)
    int first_seen = -1;
    for (int i = 0; i < n && first_seen < 0; ++i)
        if (seen[i]) first_seen = i;
    if (first_seen < 0) return NeighborOracle::brute_force(n);

    auto power_to = [&](int site, int target) {
        return dist_sq(mu.positions[target], mu.positions[site]) - phi[site];
    };
    std::vector<int> hidden;
    int cursor = first_seen;  // consecutive hidden sites tend to be close
    for (int i = 0; i < n; ++i) {
        if (seen[i]) continue;
        int cur = cursor;
        long guard = 4L * n + 16;
        for (;;) {
            if (guard-- < 0) {  // descent cycled: exact scan for this site
                cur = -1;
                double bestpow = std::numeric_limits<double>::infinity();
                for (int j = 0; j < n; ++j)
                    if (seen[j] && power_to(j, i) < bestpow) {
                        bestpow = power_to(j, i);
                        cur = j;
                    }
                break;
            }
            int next = cur;
            double best = power_to(cur, i);
            for (int m : lists[cur]) {
                if (!seen[m]) continue;
                const double pw = power_to(m, i);
                if (pw < best) {
                    best = pw;
                    next = m;
                }
            }
            if (next == cur) break;
            cur = next;
        }
        if (cur < 0) return NeighborOracle::brute_force(n);
        cursor = cur;
        auto l = lists[cur];
        l.push_back(cur);
        std::sort(l.begin(), l.end());
        l.erase(std::unique(l.begin(), l.end()), l.end());
        l.erase(std::remove(l.begin(), l.end(), i), l.end());
        lists[i] = std::move(l);
        hidden.push_back(i);
    }
    // symmetrize: the hidden members sit after the active prefix so the
    // crossing search can skip them
    std::vector<std::int32_t> active(n);
    for (int i = 0; i < n; ++i) active[i] = static_cast<std::int32_t>(lists[i].size());
    for (int i : hidden) {
        for (std::int32_t j : lists[i]) lists[j].push_back(i);
    }

    if (n >= 2) {
        for (const auto& l : lists)
            if (l.empty()) return NeighborOracle::brute_force(n);
    }
    return NeighborOracle::adjacency(n, std::move(lists), std::move(active));
}

}  // namespace

NeighborOracle NeighborOracle::brute_force(int n) {
    NeighborOracle o;
    o.mode_ = OracleMode::brute_force;
    o.n_ = n;
    o.all_.resize(n);
    std::iota(o.all_.begin(), o.all_.end(), 0);
    return o;
}

NeighborOracle NeighborOracle::adjacency(int n, std::vector<std::vector<std::int32_t>> lists,
                                         std::vector<std::int32_t> active_counts) {
    NeighborOracle o;
    o.mode_ = OracleMode::adjacency;
    o.n_ = n;
    o.lists_ = std::move(lists);
    o.active_counts_ = std::move(active_counts);
    return o;
}

template <int D>
NeighborOracle build_oracle(const AtomicMeasure<D>& mu, const DualPotential& phi,
                            OracleMode mode) {
    const int n = mu.size();
    if (static_cast<int>(phi.size()) != n)
        throw Error("build_oracle: potential size does not match measure");
    if (mode == OracleMode::brute_force) return NeighborOracle::brute_force(n);
    if (n == 1) return NeighborOracle::adjacency(1, {{}});
    try {
        return adjacency_from_triangulation(mu, phi);
    } catch (const std::exception&) {
        return NeighborOracle::brute_force(n);
    }
}

template NeighborOracle build_oracle<2>(const AtomicMeasure<2>&, const DualPotential&,
                                        OracleMode);
template NeighborOracle build_oracle<3>(const AtomicMeasure<3>&, const DualPotential&,
                                        OracleMode);

}  // namespace curvot
