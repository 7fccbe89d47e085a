#include "curvot/measures.hpp"

#include <cmath>
#include <cstring>
#include <string>
#include <unordered_set>

#include "curvot/errors.hpp"

namespace curvot {

namespace {

template <int D>
struct PointKey {
    std::array<std::uint64_t, D> bits;
    bool operator==(const PointKey&) const = default;
};

template <int D>
struct PointKeyHash {
    std::size_t operator()(const PointKey<D>& k) const {
        std::uint64_t h = 0x9e3779b97f4a7c15ull;
        for (auto b : k.bits) {
            h ^= b + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        }
        return static_cast<std::size_t>(h);
    }
};

template <int D>
PointKey<D> key_of(const Vec<D>& p) {
    PointKey<D> k;
    for (int i = 0; i < D; ++i) std::memcpy(&k.bits[i], &p.c[i], sizeof(double));
    return k;
}

bool all_finite(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

template <int D>
bool all_finite(const std::vector<Vec<D>>& pts) {
    for (const auto& p : pts)
        for (int i = 0; i < D; ++i)
            if (!std::isfinite(p[i])) return false;
    return true;
}

}  // namespace

template <int D>
void validate(const AtomicMeasure<D>& mu) {
    if (mu.positions.empty()) throw Error("atomic measure needs at least one Dirac");
    if (mu.positions.size() != mu.masses.size())
        throw Error("atomic measure: positions/masses size mismatch");
    if (!all_finite(mu.positions) || !all_finite(mu.masses))
        throw Error("atomic measure: non-finite entry");
    for (double m : mu.masses)
        if (m < 0.0) throw Error("atomic measure: negative mass");

    std::unordered_set<PointKey<D>, PointKeyHash<D>> seen;
    seen.reserve(mu.positions.size() * 2);
    for (const auto& p : mu.positions) {
        if (!seen.insert(key_of(p)).second)
            throw DegenerateInput("atomic measure: duplicate Dirac positions");
    }
}

template <int D>
void validate(const PolylineMeasure<D>& nu) {
    if (nu.vertices.size() < 2) throw Error("polyline needs at least two vertices");
    if (nu.densities.size() + 1 != nu.vertices.size())
        throw Error("polyline: expected one density per segment");
    if (!all_finite(nu.vertices) || !all_finite(nu.densities))
        throw Error("polyline: non-finite entry");
    for (int a = 0; a < nu.segment_count(); ++a) {
        double rho = nu.densities[a];
        if (rho < 0.0) throw Error("polyline: negative density");
        if (nu.disjoint_mode && (a % 2 == 1) && rho != 0.0)
            throw Error("polyline: odd segment has nonzero density in disjoint mode");
        if (rho > 0.0 && nu.segment_length(a) <= 0.0)
            throw Error("polyline: positive-density segment of zero length (segment " +
                        std::to_string(a) + ")");
    }
}

template <int D>
AtomicMeasure<D> normalize(const AtomicMeasure<D>& mu) {
    double total = 0.0;
    for (double m : mu.masses) total += m;
    if (!(total > 0.0)) throw ZeroTotalMass();
    AtomicMeasure<D> out = mu;
    for (double& m : out.masses) m /= total;
    return out;
}

template <int D>
PolylineMeasure<D> normalize(const PolylineMeasure<D>& nu) {
    double total = 0.0;
    for (double r : nu.densities) total += r;
    if (!(total > 0.0)) throw ZeroTotalMass("polyline has zero total density");
    PolylineMeasure<D> out = nu;
    for (double& r : out.densities) r /= total;
    return out;
}

template <int D>
std::vector<double> density_from_lengths(const std::vector<Vec<D>>& vertices,
                                         bool disjoint_mode) {
    const int p = static_cast<int>(vertices.size()) - 1;
    if (p < 1) throw Error("density_from_lengths: need at least two vertices");
    std::vector<double> rho(p, 0.0);
    double total = 0.0;
    for (int a = 0; a < p; ++a) {
        if (disjoint_mode && (a % 2 == 1)) continue;
        rho[a] = dist(vertices[a], vertices[a + 1]);
        total += rho[a];
    }
    if (!(total > 0.0)) throw ZeroTotalLength();
    for (int a = 0; a < p; ++a) rho[a] /= total;
    return rho;
}

template <int D>
std::vector<GenericityViolation> check_genericity(const AtomicMeasure<D>& mu,
                                                  const PolylineMeasure<D>& nu,
                                                  double tolerance) {
    std::vector<GenericityViolation> out;
    const int n = mu.size();
    for (int a = 0; a < nu.segment_count(); ++a) {
        const Vec<D> u = nu.segment_end(a) - nu.segment_start(a);
        const double lu = norm(u);
        if (lu == 0.0) continue;  // no direction, nothing to test
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                const Vec<D> d = mu.positions[i] - mu.positions[j];
                if (std::abs(dot(u, d)) <= tolerance * lu * norm(d))
                    out.push_back({a, i, j});
            }
        }
    }
    return out;
}

template void validate<2>(const AtomicMeasure<2>&);
template void validate<3>(const AtomicMeasure<3>&);
template void validate<2>(const PolylineMeasure<2>&);
template void validate<3>(const PolylineMeasure<3>&);
template AtomicMeasure<2> normalize<2>(const AtomicMeasure<2>&);
template AtomicMeasure<3> normalize<3>(const AtomicMeasure<3>&);
template PolylineMeasure<2> normalize<2>(const PolylineMeasure<2>&);
template PolylineMeasure<3> normalize<3>(const PolylineMeasure<3>&);
template std::vector<double> density_from_lengths<2>(const std::vector<Vec<2>>&, bool);
template std::vector<double> density_from_lengths<3>(const std::vector<Vec<3>>&, bool);
template std::vector<GenericityViolation> check_genericity<2>(const AtomicMeasure<2>&,
                                                              const PolylineMeasure<2>&, double);
template std::vector<GenericityViolation> check_genericity<3>(const AtomicMeasure<3>&,
                                                              const PolylineMeasure<3>&, double);

}  // namespace curvot
