#include "curvot/synthetic.hpp"

#include <cmath>
#include <random>

namespace curvot {

template <int D>
AtomicMeasure<D> random_cloud(int n, std::uint64_t seed, bool random_masses) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    AtomicMeasure<D> mu;
    mu.positions.resize(n);
    mu.masses.assign(n, 1.0 / n);
    for (auto& p : mu.positions)
        for (int c = 0; c < D; ++c) p[c] = uni(rng);
    if (random_masses) {
        double total = 0.0;
        for (auto& m : mu.masses) {
            m = 0.05 + uni(rng);
            total += m;
        }
        for (auto& m : mu.masses) m /= total;
    }
    return mu;
}

template <int D>
PolylineMeasure<D> random_polyline(int p, std::uint64_t seed, bool disjoint_mode) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    PolylineMeasure<D> nu;
    nu.disjoint_mode = disjoint_mode;
    nu.vertices.resize(p + 1);
    for (auto& v : nu.vertices)
        for (int c = 0; c < D; ++c) v[c] = uni(rng);
    nu.densities = density_from_lengths(nu.vertices, disjoint_mode);
    return nu;
}

template <int D>
PolylineMeasure<D> random_walk_polyline(int p, std::uint64_t seed, double step,
                                        bool disjoint_mode, double max_turn) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    PolylineMeasure<D> nu;
    nu.disjoint_mode = disjoint_mode;
    nu.vertices.resize(p + 1);

    auto random_unit = [&] {
        Vec<D> dir;
        double n2;
        do {  // uniform direction via rejection from the ball
            for (int c = 0; c < D; ++c) dir[c] = 2.0 * uni(rng) - 1.0;
            n2 = norm_sq(dir);
        } while (n2 > 1.0 || n2 < 1e-8);
        return dir * (1.0 / std::sqrt(n2));
    };

    Vec<D> cur;
    for (int c = 0; c < D; ++c) cur[c] = uni(rng);
    nu.vertices[0] = cur;
    Vec<D> heading = random_unit();
    for (int k = 1; k <= p; ++k) {
        if (max_turn < 3.14159) {
            // bend the heading by at most max_turn toward a random side
            Vec<D> side = random_unit();
            side -= dot(side, heading) * heading;
            const double sn = norm(side);
            const double angle = (2.0 * uni(rng) - 1.0) * max_turn;
            if (sn > 1e-12) {
                heading = std::cos(angle) * heading + (std::sin(angle) / sn) * side;
                heading *= 1.0 / norm(heading);
            }
        } else {
            heading = random_unit();
        }
        cur += heading * step;
        for (int c = 0; c < D; ++c) {  // reflect into [0,1]
            if (cur[c] < 0.0) {
                cur[c] = -cur[c];
                heading[c] = -heading[c];
            }
            if (cur[c] > 1.0) {
                cur[c] = 2.0 - cur[c];
                heading[c] = -heading[c];
            }
            cur[c] = std::clamp(cur[c], 0.0, 1.0);
        }
        nu.vertices[k] = cur;
    }
    nu.densities = density_from_lengths(nu.vertices, disjoint_mode);
    return nu;
}

DualPotential random_potential(int n, std::uint64_t seed, double scale) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-scale, scale);
    DualPotential phi(n);
    for (auto& v : phi) v = uni(rng);
    return phi;
}

template <int D>
std::pair<AtomicMeasure<D>, PolylineMeasure<D>> generic_instance(int n, int p,
                                                                 std::uint64_t seed,
                                                                 double tolerance) {
    for (std::uint64_t s = seed;; ++s) {
        AtomicMeasure<D> mu = random_cloud<D>(n, s);
        PolylineMeasure<D> nu = random_polyline<D>(p, s ^ 0x517cc1b727220a95ull);
        if (check_genericity(mu, nu, tolerance).empty()) return {std::move(mu), std::move(nu)};
    }
}

template AtomicMeasure<2> random_cloud<2>(int, std::uint64_t, bool);
template AtomicMeasure<3> random_cloud<3>(int, std::uint64_t, bool);
template PolylineMeasure<2> random_polyline<2>(int, std::uint64_t, bool);
template PolylineMeasure<3> random_polyline<3>(int, std::uint64_t, bool);
template PolylineMeasure<2> random_walk_polyline<2>(int, std::uint64_t, double, bool, double);
template PolylineMeasure<3> random_walk_polyline<3>(int, std::uint64_t, double, bool, double);
template std::pair<AtomicMeasure<2>, PolylineMeasure<2>> generic_instance<2>(int, int,
                                                                             std::uint64_t,
                                                                             double);
template std::pair<AtomicMeasure<3>, PolylineMeasure<3>> generic_instance<3>(int, int,
                                                                             std::uint64_t,
                                                                             double);

}  // namespace curvot
