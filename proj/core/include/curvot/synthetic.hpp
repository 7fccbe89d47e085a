#pragma once

#include <cstdint>
#include <utility>

#include "curvot/measures.hpp"

namespace curvot {

/// Seeded generators for the random instance families used by the tests and
/// the benchmark harness. All draws use an explicit mt19937_64 stream so a
/// (seed, size) pair pins the instance.

/// n Diracs uniform in the unit box; masses uniform 1/n or random (then
/// normalized).
template <int D>
AtomicMeasure<D> random_cloud(int n, std::uint64_t seed, bool random_masses = false);

/// Polyline with p independent uniform vertices in the unit box and
/// length-proportional densities ("drawing segments uniformly").
template <int D>
PolylineMeasure<D> random_polyline(int p, std::uint64_t seed, bool disjoint_mode = false);

/// Seeded random-walk polyline: steps of length `step`, reflected into the
/// unit box. Successive directions differ by at most `max_turn` radians
/// (pi = unconstrained), which keeps the walk close to a kinematically
/// feasible path.
template <int D>
PolylineMeasure<D> random_walk_polyline(int p, std::uint64_t seed, double step,
                                        bool disjoint_mode = false,
                                        double max_turn = 3.14159265358979323846);

/// Random potential with entries uniform in [-scale, scale].
DualPotential random_potential(int n, std::uint64_t seed, double scale);

/// Random (cloud, polyline) pair re-seeded until the genericity hypothesis
/// holds at `tolerance`; returns the instance and the seed actually used.
template <int D>
std::pair<AtomicMeasure<D>, PolylineMeasure<D>> generic_instance(int n, int p,
                                                                 std::uint64_t seed,
                                                                 double tolerance = 1e-8);

}  // namespace curvot
