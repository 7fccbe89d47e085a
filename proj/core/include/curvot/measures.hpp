#pragma once

#include <cstdint>
#include <vector>

#include "curvot/geometry.hpp"

namespace curvot {

/// Weighted point cloud: the atomic measure with Dirac positions and masses.
/// Immutable by convention once validated; safe to share across threads.
template <int D>
struct AtomicMeasure {
    std::vector<Vec<D>> positions;
    std::vector<double> masses;

    int size() const { return static_cast<int>(positions.size()); }
};

/// Probability measure carried by a polyline: p+1 vertices, p per-segment
/// densities. A density is the TOTAL mass of its segment, not mass per unit
/// length. density == 0 marks a chain break; in disjoint mode every odd
/// segment has density 0 so the support is a set of disjoint segments.
template <int D>
struct PolylineMeasure {
    std::vector<Vec<D>> vertices;
    std::vector<double> densities;
    bool disjoint_mode = false;

    int segment_count() const { return static_cast<int>(vertices.size()) - 1; }
    Vec<D> segment_start(int a) const { return vertices[a]; }
    Vec<D> segment_end(int a) const { return vertices[a + 1]; }
    double segment_length(int a) const { return dist(vertices[a], vertices[a + 1]); }
};

/// Kantorovich multipliers, one entry per Dirac of the paired AtomicMeasure.
using DualPotential = std::vector<double>;

/// Throws (ZeroTotalMass, DegenerateInput, Error) when the measure violates
/// its invariants: n >= 1, finite nonnegative masses, pairwise distinct
/// positions. Distinctness is checked bitwise, which is what the Laguerre
/// machinery actually requires.
template <int D>
void validate(const AtomicMeasure<D>& mu);

/// Validation for polylines: >= 2 vertices, finite nonnegative densities of
/// matching length, positive-density segments have positive length, odd
/// densities vanish in disjoint mode.
template <int D>
void validate(const PolylineMeasure<D>& nu);

/// Returns a copy with masses scaled to sum to one. Throws ZeroTotalMass.
template <int D>
AtomicMeasure<D> normalize(const AtomicMeasure<D>& mu);

/// Returns a copy with densities scaled to sum to one. Throws ZeroTotalMass.
template <int D>
PolylineMeasure<D> normalize(const PolylineMeasure<D>& nu);

/// Per-segment densities proportional to segment length. In disjoint mode
/// only even segments are active: odd entries are 0 and the normalization
/// runs over even segments. Throws ZeroTotalLength when every active segment
/// is degenerate.
template <int D>
std::vector<double> density_from_lengths(const std::vector<Vec<D>>& vertices,
                                         bool disjoint_mode = false);

/// One near-orthogonal (segment direction, inter-site vector) pair. Indices
/// are zero-based and i < j.
struct GenericityViolation {
    int segment;
    int i;
    int j;
};

/// Scans all (segment, Dirac pair) triples for |<P_{a+1}-P_a, x_i-x_j>| <=
/// tolerance * |P_{a+1}-P_a| * |x_i-x_j|. Empty result means the genericity
/// hypothesis holds at this tolerance. O(p n^2): intended for test-scale
/// inputs; callers should warn before running it on large instances.
template <int D>
std::vector<GenericityViolation> check_genericity(const AtomicMeasure<D>& mu,
                                                  const PolylineMeasure<D>& nu,
                                                  double tolerance);

}  // namespace curvot
