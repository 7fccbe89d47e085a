#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "curvot/measures.hpp"
#include "curvot/power_diagram.hpp"

namespace curvot {

/// One maximal interval of a segment inside a single Laguerre cell.
struct TraceEntry {
    std::int32_t cell;
    double t_start;
    double t_end;
};

/// Ordered cell intervals per segment. For a positive-density segment the
/// intervals tile [0,1] exactly: first t_start is 0, last t_end is 1,
/// consecutive entries share their boundary time and have distinct cells.
struct SegmentTrace {
    std::vector<std::vector<TraceEntry>> segments;
};

struct TransportEvaluation {
    double cost = 0.0;                  // value of the dual functional g
    std::vector<double> gradient;       // d g / d phi_i = m_i - nu(Lag_i)
    int empty_cells = 0;                // #{i : nu(Lag_i) == 0}
    SegmentTrace trace;
};

/// Symmetric sparse second derivative of g with respect to phi, stored CSR
/// with both triangles and the diagonal. Off-diagonal entries are >= 0, the
/// diagonal is the negated off-diagonal row sum, so H*1 == 0 by construction
/// and H is negative semidefinite.
struct SparseHessian {
    int n = 0;
    std::vector<std::int64_t> row_ptr;
    std::vector<std::int32_t> col;
    std::vector<double> val;
    int near_tangent_count = 0;  // crossings with |cos theta| clamped at 1e-10

    void apply(const double* x, double* y) const;  // y = H x
    double diagonal(int i) const;
    /// Off-diagonal entries in storage order, diagonal added last; exactly
    /// zero by construction of the diagonal.
    double row_sum(int i) const;
};

struct EvalOptions {
    int threads = 1;
    /// Number of contiguous segment chunks. Fixed independently of the
    /// thread count (0 = min(p, 256)) so results are bit-identical for any
    /// number of workers.
    int chunk_count = 0;
};

struct Crossing {
    std::int32_t cell;
    double t;
};

/// Earliest crossing out of `current_cell` along segment `a` after time
/// `t_now`, searching oracle candidates. `previous_cell` (-1 for none) is
/// excluded. Returns nullopt when the segment ends inside the current cell.
template <int D>
std::optional<Crossing> next_crossing(const AtomicMeasure<D>& mu, const PolylineMeasure<D>& nu,
                                      const DualPotential& phi, const NeighborOracle& oracle,
                                      int a, int current_cell, int previous_cell, double t_now);

/// Traces every segment through the Laguerre tessellation. Zero-density
/// segments are traced as bridges (entries recorded, no mass); in disjoint
/// mode odd segments are skipped and only walked to locate the next start.
template <int D>
SegmentTrace trace_polyline(const AtomicMeasure<D>& mu, const PolylineMeasure<D>& nu,
                            const DualPotential& phi, const NeighborOracle& oracle,
                            const EvalOptions& options = {});

/// Cost, gradient, empty-cell count and trace in one pass. The quadratic
/// integrand is integrated exactly with two-point Gauss-Legendre quadrature
/// per trace interval.
template <int D>
TransportEvaluation evaluate(const AtomicMeasure<D>& mu, const PolylineMeasure<D>& nu,
                             const DualPotential& phi, const NeighborOracle& oracle,
                             const EvalOptions& options = {});

/// Assembles the sparse Hessian from the crossings recorded in a trace.
template <int D>
SparseHessian hessian(const AtomicMeasure<D>& mu, const PolylineMeasure<D>& nu,
                      const DualPotential& phi, const SegmentTrace& trace);

/// 2 * max_i sum_{j != i} |H_ij|: Gershgorin upper bound on the local
/// gradient-Lipschitz constant.
double gershgorin_bound(const SparseHessian& h);

}  // namespace curvot
