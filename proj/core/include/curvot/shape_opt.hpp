#pragma once

#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "curvot/measures.hpp"
#include "curvot/solvers.hpp"
#include "curvot/transport.hpp"

namespace curvot {

/// Derivative of G(nu) = g(phi*, nu) with respect to the polyline vertices.
/// `position_part` is the torque-style term at fixed densities; `total` adds
/// the chain-rule contribution through the length-normalized densities.
template <int D>
struct ShapeGradient {
    std::vector<Vec<D>> position_part;
    std::vector<Vec<D>> total;
};

struct ShapeGradientOptions {
    /// Tolerance phi* was solved to; a stored dual whose gradient norm
    /// exceeds 10x this throws StaleDual.
    double dual_tolerance = 1e-6;
};

/// Speed/acceleration bounds on the polyline: segment lengths at most k1,
/// second differences at most k2. Infinity disables a family.
struct KinematicConstraints {
    double k1 = std::numeric_limits<double>::infinity();
    double k2 = std::numeric_limits<double>::infinity();

    bool any() const { return std::isfinite(k1) || std::isfinite(k2); }
};

struct AdmmConfig {
    double penalty = 1.0;
    double tolerance = 1e-8;
    int max_iterations = 5000;
};

template <int D>
struct AdmmResult {
    std::vector<Vec<D>> vertices;
    int iterations = 0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    bool converged = false;
};

template <int D>
ShapeGradient<D> shape_gradient(const AtomicMeasure<D>& mu, const PolylineMeasure<D>& nu,
                                const DualPotential& phi, const SegmentTrace& trace,
                                const ShapeGradientOptions& options = {});

/// Per-segment (midpoint, mass-weighted average of the Dirac positions seen
/// by the segment). For an isolated segment the averaged vertex gradient is
/// rho * (midpoint - average).
template <int D>
std::vector<std::pair<Vec<D>, Vec<D>>> barycenter_diagnostic(const AtomicMeasure<D>& mu,
                                                             const PolylineMeasure<D>& nu,
                                                             const DualPotential& phi,
                                                             const SegmentTrace& trace);

/// Euclidean projection of the vertex list onto the kinematic constraint set
/// via ADMM splitting on first and second differences.
template <int D>
AdmmResult<D> project_kinematic(const std::vector<Vec<D>>& vertices,
                                const KinematicConstraints& constraints,
                                const AdmmConfig& config = {});

struct ShapeConfig {
    double grad_tol_inf = 1e-3;
    int outer_max = 500;
    KinematicConstraints constraints;
    AdmmConfig admm;
    /// Optional halving backtracking on the metric step (the plain scheme
    /// takes the full step).
    bool backtracking = false;
};

struct ShapeIterationRecord {
    int iteration;
    double cost;        // G at the current polyline
    double grad_inf;    // max-norm of the total vertex gradient
    int inner_iterations;
};

enum class ShapeStatus { converged, iteration_cap, inner_solve_failed };

template <int D>
struct ShapeResult {
    PolylineMeasure<D> polyline;
    DualPotential phi;
    std::vector<ShapeIterationRecord> history;
    ShapeStatus status = ShapeStatus::iteration_cap;
};

template <int D>
using ShapeObserver = std::function<void(int iteration, const PolylineMeasure<D>&,
                                         const DualPotential&)>;

/// Metric-preconditioned descent on the vertex positions: solve the inner
/// transport problem (warm-started), step P -= Sigma^{-1} grad with
/// Sigma = diag((rho_{a-1}+rho_a)/2), optionally project onto the kinematic
/// set, recompute length-normalized densities, repeat until the vertex
/// gradient max-norm drops below the threshold.
template <int D>
ShapeResult<D> optimize_polyline(const AtomicMeasure<D>& mu, const PolylineMeasure<D>& nu_init,
                                 const SolverConfig& inner, const ShapeConfig& config,
                                 const ShapeObserver<D>& observer = {});

}  // namespace curvot
