#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "curvot/measures.hpp"
#include "curvot/transport.hpp"

namespace curvot {

enum class SolveMethod { gradient, bb, nesterov, lbfgs, hybrid };

struct SolverConfig {
    SolveMethod method = SolveMethod::hybrid;
    /// L2 target on the gradient norm; 0 picks the method default
    /// (1e-6 for hybrid, 5e-5 otherwise).
    double grad_tol = 0.0;
    int outer_max = 1000;
    int lbfgs_memory = 10;
    double c1 = 1e-4;  // strong Wolfe sufficient-increase constant
    double c2 = 0.9;   // strong Wolfe curvature constant
    /// Gradient-Lipschitz estimate for the Nesterov step 1/L;
    /// 0 = half the Gershgorin bound at the initial iterate.
    double nesterov_L = 0.0;
    /// Fixed step for the gradient method instead of the Wolfe search (0 = off).
    double fixed_step = 0.0;
    OracleMode oracle_mode = OracleMode::adjacency;
    EvalOptions eval;
    bool record_history = true;

    double effective_grad_tol() const {
        if (grad_tol > 0.0) return grad_tol;
        return method == SolveMethod::hybrid ? 1e-6 : 5e-5;
    }
};

enum class StepKind { initial, gradient, quasi_newton, newton, momentum, bb_step };

const char* to_string(StepKind k);

struct IterationRecord {
    int iteration;
    double cost;
    double grad_norm;
    double step;
    int empty_cells;
    StepKind branch;
};

struct ConvergenceHistory {
    std::vector<IterationRecord> records;
    void write_csv(std::ostream& os) const;
};

/// Objective evaluation fed to the solvers: the dual functional value, its
/// gradient, and the extras the hybrid switch needs.
struct DualEval {
    double cost = 0.0;
    std::vector<double> gradient;
    int empty_cells = 0;
    SegmentTrace trace;
};

using DualObjective = std::function<DualEval(const std::vector<double>&)>;
using HessianFactory = std::function<SparseHessian(const std::vector<double>&, const SegmentTrace&)>;

struct WolfeResult {
    bool ok = false;
    double step = 0.0;
    DualEval eval;  // objective at phi + step * d when ok
    int evaluations = 0;
};

/// Strong-Wolfe line search for ASCENT: finds s with
///   g(phi + s d) >= g(phi) + c1 s <grad, d>    and
///   |<grad(phi + s d), d>| <= c2 |<grad(phi), d>|.
/// Throws std::invalid_argument unless d is an ascent direction. Returns
/// ok = false after `max_evals` objective evaluations.
WolfeResult wolfe_line_search(const DualObjective& g, const std::vector<double>& phi,
                              const DualEval& at_phi, const std::vector<double>& d,
                              double initial_step, double c1 = 1e-4, double c2 = 0.9,
                              int max_evals = 50);

struct SolveResult {
    DualPotential phi;
    ConvergenceHistory history;
    bool converged = false;
    double final_cost = 0.0;
    double final_grad_norm = 0.0;
    int final_empty_cells = 0;
    int evaluations = 0;
};

/// Maximizes an arbitrary concave objective; the hessian factory may be null
/// for first-order methods (required by the hybrid method).
SolveResult solve_objective(const DualObjective& g, const HessianFactory& hessian_factory,
                            DualPotential phi_init, const SolverConfig& config);

/// Maximizes the semi-discrete dual over phi. Rebuilds the neighbor oracle
/// at every evaluation point.
template <int D>
SolveResult solve(const AtomicMeasure<D>& mu, const PolylineMeasure<D>& nu,
                  DualPotential phi_init, const SolverConfig& config);

/// Same entry point restricted to the first-order methods
/// {gradient, bb, nesterov}; throws on other methods.
template <int D>
SolveResult solve_first_order(const AtomicMeasure<D>& mu, const PolylineMeasure<D>& nu,
                              DualPotential phi_init, const SolverConfig& config);

}  // namespace curvot
