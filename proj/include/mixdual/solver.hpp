#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "mixdual/grid.hpp"
#include "mixdual/problem.hpp"
#include "mixdual/report.hpp"

namespace mixdual {

struct SolverOptions {
  double tol = 1e-6;       ///< KKT residual (stationarity and complementarity)
  double feas_tol = 1e-6;  ///< constraint violation
  int max_outer = 50;
  int max_inner = 500;
  double mu0 = 1e-2;  ///< initial smoothing of the square-root terms
  double mu_min = 1e-8;
  double rho0 = 10.0;
  double rho_max = 1e12;
};

enum class SolveStatus { Converged, MaxIter, Infeasible };

std::string to_string(SolveStatus status);

struct SolveResult {
  PrimalPoint x;
  Eigen::VectorXd objective;  ///< exact (unsmoothed) objective values
  double kkt_residual = 0.0;
  double max_violation = 0.0;
  int iterations = 0;  ///< outer iterations
  int inner_iterations = 0;
  SolveStatus status = SolveStatus::MaxIter;
  /// Constraint multiplier densities y^j(t_k) estimated by the outer loop.
  Eigen::MatrixXd multipliers;
  /// Outer-loop penalty and violation after every accepted iteration.
  std::vector<double> penalty_history;
  std::vector<double> violation_history;
};

/// Objective i bounded by `bound` (an ε-constraint row).
struct ObjectiveBound {
  int objective = 0;
  double bound = 0.0;
};

/// The discretized primal as a finite-dimensional NLP.
///
/// The decision vector holds the node values that are free under the
/// problem's boundary conditions. For FixedZero problems the end nodes are
/// zero and the second and second-to-last nodes are tied to their inner
/// neighbours (x₁ = x₂/4) so that the one-sided derivative rows vanish.
/// Layout is node-major: entry (k·n + c) is component c of the k-th free node.
class NlpInstance {
 public:
  NlpInstance(const ProblemSpec& spec, GridPtr grid, Eigen::VectorXd weights, std::vector<ObjectiveBound> bounds = {});

  const ProblemSpec& spec() const { return *spec_; }
  const TimeGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  const std::vector<ObjectiveBound>& bounds() const { return bounds_; }

  int num_variables() const { return free_nodes_ * spec_->n; }
  int first_free_node() const { return first_free_; }
  int free_nodes() const { return free_nodes_; }
  /// Trapezoid weight of the node that owns variable v.
  double variable_weight(int v) const;

  Eigen::MatrixXd to_values(const Eigen::VectorXd& v) const;
  /// Reads the free nodes; the tied nodes of `values` are ignored.
  Eigen::VectorXd from_values(const Eigen::MatrixXd& values) const;
  /// Maps a gradient with respect to all node values onto the free variables.
  Eigen::VectorXd restrict_gradient(const Eigen::MatrixXd& full) const;

  /// Objective values with square roots smoothed as sqrt(vᵀBv + μ²);
  /// μ = 0 gives the exact objective.
  Eigen::VectorXd objectives(const Eigen::VectorXd& v, double mu = 0.0) const;
  /// Column i is the gradient of objective i (requires μ > 0 at points where
  /// a square-root argument vanishes).
  Eigen::MatrixXd objective_gradients(const Eigen::VectorXd& v, double mu) const;
  /// Σ weights_i · objectives_i.
  double scalarized(const Eigen::VectorXd& v, double mu) const;
  Eigen::VectorXd scalarized_gradient(const Eigen::VectorXd& v, double mu) const;
  /// g^j at node k, as an N×m matrix.
  Eigen::MatrixXd constraint_values(const Eigen::VectorXd& v) const;
  /// Objective-bound rows: objective_i(v) - bound <= 0.
  Eigen::VectorXd bound_values(const Eigen::VectorXd& v, double mu) const;

  /// Node-level evaluation of every f and g with their gradients.
  struct Evaluation;
  Evaluation evaluate(const Eigen::VectorXd& v, double mu, bool with_gradients) const;
  /// Gradient of Σ_i c_i J_i + Σ_{j,k} C(k,j) g^j(t_k) with respect to v.
  Eigen::VectorXd combined_gradient(const Evaluation& ev, const Eigen::VectorXd& objective_coef,
                                    const Eigen::MatrixXd& constraint_coef) const;

 private:
  const ProblemSpec* spec_;
  GridPtr grid_;
  Eigen::VectorXd weights_;
  std::vector<ObjectiveBound> bounds_;
  int first_free_ = 0;
  int free_nodes_ = 0;
};

struct NlpInstance::Evaluation {
  Eigen::MatrixXd values;  ///< node values (N×n)
  Eigen::MatrixXd rates;
  Eigen::MatrixXd accels;
  Eigen::MatrixXd f;       ///< N×p integrand values, square-root term included
  Eigen::MatrixXd g;       ///< N×m constraint values
  /// Per expression (f first, then g): N×3n gradients [x | xd | xdd],
  /// with the smoothed square-root gradient folded into the f blocks.
  std::vector<Eigen::MatrixXd> grads;
};

/// Minimizes Σ wᵢ·objectiveᵢ. Weights must be nonnegative, sum to one and
/// have at least one positive entry. x0 defaults to zero on a grid of
/// `grid` nodes.
SolveResult solve_weighted(const ProblemSpec& spec, const GridPtr& grid, const Eigen::VectorXd& weights,
                           const std::optional<Trajectory>& x0 = std::nullopt, const SolverOptions& opts = {});

/// Minimizes objective k (0-based) subject to objective_i <= bounds_i for
/// every i != k. `bounds` has p-1 entries in increasing i order.
SolveResult solve_epsilon_constraint(const ProblemSpec& spec, const GridPtr& grid, int k, const Eigen::VectorXd& bounds,
                                     const std::optional<Trajectory>& x0 = std::nullopt,
                                     const SolverOptions& opts = {});

/// Re-solves every ε-constraint problem anchored at x̄ and reports how much
/// each objective could still improve. Efficient iff every improvement <= tol.
Report efficiency_check(const ProblemSpec& spec, const PrimalPoint& xbar, double tol, const SolverOptions& opts = {});

struct SweepResult {
  std::vector<SolveResult> points;
  std::vector<Eigen::VectorXd> point_weights;
  /// Solves that threw or failed, with the weight vector that caused them.
  std::vector<std::string> errors;
};

/// One weighted solve per weight vector; results closer than `dedupe` in
/// max-norm over node values are merged into the first.
SweepResult pareto_sweep(const ProblemSpec& spec, const GridPtr& grid, const std::vector<Eigen::VectorXd>& weight_grid,
                         const SolverOptions& opts = {}, double dedupe = 1e-4);

/// Evenly spaced weight vectors (p = 2) strictly inside the simplex.
std::vector<Eigen::VectorXd> simplex_weights(int p, int count);

}  // namespace mixdual
