#pragma once

#include <string>

#include <Eigen/Core>

#include "mixdual/dual.hpp"
#include "mixdual/problem.hpp"
#include "mixdual/report.hpp"
#include "mixdual/solver.hpp"

namespace mixdual {

/// x / sqrt(xᵀBx) when xᵀBx > tol, else zero. Then xᵀBz = sqrt(xᵀBx) and
/// zᵀBz ∈ {0, 1}.
Eigen::VectorXd recover_z(const Eigen::VectorXd& x, const Eigen::MatrixXd& B, double tol = 1e-14);

/// sqrt(xᵀBx)·sqrt(zᵀBz) − xᵀBz; nonnegative for PSD B up to roundoff.
double schwartz_gap(const Eigen::VectorXd& x, const Eigen::VectorXd& z, const Eigen::MatrixXd& B);

struct RecoveryOptions {
  double active_tol = 1e-6;    ///< g > -active_tol counts as active
  double lambda_floor = 1e-6;
  double z_tol = 1e-14;
  /// Run efficiency_check first and throw NotEfficient when it fails.
  bool verify_efficiency = false;
  double efficiency_tol = 1e-6;
  SolverOptions solver;
};

struct RecoveryResult {
  DualPoint dual_point;
  double stationarity_residual = 0.0;
  /// Residual with only λᵀe = 1 imposed; a lower bound for the above.
  double unconstrained_residual = 0.0;
  /// |Σⱼ ∫ yʲgʲ dt|.
  double slackness_residual = 0.0;
  Eigen::VectorXd objective_gap;  ///< primal − dual, per objective
  Eigen::VectorXd partition_sums;  ///< Σ_{j∈Jα} ∫ yʲgʲ dt, α = 0..r
  int active_nodes = 0;            ///< (node, constraint) pairs in the active set
  /// Constrained residual exceeds 1.1× the unconstrained one.
  bool flagged = false;
  /// Some λ component sits at the floor.
  bool boundary_degenerate = false;

  /// Rows `quantity,index,value`.
  std::string to_csv() const;
};

/// Recovers (λ, y, z) at x̄ so that x̄ becomes a feasible point of the mixed
/// dual with the primal objective values. Throws InfeasibleInput when x̄ is
/// infeasible, NotEfficient when requested verification fails and
/// RecoveryFailed when the stationarity residual stays above tol.
RecoveryResult recover_multipliers(const ProblemSpec& spec, const PrimalPoint& xbar, const Partition& part, double tol,
                                   const RecoveryOptions& options = {});

/// Dual feasibility of a recovered point plus relative objective gaps
/// |Pᵢ − Dᵢ| / (1 + |Pᵢ|) <= tol.
Report strong_duality_check(const ProblemSpec& spec, const Partition& part, const RecoveryResult& recovered,
                            double tol);
/// Runs recover_multipliers first.
Report strong_duality_check(const ProblemSpec& spec, const Partition& part, const PrimalPoint& xbar, double tol,
                            const RecoveryOptions& options = {});

/// Converse checks at a dual-feasible point: (a) smallest over largest
/// singular value of the p per-objective stationarity vectors
/// (informational), (b) primal feasibility of u, (c) objective equality.
Report converse_duality_check(const ProblemSpec& spec, const Partition& part, const DualPoint& dp, double tol);

}  // namespace mixdual
