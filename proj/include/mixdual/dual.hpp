#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "mixdual/grid.hpp"
#include "mixdual/problem.hpp"
#include "mixdual/report.hpp"

namespace mixdual {

/// Disjoint index sets J0..Jr covering the constraints {0..m-1}.
/// Indices are 0-based in memory and 1-based in text.
class Partition {
 public:
  /// Throws InvalidPartition unless the sets are disjoint, in range and
  /// cover every constraint.
  Partition(int m, std::vector<std::vector<int>> sets);

  /// Parses `J0={1,3};J1={2};J2={}`. Sets must appear in order J0, J1, ...
  static Partition parse(std::string_view text, int m);
  /// J0 = M.
  static Partition wolfe(int m);
  /// J0 = {}, J1 = M.
  static Partition mond_weir(int m);

  int m() const { return m_; }
  int r() const { return static_cast<int>(sets_.size()) - 1; }
  const std::vector<int>& set(int alpha) const { return sets_.at(alpha); }
  const std::vector<std::vector<int>>& sets() const { return sets_; }
  bool in_j0(int j) const;

  std::string to_string() const;

 private:
  int m_;
  std::vector<std::vector<int>> sets_;
};

enum class DualKind { Wolfe, MondWeir, Mixed };

std::string to_string(DualKind kind);

DualKind classify(const Partition& part);

/// A candidate point (u, y, z¹..zᵖ, λ) of the mixed dual. y holds the m
/// multiplier densities; z[i] has the state dimension.
struct DualPoint {
  PrimalPoint u;
  Trajectory y;
  std::vector<Trajectory> z;
  Eigen::VectorXd lambda;
};

/// Throws LengthMismatch or GridMismatch when dp does not fit spec.
void check_dual_point(const ProblemSpec& spec, const DualPoint& dp);

/// ∫ f^i + uᵀBⁱzⁱ + Σ_{j∈J0} yʲgʲ dt for each i.
Eigen::VectorXd dual_objective(const ProblemSpec& spec, const Partition& part, const DualPoint& dp);

/// Σ_{j∈Jα} ∫ yʲgʲ dt for α = 0..r.
Eigen::VectorXd partition_sums(const ProblemSpec& spec, const Partition& part, const DualPoint& dp);

/// Nodewise stationarity field (N×n):
///   Σᵢλⁱ(fⁱ_x + Bⁱzⁱ) + yᵀg_x − D(λᵀf_ẋ + yᵀg_ẋ) + D²(λᵀf_ẍ + yᵀg_ẍ).
Eigen::MatrixXd stationarity_field(const ProblemSpec& spec, const DualPoint& dp);

/// Number of rows excluded at each end when measuring the stationarity
/// residual. On the remaining rows the field coincides with the gradient of
/// the discrete Lagrangian divided by the quadrature weight: 4 when ẍ
/// appears, 3 when ẋ appears or the problem has fixed endpoints, else 0.
int stationarity_margin(const ProblemSpec& spec);

/// Largest Euclidean row norm of the field outside the margin.
double stationarity_residual(const ProblemSpec& spec, const DualPoint& dp);

/// Endpoint conditions, stationarity, partition sums (α >= 1), z-norms,
/// y >= 0, λ > 0 and λᵀe = 1; transversality for natural problems.
Report dual_feasibility(const ProblemSpec& spec, const Partition& part, const DualPoint& dp, double tol);

/// Flags dominance of the primal objective vector by the dual one.
/// Throws InfeasibleInput unless x and dp are feasible within feas_tol.
Report weak_duality_check(const ProblemSpec& spec, const Partition& part, const PrimalPoint& x, const DualPoint& dp,
                          double tol, double feas_tol = 1e-4);

/// fⁱ_ẋ + Σ_{J0} yʲgʲ_ẋ and fⁱ_ẍ + Σ_{J0} yʲgʲ_ẍ at both endpoints, per i.
/// Throws WrongBoundaryKind for fixed-endpoint problems.
Report transversality_residual(const ProblemSpec& spec, const Partition& part, const DualPoint& dp, double tol = 1e-3);

/// Named values of a dual formulation: objective components and constraint
/// quantities in the naming used by dual_feasibility.
struct DualValues {
  Eigen::VectorXd objective;
  std::vector<std::pair<std::string, double>> constraints;
};

/// The Wolfe dual evaluated directly: all of yᵀg in the objective, no
/// integral constraints.
DualValues wolfe_dual_values(const ProblemSpec& spec, const DualPoint& dp);
/// The Mond-Weir dual evaluated directly: no y terms in the objective,
/// ∫ yᵀg dt >= 0 as a constraint.
DualValues mond_weir_dual_values(const ProblemSpec& spec, const DualPoint& dp);

/// A problem whose expressions do not depend on t, ẋ or ẍ, read as a
/// finite-dimensional program.
struct StaticDualPoint {
  Eigen::VectorXd u;
  Eigen::VectorXd y;
  std::vector<Eigen::VectorXd> z;
  Eigen::VectorXd lambda;
};

class StaticPair {
 public:
  /// Throws NotStatic.
  explicit StaticPair(const ProblemSpec& spec);

  const ProblemSpec& spec() const { return spec_; }

  /// fⁱ(x) + sqrt(xᵀBⁱx).
  Eigen::VectorXd primal(const Eigen::VectorXd& x) const;
  Eigen::VectorXd constraints(const Eigen::VectorXd& x) const;
  bool primal_feasible(const Eigen::VectorXd& x, double tol) const;

  /// fⁱ(u) + uᵀBⁱzⁱ + Σ_{j∈J0} yʲgʲ(u).
  Eigen::VectorXd dual_objective(const Partition& part, const StaticDualPoint& dp) const;
  /// Σᵢλⁱ(fⁱ_u + Bⁱzⁱ) + Σⱼ yʲ gʲ_u.
  Eigen::VectorXd stationarity(const StaticDualPoint& dp) const;
  Report dual_feasibility(const Partition& part, const StaticDualPoint& dp, double tol) const;

 private:
  Eigen::VectorXd gradient(const Expr& e, const Eigen::VectorXd& x) const;

  ProblemSpec spec_;
};

}  // namespace mixdual
