#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "mixdual/expr.hpp"
#include "mixdual/grid.hpp"
#include "mixdual/report.hpp"

namespace mixdual {

enum class BoundaryKind {
  FixedZero,  ///< x(a) = 0 = x(b) and ẋ(a) = 0 = ẋ(b)
  Natural,    ///< free endpoints
};

std::string to_string(BoundaryKind kind);

/// A multiobjective variational problem
///
///     minimize  ( ∫ f^i(t, x, ẋ, ẍ) + sqrt(xᵀ B^i x) dt )_{i=1..p}
///     s.t.      g^j(t, x, ẋ, ẍ) <= 0 on [a, b],  j = 1..m
///
/// plus the boundary conditions selected by `boundary`. B^i are constant
/// symmetric positive semidefinite matrices.
///
/// Text form, one `key = value` per line, `#` starts a comment:
///
///     name = P1
///     n = 2
///     p = 2
///     m = 2
///     a = 0            # optional, default 0
///     b = 1            # optional, default 1
///     boundary = fixed_zero | natural
///     f.1 = <expr>     # 1-based, one per objective
///     g.1 = <expr>     # 1-based, one per constraint
///     B.1 = 1,0; 0,1   # rows separated by ';', entries by ','; omitted = zero
///     note = free text
struct ProblemSpec {
  std::string name;
  std::string note;
  int n = 0;
  int p = 0;
  int m = 0;
  double a = 0.0;
  double b = 1.0;
  BoundaryKind boundary = BoundaryKind::FixedZero;
  std::vector<Expr> f;
  std::vector<Eigen::MatrixXd> B;
  std::vector<Expr> g;

  static ProblemSpec parse(std::string_view text);
  static ProblemSpec load(const std::string& path);
  std::string to_text() const;

  /// Throws DomainError when dimensions or matrices are inconsistent.
  void validate() const;

  bool references(VarKind kind) const;
  /// No expression mentions t, xd or xdd.
  bool is_static() const;
};

/// x together with its discrete derivatives ẋ = Dx and ẍ = D(Dx).
struct PrimalPoint {
  explicit PrimalPoint(Trajectory x);

  const TimeGrid& grid() const { return x.grid(); }

  Trajectory x;
  Trajectory xd;
  Trajectory xdd;
};

/// Integrand values and partials at every node of a trajectory.
struct IntegrandSamples {
  Eigen::VectorXd value;
  Eigen::MatrixXd dx;
  Eigen::MatrixXd dxd;
  Eigen::MatrixXd dxdd;
};

IntegrandSamples sample_integrand(const Expr& e, const PrimalPoint& pt);
Eigen::VectorXd sample_values(const Expr& e, const PrimalPoint& pt);

/// sqrt(max(0, vᵀBv)).
double sqrt_term(const Eigen::VectorXd& v, const Eigen::MatrixXd& B);

Eigen::VectorXd primal_objective(const ProblemSpec& spec, const PrimalPoint& pt);

/// Worst constraint value over all nodes, plus endpoint residuals for
/// FixedZero problems.
Report primal_feasibility(const ProblemSpec& spec, const PrimalPoint& pt, double tol);

/// Symmetric within tol and smallest eigenvalue >= -tol. Throws NonSquare.
bool psd_check(const Eigen::MatrixXd& B, double tol);

}  // namespace mixdual
