#pragma once

#include <memory>
#include <span>

#include <Eigen/Core>

namespace mixdual {

/// Uniform grid on [a, b] with N >= 5 nodes and trapezoidal weights.
class TimeGrid {
 public:
  TimeGrid(double a, double b, int size);

  double a() const { return a_; }
  double b() const { return b_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  double spacing() const { return h_; }
  double node(int k) const { return nodes_[k]; }
  const Eigen::VectorXd& nodes() const { return nodes_; }
  /// Trapezoid weights: h/2 at the endpoints, h elsewhere.
  const Eigen::VectorXd& weights() const { return weights_; }

  bool operator==(const TimeGrid& other) const {
    return a_ == other.a_ && b_ == other.b_ && size() == other.size();
  }

 private:
  double a_;
  double b_;
  double h_;
  Eigen::VectorXd nodes_;
  Eigen::VectorXd weights_;
};

using GridPtr = std::shared_ptr<const TimeGrid>;

GridPtr make_grid(double a, double b, int size);

/// Sampled vector function: row k holds x(t_k).
class Trajectory {
 public:
  Trajectory(GridPtr grid, Eigen::MatrixXd values);
  /// Zero trajectory with `dim` components.
  Trajectory(GridPtr grid, int dim);

  const TimeGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  int dim() const { return static_cast<int>(values_.cols()); }
  int size() const { return static_cast<int>(values_.rows()); }
  const Eigen::MatrixXd& values() const { return values_; }
  Eigen::MatrixXd& values() { return values_; }
  auto row(int k) const { return values_.row(k); }

 private:
  GridPtr grid_;
  Eigen::MatrixXd values_;
};

/// How the second derivative is formed.
enum class SecondDerivativeStencil {
  Composed,  ///< D applied twice; the operator used by every duality residual
  Direct,    ///< 3-point interior stencil with 4-point one-sided closures
};

/// Column-wise first difference on a grid: central in the interior,
/// second-order one-sided at both ends.
Eigen::MatrixXd apply_derivative(const TimeGrid& grid, const Eigen::MatrixXd& values);
/// Transpose of apply_derivative.
Eigen::MatrixXd apply_derivative_transpose(const TimeGrid& grid, const Eigen::MatrixXd& values);
Eigen::MatrixXd apply_second_derivative(const TimeGrid& grid, const Eigen::MatrixXd& values,
                                        SecondDerivativeStencil stencil = SecondDerivativeStencil::Composed);
/// Transpose of the composed second derivative.
Eigen::MatrixXd apply_second_derivative_transpose(const TimeGrid& grid, const Eigen::MatrixXd& values);

Trajectory derivative(const Trajectory& x);
Trajectory second_derivative(const Trajectory& x,
                             SecondDerivativeStencil stencil = SecondDerivativeStencil::Composed);

/// Trapezoidal rule. Throws LengthMismatch when f does not match the grid.
double integrate(std::span<const double> f, const TimeGrid& grid);
double integrate(const Eigen::VectorXd& f, const TimeGrid& grid);

/// |∫(Dφ)ᵀψ dt + ∫φᵀ(Dψ) dt| on the grid. φ must vanish at both endpoints,
/// so the boundary term of integration by parts drops out.
double adjoint_identity_residual(const Trajectory& phi, const Trajectory& psi);

/// Throws GridMismatch unless both trajectories live on equal grids.
void require_same_grid(const Trajectory& lhs, const Trajectory& rhs);

}  // namespace mixdual
