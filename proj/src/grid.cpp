#include "mixdual/grid.hpp"

#include <cmath>
#include <string>

#include "mixdual/errors.hpp"

namespace mixdual {

TimeGrid::TimeGrid(double a, double b, int size) : a_(a), b_(b) {
  if (!(b > a)) throw DomainError("grid: need b > a");
  if (size < 5) throw DomainError("grid: need at least 5 nodes, got " + std::to_string(size));
  h_ = (b - a) / (size - 1);
  nodes_.resize(size);
  for (int k = 0; k < size; ++k) nodes_[k] = a + k * h_;
  nodes_[size - 1] = b;
  weights_ = Eigen::VectorXd::Constant(size, h_);
  weights_[0] = weights_[size - 1] = 0.5 * h_;
}

GridPtr make_grid(double a, double b, int size) { return std::make_shared<const TimeGrid>(a, b, size); }

Trajectory::Trajectory(GridPtr grid, Eigen::MatrixXd values) : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw DomainError("trajectory: missing grid");
  if (values_.rows() != grid_->size())
    throw LengthMismatch("trajectory: " + std::to_string(values_.rows()) + " rows for a grid of " +
                         std::to_string(grid_->size()) + " nodes");
  if (values_.cols() < 1) throw DomainError("trajectory: need at least one component");
  if (!values_.allFinite()) throw DomainError("trajectory: non-finite entry");
}

Trajectory::Trajectory(GridPtr grid, int dim)
    : Trajectory(grid, Eigen::MatrixXd::Zero(grid ? grid->size() : 0, dim)) {}

Eigen::MatrixXd apply_derivative(const TimeGrid& grid, const Eigen::MatrixXd& v) {
  const int n = grid.size();
  if (v.rows() != n) throw LengthMismatch("derivative: row count does not match grid");
  const double inv2h = 1.0 / (2.0 * grid.spacing());
  Eigen::MatrixXd out(n, v.cols());
  out.row(0) = (-3.0 * v.row(0) + 4.0 * v.row(1) - v.row(2)) * inv2h;
  for (int k = 1; k + 1 < n; ++k) out.row(k) = (v.row(k + 1) - v.row(k - 1)) * inv2h;
  out.row(n - 1) = (3.0 * v.row(n - 1) - 4.0 * v.row(n - 2) + v.row(n - 3)) * inv2h;
  return out;
}

Eigen::MatrixXd apply_derivative_transpose(const TimeGrid& grid, const Eigen::MatrixXd& v) {
  const int n = grid.size();
  if (v.rows() != n) throw LengthMismatch("derivative transpose: row count does not match grid");
  const double inv2h = 1.0 / (2.0 * grid.spacing());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, v.cols());
  // Scatter each row of D.
  out.row(0) += -3.0 * inv2h * v.row(0);
  out.row(1) += 4.0 * inv2h * v.row(0);
  out.row(2) += -1.0 * inv2h * v.row(0);
  for (int k = 1; k + 1 < n; ++k) {
    out.row(k + 1) += inv2h * v.row(k);
    out.row(k - 1) -= inv2h * v.row(k);
  }
  out.row(n - 1) += 3.0 * inv2h * v.row(n - 1);
  out.row(n - 2) += -4.0 * inv2h * v.row(n - 1);
  out.row(n - 3) += 1.0 * inv2h * v.row(n - 1);
  return out;
}

Eigen::MatrixXd apply_second_derivative(const TimeGrid& grid, const Eigen::MatrixXd& v,
                                        SecondDerivativeStencil stencil) {
  if (stencil == SecondDerivativeStencil::Composed) return apply_derivative(grid, apply_derivative(grid, v));
  const int n = grid.size();
  if (v.rows() != n) throw LengthMismatch("second derivative: row count does not match grid");
  const double invh2 = 1.0 / (grid.spacing() * grid.spacing());
  Eigen::MatrixXd out(n, v.cols());
  out.row(0) = (2.0 * v.row(0) - 5.0 * v.row(1) + 4.0 * v.row(2) - v.row(3)) * invh2;
  for (int k = 1; k + 1 < n; ++k) out.row(k) = (v.row(k - 1) - 2.0 * v.row(k) + v.row(k + 1)) * invh2;
  out.row(n - 1) = (2.0 * v.row(n - 1) - 5.0 * v.row(n - 2) + 4.0 * v.row(n - 3) - v.row(n - 4)) * invh2;
  return out;
}

Eigen::MatrixXd apply_second_derivative_transpose(const TimeGrid& grid, const Eigen::MatrixXd& v) {
  return apply_derivative_transpose(grid, apply_derivative_transpose(grid, v));
}

Trajectory derivative(const Trajectory& x) {
  return Trajectory(x.grid_ptr(), apply_derivative(x.grid(), x.values()));
}

Trajectory second_derivative(const Trajectory& x, SecondDerivativeStencil stencil) {
  return Trajectory(x.grid_ptr(), apply_second_derivative(x.grid(), x.values(), stencil));
}

double integrate(std::span<const double> f, const TimeGrid& grid) {
  if (static_cast<int>(f.size()) != grid.size())
    throw LengthMismatch("integrate: " + std::to_string(f.size()) + " samples for " +
                         std::to_string(grid.size()) + " nodes");
  const auto& w = grid.weights();
  double sum = 0.0;
  for (int k = 0; k < grid.size(); ++k) sum += w[k] * f[k];
  return sum;
}

double integrate(const Eigen::VectorXd& f, const TimeGrid& grid) {
  return integrate(std::span<const double>(f.data(), static_cast<std::size_t>(f.size())), grid);
}

void require_same_grid(const Trajectory& lhs, const Trajectory& rhs) {
  if (!(lhs.grid() == rhs.grid())) throw GridMismatch("trajectories live on different grids");
}

double adjoint_identity_residual(const Trajectory& phi, const Trajectory& psi) {
  require_same_grid(phi, psi);
  if (phi.dim() != psi.dim()) throw GridMismatch("adjoint identity: component counts differ");
  const int last = phi.size() - 1;
  const double scale = std::max(1.0, phi.values().cwiseAbs().maxCoeff());
  if (phi.row(0).cwiseAbs().maxCoeff() > 1e-12 * scale || phi.row(last).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw DomainError("adjoint identity: phi must vanish at both endpoints");
  const auto& grid = phi.grid();
  const Eigen::MatrixXd dphi = apply_derivative(grid, phi.values());
  const Eigen::MatrixXd dpsi = apply_derivative(grid, psi.values());
  const Eigen::VectorXd integrand =
      dphi.cwiseProduct(psi.values()).rowwise().sum() + phi.values().cwiseProduct(dpsi).rowwise().sum();
  return std::abs(integrate(integrand, grid));
}

}  // namespace mixdual
