#include "mixdual/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "mixdual/errors.hpp"

namespace mixdual {

Eigen::VectorXd recover_z(const Eigen::VectorXd& x, const Eigen::MatrixXd& B, double tol) {
  const double q = x.dot(B * x);
  if (q > tol) return x / std::sqrt(q);
  return Eigen::VectorXd::Zero(x.size());
}

double schwartz_gap(const Eigen::VectorXd& x, const Eigen::VectorXd& z, const Eigen::MatrixXd& B) {
  return sqrt_term(x, B) * sqrt_term(z, B) - x.dot(B * z);
}

namespace {

// min ‖A v‖² subject to v >= lo and Σ_{i<p} vᵢ = 1, by a primal active-set
// method started from v = (1/p, ..., 1/p, 0, ..., 0) with every bound on
// the trailing block in the working set.
Eigen::VectorXd active_set_qp(const Eigen::MatrixXd& A, int p, const Eigen::VectorXd& lo) {
  const int nv = static_cast<int>(A.cols());
  Eigen::MatrixXd H = A.transpose() * A;
  const double ridge = 1e-14 * std::max(1.0, H.diagonal().maxCoeff());
  H.diagonal().array() += ridge;

  Eigen::VectorXd v = lo;
  v.head(p).setConstant(1.0 / p);
  std::vector<bool> working(nv, false);
  for (int i = 0; i < nv; ++i) working[i] = v[i] <= lo[i];

  for (int iter = 0; iter < 20 * (nv + 1); ++iter) {
    std::vector<int> free;
    int free_lambda = 0;
    for (int i = 0; i < nv; ++i)
      if (!working[i]) {
        free.push_back(i);
        free_lambda += i < p;
      }
    const int nf = static_cast<int>(free.size());
    const int rows = nf + (free_lambda > 0 ? 1 : 0);
    const Eigen::VectorXd grad = H * v;
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(rows, rows);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(rows);
    for (int a = 0; a < nf; ++a) {
      for (int b = 0; b < nf; ++b) K(a, b) = H(free[a], free[b]);
      rhs[a] = -grad[free[a]];
      if (free_lambda > 0 && free[a] < p) K(a, nf) = K(nf, a) = 1.0;
    }
    const Eigen::VectorXd sol = rows ? Eigen::VectorXd(K.fullPivLu().solve(rhs)) : Eigen::VectorXd();
    const double nu = free_lambda > 0 ? sol[nf] : 0.0;
    Eigen::VectorXd step = Eigen::VectorXd::Zero(nv);
    for (int a = 0; a < nf; ++a) step[free[a]] = sol[a];

    if (step.cwiseAbs().maxCoeff() <= 1e-13 * (1.0 + v.cwiseAbs().maxCoeff())) {
      int worst = -1;
      double worst_mult = -1e-14 * std::max(1.0, grad.cwiseAbs().maxCoeff());
      for (int i = 0; i < nv; ++i) {
        if (!working[i]) continue;
        const double mult = grad[i] + (i < p ? nu : 0.0);
        if (mult < worst_mult) {
          worst_mult = mult;
          worst = i;
        }
      }
      if (worst < 0) break;
      working[worst] = false;
      continue;
    }
    double alpha = 1.0;
    int blocking = -1;
    for (int i : free)
      if (step[i] < 0.0) {
        const double limit = (lo[i] - v[i]) / step[i];
        if (limit < alpha) {
          alpha = limit;
          blocking = i;
        }
      }
    v += alpha * step;
    if (blocking >= 0) {
      v[blocking] = lo[blocking];
      working[blocking] = true;
    }
  }
  return v;
}

// min ‖A v‖² subject to Σ_{i<p} vᵢ = 1 only.
Eigen::VectorXd equality_only_ls(const Eigen::MatrixXd& A, int p) {
  const int nv = static_cast<int>(A.cols());
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(nv + 1, nv + 1);
  K.topLeftCorner(nv, nv) = A.transpose() * A;
  K.diagonal().head(nv).array() += 1e-14 * std::max(1.0, K.diagonal().maxCoeff());
  for (int i = 0; i < p; ++i) K(i, nv) = K(nv, i) = 1.0;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nv + 1);
  rhs[nv] = 1.0;
  return K.fullPivLu().solve(rhs).head(nv);
}

Eigen::VectorXd flatten_rows(const Eigen::MatrixXd& field, int margin) {
  const int rows = static_cast<int>(field.rows()) - 2 * margin;
  const int n = static_cast<int>(field.cols());
  Eigen::VectorXd out(std::max(0, rows) * n);
  for (int k = 0; k < rows; ++k)
    for (int c = 0; c < n; ++c) out[k * n + c] = field(margin + k, c);
  return out;
}

}  // namespace

RecoveryResult recover_multipliers(const ProblemSpec& spec, const PrimalPoint& xbar, const Partition& part, double tol,
                                   const RecoveryOptions& options) {
  if (part.m() != spec.m) throw InvalidPartition("partition is for a different number of constraints");
  const Report feasible = primal_feasibility(spec, xbar, options.solver.feas_tol);
  if (!feasible.passed()) throw InfeasibleInput("recovery needs a feasible point\n" + feasible.summary());
  if (options.verify_efficiency) {
    const Report eff = efficiency_check(spec, xbar, options.efficiency_tol, options.solver);
    if (!eff.passed()) throw NotEfficient("recovery needs an efficient point\n" + eff.summary());
  }
  const GridPtr grid = xbar.x.grid_ptr();
  const int N = grid->size();
  const int n = spec.n;
  const int p = spec.p;
  const int margin = stationarity_margin(spec);
  if (N - 2 * margin < 1) throw DomainError("recovery: grid too small for the stationarity margin");

  std::vector<Trajectory> z;
  for (int i = 0; i < p; ++i) {
    Eigen::MatrixXd Z(N, n);
    for (int k = 0; k < N; ++k)
      Z.row(k) = recover_z(xbar.x.values().row(k).transpose(), spec.B[i], options.z_tol).transpose();
    z.emplace_back(grid, Z);
  }
  DualPoint dp{xbar, Trajectory(grid, spec.m), z, Eigen::VectorXd::Constant(p, 1.0 / p)};

  // Columns for λ: the field of objective i alone.
  std::vector<Eigen::VectorXd> columns;
  for (int i = 0; i < p; ++i) {
    DualPoint unit = dp;
    unit.lambda = Eigen::VectorXd::Unit(p, i);
    columns.push_back(flatten_rows(stationarity_field(spec, unit), margin));
  }
  // Columns for y at active nodes; pairs that do not reach the measured rows
  // stay at zero.
  struct YEntry {
    int node, constraint;
  };
  std::vector<YEntry> entries;
  int active = 0;
  for (int j = 0; j < spec.m; ++j) {
    const IntegrandSamples s = sample_integrand(spec.g[j], xbar);
    const bool rate = spec.g[j].references(VarKind::Rate);
    const bool accel = spec.g[j].references(VarKind::Accel);
    for (int k = 0; k < N; ++k) {
      if (!(s.value[k] > -options.active_tol)) continue;
      ++active;
      Eigen::MatrixXd field = Eigen::MatrixXd::Zero(N, n);
      field.row(k) = s.dx.row(k);
      if (rate) {
        Eigen::MatrixXd e = Eigen::MatrixXd::Zero(N, n);
        e.row(k) = s.dxd.row(k);
        field -= apply_derivative(*grid, e);
      }
      if (accel) {
        Eigen::MatrixXd e = Eigen::MatrixXd::Zero(N, n);
        e.row(k) = s.dxdd.row(k);
        field += apply_second_derivative(*grid, e);
      }
      Eigen::VectorXd col = flatten_rows(field, margin);
      if (col.cwiseAbs().maxCoeff() == 0.0) continue;
      columns.push_back(std::move(col));
      entries.push_back({k, j});
    }
  }
  Eigen::MatrixXd A(columns.front().size(), columns.size());
  for (std::size_t c = 0; c < columns.size(); ++c) A.col(c) = columns[c];
  Eigen::VectorXd lo = Eigen::VectorXd::Zero(A.cols());
  lo.head(p).setConstant(options.lambda_floor);

  const Eigen::VectorXd v = active_set_qp(A, p, lo);
  const Eigen::VectorXd v_free = equality_only_ls(A, p);

  RecoveryResult result{dp, 0.0, 0.0, 0.0, {}, {}, active, false, false};
  DualPoint& out = result.dual_point;
  out.lambda = v.head(p);
  Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(N, spec.m);
  for (std::size_t e = 0; e < entries.size(); ++e) Y(entries[e].node, entries[e].constraint) = v[p + e];
  out.y = Trajectory(grid, Y);

  result.stationarity_residual = stationarity_residual(spec, out);
  const double constrained_ls = (A * v).norm();
  const double free_ls = (A * v_free).norm();
  result.unconstrained_residual = stationarity_residual(
      spec, DualPoint{xbar, Trajectory(grid, [&] {
                        Eigen::MatrixXd Yf = Eigen::MatrixXd::Zero(N, spec.m);
                        for (std::size_t e = 0; e < entries.size(); ++e)
                          Yf(entries[e].node, entries[e].constraint) = v_free[p + e];
                        return Yf;
                      }()),
                      z, v_free.head(p)});
  result.flagged = constrained_ls > 1.1 * free_ls + 1e-12;
  result.boundary_degenerate = out.lambda.minCoeff() <= options.lambda_floor * (1.0 + 1e-9);

  const Eigen::VectorXd primal = primal_objective(spec, xbar);
  result.objective_gap = primal - dual_objective(spec, part, out);
  result.partition_sums = partition_sums(spec, part, out);
  result.slackness_residual = std::abs(result.partition_sums.sum());

  if (result.stationarity_residual > tol) {
    std::string why = "recovery: stationarity residual " + format_double(result.stationarity_residual) +
                      " exceeds " + format_double(tol);
    if (result.boundary_degenerate) why += " (lambda at the floor)";
    throw RecoveryFailed(why);
  }
  return result;
}

std::string RecoveryResult::to_csv() const {
  std::string out = "quantity,index,value\n";
  auto row = [&](const std::string& q, int index, double value) {
    out += q + "," + std::to_string(index) + "," + format_double(value) + "\n";
  };
  for (int i = 0; i < dual_point.lambda.size(); ++i) row("lambda", i + 1, dual_point.lambda[i]);
  for (int a = 0; a < partition_sums.size(); ++a) row("partition_sum", a, partition_sums[a]);
  row("stationarity_residual", 0, stationarity_residual);
  row("unconstrained_residual", 0, unconstrained_residual);
  row("slackness_residual", 0, slackness_residual);
  for (int i = 0; i < objective_gap.size(); ++i) row("objective_gap", i + 1, objective_gap[i]);
  row("active_nodes", 0, active_nodes);
  row("flagged", 0, flagged ? 1.0 : 0.0);
  row("boundary_degenerate", 0, boundary_degenerate ? 1.0 : 0.0);
  return out;
}

namespace {

void add_objective_equality(Report& report, const Eigen::VectorXd& primal, const Eigen::VectorXd& dual, double tol) {
  for (int i = 0; i < primal.size(); ++i) {
    const double rel = std::abs(primal[i] - dual[i]) / (1.0 + std::abs(primal[i]));
    report.add_upper("objective_gap." + std::to_string(i + 1), rel, tol,
                     "primal=" + format_double(primal[i]) + " dual=" + format_double(dual[i]));
  }
}

}  // namespace

Report strong_duality_check(const ProblemSpec& spec, const Partition& part, const RecoveryResult& recovered,
                            double tol) {
  const DualPoint& dp = recovered.dual_point;
  Report report("strong_duality");
  report.append(dual_feasibility(spec, part, dp, tol), "dual.");
  add_objective_equality(report, primal_objective(spec, dp.u), dual_objective(spec, part, dp), tol);
  report.add_upper("slackness", recovered.slackness_residual, tol);
  Check& flag = report.add_upper("recovery_flagged", recovered.flagged ? 1.0 : 0.0, 0.0,
                                 "constrained " + format_double(recovered.stationarity_residual) +
                                     " vs unconstrained " + format_double(recovered.unconstrained_residual));
  flag.gating = false;
  return report;
}

Report strong_duality_check(const ProblemSpec& spec, const Partition& part, const PrimalPoint& xbar, double tol,
                            const RecoveryOptions& options) {
  return strong_duality_check(spec, part, recover_multipliers(spec, xbar, part, tol, options), tol);
}

Report converse_duality_check(const ProblemSpec& spec, const Partition& part, const DualPoint& dp, double tol) {
  check_dual_point(spec, dp);
  const int p = spec.p;
  const int margin = stationarity_margin(spec);
  const GridPtr grid = dp.u.x.grid_ptr();
  const int N = grid->size();

  // Per-objective vectors fⁱ_x + Bⁱzⁱ + Σ_{J0} yg_x − D(·) + D²(·).
  Eigen::MatrixXd Y0 = Eigen::MatrixXd::Zero(N, spec.m);
  for (int j : part.set(0)) Y0.col(j) = dp.y.values().col(j);
  std::vector<Eigen::VectorXd> vecs;
  for (int i = 0; i < p; ++i) {
    DualPoint unit = dp;
    unit.lambda = Eigen::VectorXd::Unit(p, i);
    unit.y = Trajectory(grid, Y0);
    vecs.push_back(flatten_rows(stationarity_field(spec, unit), margin));
  }
  Eigen::MatrixXd G(p, p);
  for (int a = 0; a < p; ++a)
    for (int b = 0; b < p; ++b) G(a, b) = vecs[a].dot(vecs[b]);
  const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(G, Eigen::EigenvaluesOnly).eigenvalues();
  const double smax = std::sqrt(std::max(0.0, ev.maxCoeff()));
  const double smin = std::sqrt(std::max(0.0, ev.minCoeff()));
  const double ratio = smax > 0.0 ? smin / smax : 0.0;

  Report report("converse_duality");
  Check& rank = report.add_lower("independence_ratio", ratio, tol,
                                 "sigma_min=" + format_double(smin) + " sigma_max=" + format_double(smax));
  rank.gating = false;
  report.append(primal_feasibility(spec, dp.u, tol), "primal.");
  add_objective_equality(report, primal_objective(spec, dp.u), dual_objective(spec, part, dp), tol);
  return report;
}

}  // namespace mixdual
