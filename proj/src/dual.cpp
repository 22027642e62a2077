#include "mixdual/dual.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "mixdual/errors.hpp"

namespace mixdual {

Partition::Partition(int m, std::vector<std::vector<int>> sets) : m_(m), sets_(std::move(sets)) {
  if (m < 1) throw InvalidPartition("partition: m must be positive");
  if (sets_.empty()) throw InvalidPartition("partition: J0 is required");
  std::vector<int> owner(m, -1);
  for (std::size_t alpha = 0; alpha < sets_.size(); ++alpha) {
    auto& s = sets_[alpha];
    std::sort(s.begin(), s.end());
    for (int j : s) {
      if (j < 0 || j >= m)
        throw InvalidPartition("partition: index " + std::to_string(j + 1) + " outside 1.." + std::to_string(m));
      if (owner[j] >= 0)
        throw InvalidPartition("partition: index " + std::to_string(j + 1) + " appears in J" +
                               std::to_string(owner[j]) + " and J" + std::to_string(alpha));
      owner[j] = static_cast<int>(alpha);
    }
  }
  for (int j = 0; j < m; ++j)
    if (owner[j] < 0) throw InvalidPartition("partition: index " + std::to_string(j + 1) + " is in no set");
}

Partition Partition::parse(std::string_view text, int m) {
  std::vector<std::vector<int>> sets;
  std::size_t pos = 0;
  auto skip = [&] {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  };
  auto expect = [&](char c) {
    skip();
    if (pos >= text.size() || text[pos] != c)
      throw InvalidPartition("partition: expected '" + std::string(1, c) + "' at position " + std::to_string(pos));
    ++pos;
  };
  auto integer = [&] {
    skip();
    const std::size_t start = pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    if (start == pos) throw InvalidPartition("partition: expected integer at position " + std::to_string(start));
    return std::stoi(std::string(text.substr(start, pos - start)));
  };
  skip();
  while (pos < text.size()) {
    expect('J');
    const int alpha = integer();
    if (alpha != static_cast<int>(sets.size()))
      throw InvalidPartition("partition: expected J" + std::to_string(sets.size()) + ", found J" +
                             std::to_string(alpha));
    expect('=');
    expect('{');
    std::vector<int> s;
    skip();
    if (pos < text.size() && text[pos] != '}') {
      for (;;) {
        s.push_back(integer() - 1);
        skip();
        if (pos < text.size() && text[pos] == ',') {
          ++pos;
          continue;
        }
        break;
      }
    }
    expect('}');
    sets.push_back(std::move(s));
    skip();
    if (pos < text.size()) {
      expect(';');
      skip();
    }
  }
  if (sets.empty()) throw InvalidPartition("partition: empty text");
  return Partition(m, std::move(sets));
}

Partition Partition::wolfe(int m) {
  std::vector<int> all(m);
  for (int j = 0; j < m; ++j) all[j] = j;
  return Partition(m, {all});
}

Partition Partition::mond_weir(int m) {
  std::vector<int> all(m);
  for (int j = 0; j < m; ++j) all[j] = j;
  return Partition(m, {{}, all});
}

bool Partition::in_j0(int j) const { return std::binary_search(sets_[0].begin(), sets_[0].end(), j); }

std::string Partition::to_string() const {
  std::string out;
  for (std::size_t alpha = 0; alpha < sets_.size(); ++alpha) {
    if (alpha) out += ';';
    out += "J" + std::to_string(alpha) + "={";
    for (std::size_t e = 0; e < sets_[alpha].size(); ++e) {
      if (e) out += ',';
      out += std::to_string(sets_[alpha][e] + 1);
    }
    out += '}';
  }
  return out;
}

std::string to_string(DualKind kind) {
  switch (kind) {
    case DualKind::Wolfe: return "wolfe";
    case DualKind::MondWeir: return "mond_weir";
    case DualKind::Mixed: return "mixed";
  }
  return "unknown";
}

DualKind classify(const Partition& part) {
  const int m = part.m();
  if (static_cast<int>(part.set(0).size()) == m) return DualKind::Wolfe;
  if (part.set(0).empty())
    for (int alpha = 1; alpha <= part.r(); ++alpha)
      if (static_cast<int>(part.set(alpha).size()) == m) return DualKind::MondWeir;
  return DualKind::Mixed;
}

void check_dual_point(const ProblemSpec& spec, const DualPoint& dp) {
  const TimeGrid& grid = dp.u.grid();
  if (dp.u.x.dim() != spec.n) throw LengthMismatch("dual point: u has wrong dimension");
  if (dp.y.dim() != spec.m) throw LengthMismatch("dual point: y needs m components");
  if (static_cast<int>(dp.z.size()) != spec.p) throw LengthMismatch("dual point: need p z trajectories");
  if (dp.lambda.size() != spec.p) throw LengthMismatch("dual point: need p lambda components");
  if (!(dp.y.grid() == grid)) throw GridMismatch("dual point: y is on a different grid");
  for (const auto& z : dp.z) {
    if (z.dim() != spec.n) throw LengthMismatch("dual point: z has wrong dimension");
    if (!(z.grid() == grid)) throw GridMismatch("dual point: z is on a different grid");
  }
}

namespace {

// uᵀBⁱzⁱ at every node.
Eigen::VectorXd bilinear_term(const ProblemSpec& spec, const DualPoint& dp, int i) {
  const Eigen::MatrixXd& U = dp.u.x.values();
  const Eigen::MatrixXd BZ = dp.z[i].values() * spec.B[i];  // B symmetric
  return (U.array() * BZ.array()).rowwise().sum();
}

}  // namespace

Eigen::VectorXd dual_objective(const ProblemSpec& spec, const Partition& part, const DualPoint& dp) {
  check_dual_point(spec, dp);
  const TimeGrid& grid = dp.u.grid();
  Eigen::VectorXd j0_term = Eigen::VectorXd::Zero(grid.size());
  for (int j : part.set(0)) j0_term += dp.y.values().col(j).cwiseProduct(sample_values(spec.g[j], dp.u));
  Eigen::VectorXd out(spec.p);
  for (int i = 0; i < spec.p; ++i) {
    const Eigen::VectorXd integrand = sample_values(spec.f[i], dp.u) + bilinear_term(spec, dp, i) + j0_term;
    out[i] = integrate(integrand, grid);
  }
  return out;
}

Eigen::VectorXd partition_sums(const ProblemSpec& spec, const Partition& part, const DualPoint& dp) {
  check_dual_point(spec, dp);
  Eigen::VectorXd out(part.r() + 1);
  for (int alpha = 0; alpha <= part.r(); ++alpha) {
    Eigen::VectorXd integrand = Eigen::VectorXd::Zero(dp.u.x.size());
    for (int j : part.set(alpha)) integrand += dp.y.values().col(j).cwiseProduct(sample_values(spec.g[j], dp.u));
    out[alpha] = integrate(integrand, dp.u.grid());
  }
  return out;
}

Eigen::MatrixXd stationarity_field(const ProblemSpec& spec, const DualPoint& dp) {
  check_dual_point(spec, dp);
  const TimeGrid& grid = dp.u.grid();
  const int N = grid.size();
  const int n = spec.n;
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(N, n);
  Eigen::MatrixXd Xd = Eigen::MatrixXd::Zero(N, n);
  Eigen::MatrixXd Xdd = Eigen::MatrixXd::Zero(N, n);
  for (int i = 0; i < spec.p; ++i) {
    const IntegrandSamples s = sample_integrand(spec.f[i], dp.u);
    const double l = dp.lambda[i];
    X += l * (s.dx + dp.z[i].values() * spec.B[i]);
    Xd += l * s.dxd;
    Xdd += l * s.dxdd;
  }
  for (int j = 0; j < spec.m; ++j) {
    const IntegrandSamples s = sample_integrand(spec.g[j], dp.u);
    const Eigen::VectorXd y = dp.y.values().col(j);
    X += (s.dx.array().colwise() * y.array()).matrix();
    Xd += (s.dxd.array().colwise() * y.array()).matrix();
    Xdd += (s.dxdd.array().colwise() * y.array()).matrix();
  }
  return X - apply_derivative(grid, Xd) + apply_second_derivative(grid, Xdd);
}

int stationarity_margin(const ProblemSpec& spec) {
  if (spec.references(VarKind::Accel)) return 4;
  if (spec.references(VarKind::Rate) || spec.boundary == BoundaryKind::FixedZero) return 3;
  return 0;
}

double stationarity_residual(const ProblemSpec& spec, const DualPoint& dp) {
  const Eigen::MatrixXd field = stationarity_field(spec, dp);
  const int margin = stationarity_margin(spec);
  double worst = 0.0;
  for (int k = margin; k < field.rows() - margin; ++k) worst = std::max(worst, field.row(k).norm());
  return worst;
}

namespace {

struct EndpointValues {
  Eigen::VectorXd rate_a, rate_b, accel_a, accel_b;
};

// fⁱ_ẋ + Σ_{J0} yʲgʲ_ẋ and the ẍ analogue at both endpoints.
EndpointValues endpoint_values(const ProblemSpec& spec, const Partition& part, const DualPoint& dp, int i) {
  const int N = dp.u.x.size();
  const IntegrandSamples f = sample_integrand(spec.f[i], dp.u);
  Eigen::MatrixXd rate = f.dxd;
  Eigen::MatrixXd accel = f.dxdd;
  for (int j : part.set(0)) {
    const IntegrandSamples g = sample_integrand(spec.g[j], dp.u);
    const Eigen::VectorXd y = dp.y.values().col(j);
    rate += (g.dxd.array().colwise() * y.array()).matrix();
    accel += (g.dxdd.array().colwise() * y.array()).matrix();
  }
  return {rate.row(0).transpose(), rate.row(N - 1).transpose(), accel.row(0).transpose(),
          accel.row(N - 1).transpose()};
}

void add_transversality(Report& report, const ProblemSpec& spec, const Partition& part, const DualPoint& dp,
                        double tol) {
  for (int i = 0; i < spec.p; ++i) {
    const EndpointValues e = endpoint_values(spec, part, dp, i);
    const std::string s = "." + std::to_string(i + 1);
    report.add_upper("rate_term(a)" + s, e.rate_a.norm(), tol);
    report.add_upper("rate_term(b)" + s, e.rate_b.norm(), tol);
    report.add_upper("accel_term(a)" + s, e.accel_a.norm(), tol);
    report.add_upper("accel_term(b)" + s, e.accel_b.norm(), tol);
  }
}

double max_z_excess(const ProblemSpec& spec, const DualPoint& dp) {
  double worst = -1.0;
  for (int i = 0; i < spec.p; ++i) {
    const Eigen::MatrixXd& Z = dp.z[i].values();
    const Eigen::MatrixXd BZ = Z * spec.B[i];
    worst = std::max(worst, (Z.array() * BZ.array()).rowwise().sum().maxCoeff() - 1.0);
  }
  return worst;
}

}  // namespace

Report dual_feasibility(const ProblemSpec& spec, const Partition& part, const DualPoint& dp, double tol) {
  check_dual_point(spec, dp);
  if (part.m() != spec.m) throw InvalidPartition("partition is for a different number of constraints");
  Report report("dual_feasibility");
  const int N = dp.u.x.size();
  if (spec.boundary == BoundaryKind::FixedZero) {
    report.add_upper("u(a)", dp.u.x.values().row(0).norm(), tol);
    report.add_upper("u(b)", dp.u.x.values().row(N - 1).norm(), tol);
    report.add_upper("ud(a)", dp.u.xd.values().row(0).norm(), tol);
    report.add_upper("ud(b)", dp.u.xd.values().row(N - 1).norm(), tol);
  }
  report.add_upper("stationarity", stationarity_residual(spec, dp), tol,
                   "margin=" + std::to_string(stationarity_margin(spec)));
  const Eigen::VectorXd sums = partition_sums(spec, part, dp);
  for (int alpha = 1; alpha <= part.r(); ++alpha)
    report.add_lower("partition_sum." + std::to_string(alpha), sums[alpha], -tol);
  report.add_upper("z_norm_excess", max_z_excess(spec, dp), tol);
  report.add_lower("y_min", dp.y.values().size() ? dp.y.values().minCoeff() : 0.0, -tol);
  Check& lmin = report.add_lower("lambda_min", dp.lambda.minCoeff(), 0.0);
  lmin.passed = lmin.value > 0.0;
  report.add_upper("lambda_sum_error", std::abs(dp.lambda.sum() - 1.0), tol);
  if (spec.boundary == BoundaryKind::Natural) add_transversality(report, spec, part, dp, tol);
  return report;
}

Report weak_duality_check(const ProblemSpec& spec, const Partition& part, const PrimalPoint& x, const DualPoint& dp,
                          double tol, double feas_tol) {
  const Report pf = primal_feasibility(spec, x, feas_tol);
  if (!pf.passed()) throw InfeasibleInput("weak duality: primal point infeasible\n" + pf.summary());
  const Report df = dual_feasibility(spec, part, dp, feas_tol);
  if (!df.passed()) throw InfeasibleInput("weak duality: dual point infeasible\n" + df.summary());
  const Eigen::VectorXd delta = primal_objective(spec, x) - dual_objective(spec, part, dp);
  Report report("weak_duality");
  std::string deltas;
  for (int i = 0; i < spec.p; ++i) {
    Check& c = report.add_lower("delta." + std::to_string(i + 1), delta[i], -tol);
    c.gating = false;
    deltas += (i ? " " : "") + format_double(delta[i]);
  }
  const bool dominated = delta.maxCoeff() <= tol && delta.minCoeff() < -tol;
  report.add_upper("dominance", dominated ? 1.0 : 0.0, 0.0, "delta=" + deltas);
  return report;
}

Report transversality_residual(const ProblemSpec& spec, const Partition& part, const DualPoint& dp, double tol) {
  if (spec.boundary != BoundaryKind::Natural)
    throw WrongBoundaryKind("transversality applies to natural boundary problems");
  check_dual_point(spec, dp);
  Report report("transversality");
  add_transversality(report, spec, part, dp, tol);
  return report;
}

// Direct evaluation of the two classical duals, node by node, without the
// partition machinery.
namespace {

struct NodeData {
  std::vector<Partials> f, g;
};

std::vector<NodeData> node_partials(const ProblemSpec& spec, const DualPoint& dp) {
  const int N = dp.u.x.size();
  const int n = spec.n;
  std::vector<NodeData> out(N);
  std::vector<double> x(n), xd(n), xdd(n);
  for (int k = 0; k < N; ++k) {
    for (int c = 0; c < n; ++c) {
      x[c] = dp.u.x.values()(k, c);
      xd[c] = dp.u.xd.values()(k, c);
      xdd[c] = dp.u.xdd.values()(k, c);
    }
    const EvalPoint pt{dp.u.grid().node(k), x, xd, xdd};
    for (const auto& e : spec.f) out[k].f.push_back(e.partials(pt));
    for (const auto& e : spec.g) out[k].g.push_back(e.partials(pt));
  }
  return out;
}

double trapezoid(const std::vector<double>& values, const TimeGrid& grid) {
  const double h = grid.spacing();
  double s = 0.5 * (values.front() + values.back());
  for (std::size_t k = 1; k + 1 < values.size(); ++k) s += values[k];
  return h * s;
}

DualValues direct_values(const ProblemSpec& spec, const DualPoint& dp, bool wolfe) {
  check_dual_point(spec, dp);
  const TimeGrid& grid = dp.u.grid();
  const int N = grid.size();
  const int n = spec.n;
  const auto data = node_partials(spec, dp);
  const Eigen::MatrixXd& Y = dp.y.values();
  const Eigen::MatrixXd& U = dp.u.x.values();

  DualValues out;
  out.objective.resize(spec.p);
  std::vector<double> yg(N);
  for (int k = 0; k < N; ++k) {
    double s = 0.0;
    for (int j = 0; j < spec.m; ++j) s += Y(k, j) * data[k].g[j].value;
    yg[k] = s;
  }
  for (int i = 0; i < spec.p; ++i) {
    std::vector<double> integrand(N);
    for (int k = 0; k < N; ++k) {
      const Eigen::VectorXd z = dp.z[i].values().row(k).transpose();
      integrand[k] = data[k].f[i].value + U.row(k).dot(spec.B[i] * z) + (wolfe ? yg[k] : 0.0);
    }
    out.objective[i] = trapezoid(integrand, grid);
  }

  if (spec.boundary == BoundaryKind::FixedZero) {
    out.constraints.emplace_back("u(a)", U.row(0).norm());
    out.constraints.emplace_back("u(b)", U.row(N - 1).norm());
    out.constraints.emplace_back("ud(a)", dp.u.xd.values().row(0).norm());
    out.constraints.emplace_back("ud(b)", dp.u.xd.values().row(N - 1).norm());
  }

  // λᵀf_u + yᵀg_u style assemblies, one column per state component.
  Eigen::MatrixXd lead(N, n), rate(N, n), accel(N, n);
  for (int k = 0; k < N; ++k)
    for (int c = 0; c < n; ++c) {
      double a = 0.0, b = 0.0, d = 0.0;
      for (int i = 0; i < spec.p; ++i) {
        const Eigen::VectorXd Bz = spec.B[i] * dp.z[i].values().row(k).transpose();
        a += dp.lambda[i] * (data[k].f[i].dx[c] + Bz[c]);
        b += dp.lambda[i] * data[k].f[i].dxd[c];
        d += dp.lambda[i] * data[k].f[i].dxdd[c];
      }
      for (int j = 0; j < spec.m; ++j) {
        a += Y(k, j) * data[k].g[j].dx[c];
        b += Y(k, j) * data[k].g[j].dxd[c];
        d += Y(k, j) * data[k].g[j].dxdd[c];
      }
      lead(k, c) = a;
      rate(k, c) = b;
      accel(k, c) = d;
    }
  const Eigen::MatrixXd field = lead - apply_derivative(grid, rate) + apply_derivative(grid, apply_derivative(grid, accel));
  const int margin = stationarity_margin(spec);
  double worst = 0.0;
  for (int k = margin; k < N - margin; ++k) worst = std::max(worst, field.row(k).norm());
  out.constraints.emplace_back("stationarity", worst);

  if (!wolfe) out.constraints.emplace_back("partition_sum.1", trapezoid(yg, grid));

  double z_excess = -1.0;
  for (int i = 0; i < spec.p; ++i)
    for (int k = 0; k < N; ++k) {
      const Eigen::VectorXd z = dp.z[i].values().row(k).transpose();
      z_excess = std::max(z_excess, z.dot(spec.B[i] * z) - 1.0);
    }
  out.constraints.emplace_back("z_norm_excess", z_excess);
  out.constraints.emplace_back("y_min", Y.size() ? Y.minCoeff() : 0.0);
  out.constraints.emplace_back("lambda_min", dp.lambda.minCoeff());
  // The Mond-Weir dual only asks λ > 0; its constraints are homogeneous in
  // (λ, y), so the normalization is not part of its constraint set.
  if (wolfe) out.constraints.emplace_back("lambda_sum_error", std::abs(dp.lambda.sum() - 1.0));
  return out;
}

}  // namespace

DualValues wolfe_dual_values(const ProblemSpec& spec, const DualPoint& dp) { return direct_values(spec, dp, true); }

DualValues mond_weir_dual_values(const ProblemSpec& spec, const DualPoint& dp) {
  return direct_values(spec, dp, false);
}

StaticPair::StaticPair(const ProblemSpec& spec) : spec_(spec) {
  if (!spec.is_static()) throw NotStatic("problem '" + spec.name + "' depends on t, xd or xdd");
}

Eigen::VectorXd StaticPair::gradient(const Expr& e, const Eigen::VectorXd& x) const {
  const int n = spec_.n;
  const std::vector<double> zero(n, 0.0);
  const Partials p = e.partials({0.0, std::span<const double>(x.data(), n), zero, zero});
  return p.dx;
}

Eigen::VectorXd StaticPair::primal(const Eigen::VectorXd& x) const {
  const ProblemSpec& spec = spec_;
  if (x.size() != spec.n) throw LengthMismatch("static primal: wrong dimension");
  const std::vector<double> zero(spec.n, 0.0);
  const EvalPoint pt{0.0, std::span<const double>(x.data(), spec.n), zero, zero};
  Eigen::VectorXd out(spec.p);
  for (int i = 0; i < spec.p; ++i) out[i] = spec.f[i].evaluate(pt) + sqrt_term(x, spec.B[i]);
  return out;
}

Eigen::VectorXd StaticPair::constraints(const Eigen::VectorXd& x) const {
  const ProblemSpec& spec = spec_;
  if (x.size() != spec.n) throw LengthMismatch("static constraints: wrong dimension");
  const std::vector<double> zero(spec.n, 0.0);
  const EvalPoint pt{0.0, std::span<const double>(x.data(), spec.n), zero, zero};
  Eigen::VectorXd out(spec.m);
  for (int j = 0; j < spec.m; ++j) out[j] = spec.g[j].evaluate(pt);
  return out;
}

bool StaticPair::primal_feasible(const Eigen::VectorXd& x, double tol) const {
  return constraints(x).maxCoeff() <= tol;
}

Eigen::VectorXd StaticPair::dual_objective(const Partition& part, const StaticDualPoint& dp) const {
  const ProblemSpec& spec = spec_;
  const Eigen::VectorXd g = constraints(dp.u);
  double j0 = 0.0;
  for (int j : part.set(0)) j0 += dp.y[j] * g[j];
  const std::vector<double> zero(spec.n, 0.0);
  const EvalPoint pt{0.0, std::span<const double>(dp.u.data(), spec.n), zero, zero};
  Eigen::VectorXd out(spec.p);
  for (int i = 0; i < spec.p; ++i) out[i] = spec.f[i].evaluate(pt) + dp.u.dot(spec.B[i] * dp.z[i]) + j0;
  return out;
}

Eigen::VectorXd StaticPair::stationarity(const StaticDualPoint& dp) const {
  const ProblemSpec& spec = spec_;
  Eigen::VectorXd r = Eigen::VectorXd::Zero(spec.n);
  for (int i = 0; i < spec.p; ++i) r += dp.lambda[i] * (gradient(spec.f[i], dp.u) + spec.B[i] * dp.z[i]);
  for (int j = 0; j < spec.m; ++j) r += dp.y[j] * gradient(spec.g[j], dp.u);
  return r;
}

Report StaticPair::dual_feasibility(const Partition& part, const StaticDualPoint& dp, double tol) const {
  const ProblemSpec& spec = spec_;
  if (dp.u.size() != spec.n || dp.y.size() != spec.m || static_cast<int>(dp.z.size()) != spec.p ||
      dp.lambda.size() != spec.p)
    throw LengthMismatch("static dual point does not match the problem");
  Report report("static_dual_feasibility");
  report.add_upper("stationarity", stationarity(dp).norm(), tol);
  const Eigen::VectorXd g = constraints(dp.u);
  for (int alpha = 1; alpha <= part.r(); ++alpha) {
    double s = 0.0;
    for (int j : part.set(alpha)) s += dp.y[j] * g[j];
    report.add_lower("partition_sum." + std::to_string(alpha), s, -tol);
  }
  double z_excess = -1.0;
  for (int i = 0; i < spec.p; ++i) z_excess = std::max(z_excess, dp.z[i].dot(spec.B[i] * dp.z[i]) - 1.0);
  report.add_upper("z_norm_excess", z_excess, tol);
  report.add_lower("y_min", dp.y.minCoeff(), -tol);
  Check& lmin = report.add_lower("lambda_min", dp.lambda.minCoeff(), 0.0);
  lmin.passed = lmin.value > 0.0;
  report.add_upper("lambda_sum_error", std::abs(dp.lambda.sum() - 1.0), tol);
  return report;
}

}  // namespace mixdual
