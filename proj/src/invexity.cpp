#include "mixdual/invexity.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "mixdual/errors.hpp"

namespace mixdual {

FunctionalSpec::FunctionalSpec(std::string id, GridPtr grid, int dim, BoundaryKind boundary, Integrand integrand)
    : id_(std::move(id)), grid_(std::move(grid)), dim_(dim), boundary_(boundary), integrand_(std::move(integrand)) {
  if (!grid_) throw DomainError("functional: missing grid");
  if (dim_ < 1) throw DomainError("functional: dimension must be positive");
}

FunctionalSpec FunctionalSpec::from_expr(std::string id, const Expr& e, GridPtr grid, BoundaryKind boundary) {
  return FunctionalSpec(std::move(id), std::move(grid), e.dim(), boundary,
                        [e](const PrimalPoint& x) { return sample_integrand(e, x); });
}

FunctionalSpec FunctionalSpec::combined(const ProblemSpec& spec, const Partition& part, const DualPoint& dp) {
  check_dual_point(spec, dp);
  const std::vector<int> j0 = part.set(0);
  auto integrand = [spec, j0, lambda = dp.lambda, y = dp.y.values(), z = dp.z](const PrimalPoint& x) {
    const int N = x.x.size();
    const int n = spec.n;
    IntegrandSamples out{Eigen::VectorXd::Zero(N), Eigen::MatrixXd::Zero(N, n), Eigen::MatrixXd::Zero(N, n),
                         Eigen::MatrixXd::Zero(N, n)};
    for (int i = 0; i < spec.p; ++i) {
      const IntegrandSamples f = sample_integrand(spec.f[i], x);
      const Eigen::MatrixXd BZ = z[i].values() * spec.B[i];
      const double l = lambda[i];
      out.value += l * (f.value + (x.x.values().array() * BZ.array()).rowwise().sum().matrix());
      out.dx += l * (f.dx + BZ);
      out.dxd += l * f.dxd;
      out.dxdd += l * f.dxdd;
    }
    const double lsum = lambda.sum();
    for (int j : j0) {
      const IntegrandSamples g = sample_integrand(spec.g[j], x);
      const Eigen::ArrayXd yj = lsum * y.col(j).array();
      out.value += (yj * g.value.array()).matrix();
      out.dx += (g.dx.array().colwise() * yj).matrix();
      out.dxd += (g.dxd.array().colwise() * yj).matrix();
      out.dxdd += (g.dxdd.array().colwise() * yj).matrix();
    }
    return out;
  };
  return FunctionalSpec("combined", dp.u.x.grid_ptr(), spec.n, spec.boundary, integrand);
}

FunctionalSpec FunctionalSpec::partition(const ProblemSpec& spec, const Partition& part, int alpha,
                                         const DualPoint& dp) {
  check_dual_point(spec, dp);
  if (alpha < 0 || alpha > part.r()) throw DomainError("functional: partition index out of range");
  const std::vector<int> set = part.set(alpha);
  auto integrand = [spec, set, y = dp.y.values()](const PrimalPoint& x) {
    const int N = x.x.size();
    const int n = spec.n;
    IntegrandSamples out{Eigen::VectorXd::Zero(N), Eigen::MatrixXd::Zero(N, n), Eigen::MatrixXd::Zero(N, n),
                         Eigen::MatrixXd::Zero(N, n)};
    for (int j : set) {
      const IntegrandSamples g = sample_integrand(spec.g[j], x);
      const Eigen::ArrayXd yj = y.col(j).array();
      out.value += (yj * g.value.array()).matrix();
      out.dx += (g.dx.array().colwise() * yj).matrix();
      out.dxd += (g.dxd.array().colwise() * yj).matrix();
      out.dxdd += (g.dxdd.array().colwise() * yj).matrix();
    }
    return out;
  };
  return FunctionalSpec("partition." + std::to_string(alpha), dp.u.x.grid_ptr(), spec.n, spec.boundary, integrand);
}

IntegrandSamples FunctionalSpec::samples(const PrimalPoint& x) const {
  if (!(x.grid() == *grid_) || x.x.dim() != dim_) throw GridMismatch("functional '" + id_ + "': point does not fit");
  return integrand_(x);
}

double FunctionalSpec::value(const PrimalPoint& x) const { return integrate(samples(x).value, *grid_); }

EtaKernel difference_kernel() {
  return [](const Trajectory& x, const Trajectory& u) {
    require_same_grid(x, u);
    return Trajectory(x.grid_ptr(), x.values() - u.values());
  };
}

double directional_value(const FunctionalSpec& F, const Trajectory& x, const Trajectory& u, const Trajectory& eta) {
  require_same_grid(x, u);
  require_same_grid(u, eta);
  const IntegrandSamples s = F.samples(PrimalPoint(u));
  const TimeGrid& grid = u.grid();
  const Eigen::MatrixXd D1 = apply_derivative(grid, eta.values());
  const Eigen::MatrixXd D2 = apply_derivative(grid, D1);
  const Eigen::VectorXd integrand = (eta.values().array() * s.dx.array()).rowwise().sum() +
                                    (D1.array() * s.dxd.array()).rowwise().sum() +
                                    (D2.array() * s.dxdd.array()).rowwise().sum();
  return integrate(integrand, grid);
}

namespace {

double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

Trajectory sample_trajectory(const GridPtr& grid, int dim, BoundaryKind boundary, std::mt19937_64& rng,
                             double amplitude) {
  const int N = grid->size();
  const double a = grid->a();
  const double len = grid->b() - a;
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(N, dim);
  const bool fixed = boundary == BoundaryKind::FixedZero;
  const int basis = fixed ? 3 : 7;
  for (int c = 0; c < dim; ++c) {
    for (int j = 0; j < basis; ++j) {
      const double coef = amplitude * (2.0 * unit_uniform(rng) - 1.0);
      // max of s^(2+j)(1-s)^2 on [0,1] is attained at s = (2+j)/(4+j)
      const double smax = (2.0 + j) / (4.0 + j);
      const double norm = fixed ? std::pow(smax, 2 + j) * (1 - smax) * (1 - smax) : 1.0;
      for (int k = 0; k < N; ++k) {
        const double s = (grid->node(k) - a) / len;
        const double b = fixed ? std::pow(s, 2 + j) * (1 - s) * (1 - s) : std::pow(s, j);
        X(k, c) += coef * b / norm;
      }
    }
  }
  if (fixed) {
    X.row(0).setZero();
    X.row(N - 1).setZero();
    X.row(1) = 0.25 * X.row(2);
    X.row(N - 2) = 0.25 * X.row(N - 3);
  }
  return Trajectory(grid, X);
}

std::string to_string(InvexKind kind) {
  switch (kind) {
    case InvexKind::Invex: return "invex";
    case InvexKind::Pseudoinvex: return "pseudoinvex";
    case InvexKind::Quasiinvex: return "quasiinvex";
  }
  return "unknown";
}

std::uint64_t pair_seed(std::uint64_t seed, int q) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(q)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

std::pair<Trajectory, Trajectory> sample_pair(const FunctionalSpec& F, std::uint64_t seed,
                                              const CertifyOptions& options) {
  std::mt19937_64 rng(seed);
  Trajectory x = sample_trajectory(F.grid(), F.dim(), F.boundary(), rng, options.amplitude);
  if (options.anchor) return {std::move(x), *options.anchor};
  Trajectory u = sample_trajectory(F.grid(), F.dim(), F.boundary(), rng, options.amplitude);
  return {std::move(x), std::move(u)};
}

double pair_violation(InvexKind kind, double fx, double fu, double direction) {
  switch (kind) {
    case InvexKind::Invex: return std::max(0.0, direction - (fx - fu));
    case InvexKind::Pseudoinvex: return direction >= -1e-9 && fx < fu - 1e-7 ? fu - fx : 0.0;
    case InvexKind::Quasiinvex: return fx <= fu + 1e-9 && direction > 1e-7 ? direction : 0.0;
  }
  return 0.0;
}

double finite_difference_direction(const FunctionalSpec& F, const Trajectory& u, const Trajectory& eta) {
  require_same_grid(u, eta);
  const double scale = std::max(1.0, eta.values().cwiseAbs().maxCoeff());
  const double eps = 1e-3 / scale;
  auto central = [&](double e) {
    const PrimalPoint plus(Trajectory(u.grid_ptr(), u.values() + e * eta.values()));
    const PrimalPoint minus(Trajectory(u.grid_ptr(), u.values() - e * eta.values()));
    return (F.value(plus) - F.value(minus)) / (2.0 * e);
  };
  return (4.0 * central(0.5 * eps) - central(eps)) / 3.0;
}

namespace {

Certificate certify(InvexKind kind, const FunctionalSpec& F, const EtaKernel& eta, const CertifyOptions& options) {
  if (options.pairs < 1) throw DomainError("certify: need at least one pair");
  Certificate cert;
  cert.functional_id = F.id();
  cert.kind = kind;
  cert.pairs = options.pairs;
  cert.report = Report(to_string(kind) + ":" + F.id());

  std::optional<double> anchor_value;
  if (options.anchor) anchor_value = F.value(PrimalPoint(*options.anchor));
  double worst = 0.0;
  std::uint64_t worst_seed = 0;
  for (int q = 0; q < options.pairs; ++q) {
    const std::uint64_t s = pair_seed(options.seed, q);
    const auto [x, u] = sample_pair(F, s, options);
    const Trajectory e = eta(x, u);
    const double fx = F.value(PrimalPoint(x));
    const double fu = anchor_value ? *anchor_value : F.value(PrimalPoint(u));
    const double v = pair_violation(kind, fx, fu, directional_value(F, x, u, e));
    if (v > worst) {
      worst = v;
      worst_seed = s;
    }
  }
  cert.worst_violation = worst;
  cert.passed = worst <= kInvexityTolerance;
  cert.report.add_upper("worst_violation", worst, kInvexityTolerance);
  Check& pairs = cert.report.add_lower("pairs", options.pairs, 1);
  pairs.gating = false;
  if (!cert.passed) {
    cert.witness_seed = worst_seed;
    // Independent re-evaluation: regenerate the pair and replace the
    // quadrature directional value by a difference quotient of F.
    const auto [x, u] = sample_pair(F, worst_seed, options);
    const Trajectory e = eta(x, u);
    const double v = pair_violation(kind, F.value(PrimalPoint(x)), F.value(PrimalPoint(u)),
                                    finite_difference_direction(F, u, e));
    cert.witness_confirmed = v > kInvexityTolerance;
    Check& w = cert.report.add_lower("witness_recheck", v, kInvexityTolerance,
                                     "witness_seed=" + std::to_string(worst_seed));
    w.gating = false;
  }
  return cert;
}

}  // namespace

Certificate certify_invex(const FunctionalSpec& F, const EtaKernel& eta, const CertifyOptions& options) {
  return certify(InvexKind::Invex, F, eta, options);
}

Certificate certify_pseudoinvex(const FunctionalSpec& F, const EtaKernel& eta, const CertifyOptions& options) {
  return certify(InvexKind::Pseudoinvex, F, eta, options);
}

Certificate certify_quasiinvex(const FunctionalSpec& F, const EtaKernel& eta, const CertifyOptions& options) {
  return certify(InvexKind::Quasiinvex, F, eta, options);
}

std::string Certificate::csv_header() {
  return "functional,kind,pairs,worst_violation,witness_seed,passed,witness_confirmed\n";
}

std::string Certificate::csv_row() const {
  return csv_field(functional_id) + "," + to_string(kind) + "," + std::to_string(pairs) + "," +
         format_double(worst_violation) + "," + (witness_seed ? std::to_string(*witness_seed) : std::string()) + "," +
         (passed ? "1" : "0") + "," + (witness_confirmed ? "1" : "0") + "\n";
}

}  // namespace mixdual
