#include <doctest.h>

#include <random>

#include "mixdual/errors.hpp"
#include "mixdual/invexity.hpp"
#include "support.hpp"

using namespace mixdual;
using testing::scalar;
using testing::vec;

namespace {

FunctionalSpec functional(const char* text, int dim, const GridPtr& g, BoundaryKind b = BoundaryKind::Natural) {
  return FunctionalSpec::from_expr(text, Expr::parse(text, dim), g, b);
}

CertifyOptions opts(int pairs, std::uint64_t seed, double amplitude = 1.0) {
  CertifyOptions o;
  o.pairs = pairs;
  o.seed = seed;
  o.amplitude = amplitude;
  return o;
}

}  // namespace

TEST_SUITE("invexity") {
  TEST_CASE("directional value examples") {
    auto g = make_grid(0.0, 1.0, 201);
    const FunctionalSpec F = functional("0.5*x0^2", 1, g);
    const Trajectory u = scalar(g, [](double t) { return t; });
    const Trajectory x = scalar(g, [](double t) { return t * t; });
    const EtaKernel eta = difference_kernel();
    CHECK(directional_value(F, u, u, eta(u, u)) == 0.0);
    // ∫ t (t² - t) dt = 1/4 - 1/3.
    CHECK(std::abs(directional_value(F, x, u, eta(x, u)) + 1.0 / 12.0) <= 1e-5);
    const FunctionalSpec T = functional("t^2 + 3", 1, g);
    CHECK(directional_value(T, x, u, eta(x, u)) == 0.0);
    CHECK_THROWS_AS(directional_value(F, x, scalar(make_grid(0.0, 1.0, 11), [](double t) { return t; }), x),
                    GridMismatch);
  }

  TEST_CASE("difference kernel invariants") {
    auto g = make_grid(0.0, 1.0, 51);
    std::mt19937_64 rng(2);
    const Trajectory u = sample_trajectory(g, 2, BoundaryKind::Natural, rng);
    const EtaKernel eta = difference_kernel();
    CHECK(eta(u, u).values().isZero(0.0));
    const Trajectory shifted(g, u.values().rowwise() + Eigen::RowVector2d(0.3, -1.2));
    CHECK(derivative(eta(shifted, u)).values().cwiseAbs().maxCoeff() <= 1e-12);
  }

  TEST_CASE("sampled trajectories respect the boundary conditions") {
    auto g = make_grid(0.0, 2.0, 41);
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 20; ++trial) {
      const PrimalPoint x(sample_trajectory(g, 2, BoundaryKind::FixedZero, rng, 3.0));
      CHECK(x.x.values().row(0).isZero(0.0));
      CHECK(x.x.values().row(40).isZero(0.0));
      CHECK(x.xd.values().row(0).isZero(0.0));
      CHECK(x.xd.values().row(40).isZero(0.0));
      CHECK(x.x.values().cwiseAbs().maxCoeff() <= 3.0 * 3.0 + 1e-12);
    }
    std::mt19937_64 a(99), b(99);
    CHECK(sample_trajectory(g, 1, BoundaryKind::Natural, a).values() ==
          sample_trajectory(g, 1, BoundaryKind::Natural, b).values());
  }

  TEST_CASE("directional value is linear in eta") {
    auto g = make_grid(0.0, 1.0, 61);
    std::mt19937_64 rng(12);
    const FunctionalSpec F = functional("sin(x0)*xd1 + xdd0^2 + exp(x1)", 2, g);
    for (int trial = 0; trial < 20; ++trial) {
      const Trajectory u = sample_trajectory(g, 2, BoundaryKind::Natural, rng);
      const Trajectory e1 = sample_trajectory(g, 2, BoundaryKind::Natural, rng);
      const Trajectory e2 = sample_trajectory(g, 2, BoundaryKind::Natural, rng);
      const double a = 0.7, b = -1.9;
      const Trajectory mix(g, a * e1.values() + b * e2.values());
      const double lhs = directional_value(F, u, u, mix);
      const double rhs = a * directional_value(F, u, u, e1) + b * directional_value(F, u, u, e2);
      CHECK(std::abs(lhs - rhs) <= 1e-10 * (1 + std::abs(lhs)));
    }
  }

  TEST_CASE("directional value is linear in the multipliers") {
    const ProblemSpec spec = catalog_problem("P1");
    auto g = make_grid(0.0, 1.0, 61);
    const Partition part(2, {{0}, {1}});
    std::mt19937_64 rng(13);
    const EtaKernel eta = difference_kernel();
    for (int trial = 0; trial < 10; ++trial) {
      DualPoint p = testing::random_dual_point(spec, g, rng);
      DualPoint q = p;
      q.lambda = vec({0.2, 0.9});
      const Trajectory x = sample_trajectory(g, 2, spec.boundary, rng);
      const Trajectory& u = p.u.x;
      const Trajectory e = eta(x, u);
      const double a = 0.4, b = 1.3;
      // λ with y fixed.
      DualPoint mix = p;
      mix.lambda = a * p.lambda + b * q.lambda;
      const double dl = directional_value(FunctionalSpec::combined(spec, part, mix), x, u, e);
      const double sl = a * directional_value(FunctionalSpec::combined(spec, part, p), x, u, e) +
                        b * directional_value(FunctionalSpec::combined(spec, part, q), x, u, e);
      CHECK(std::abs(dl - sl) <= 1e-10 * (1 + std::abs(dl)));
      // y with λ fixed.
      DualPoint r = p;
      r.y.values() = r.y.values().array().square().matrix();
      DualPoint ymix = p;
      ymix.y.values() = a * p.y.values() + b * r.y.values();
      for (int alpha = 0; alpha <= 1; ++alpha) {
        const double dy = directional_value(FunctionalSpec::partition(spec, part, alpha, ymix), x, u, e);
        const double sy = a * directional_value(FunctionalSpec::partition(spec, part, alpha, p), x, u, e) +
                          b * directional_value(FunctionalSpec::partition(spec, part, alpha, r), x, u, e);
        CHECK(std::abs(dy - sy) <= 1e-10 * (1 + std::abs(dy)));
      }
      const double dc = directional_value(FunctionalSpec::combined(spec, part, ymix), x, u, e);
      const double sc = a * directional_value(FunctionalSpec::combined(spec, part, p), x, u, e) +
                        b * directional_value(FunctionalSpec::combined(spec, part, r), x, u, e) -
                        (a + b - 1.0) * directional_value(FunctionalSpec::combined(spec, Partition::mond_weir(2), p), x, u, e);
      CHECK(std::abs(dc - sc) <= 1e-10 * (1 + std::abs(dc)));
    }
  }

  TEST_CASE("convex integrands are invex with the difference kernel") {
    auto g = make_grid(0.0, 1.0, 101);
    for (const char* text : {"0.5*x0^2 + xd0^2 + 2*xdd0^2 - 3*x0", "exp(x0) + (x0 - xd0)^2"}) {
      const FunctionalSpec F = functional(text, 1, g);
      const Certificate c = certify_invex(F, difference_kernel(), opts(200, 3, 2.0));
      CHECK(c.passed);
      CHECK(c.worst_violation <= 1e-7);
      CHECK_FALSE(c.witness_seed.has_value());
      // invex implies pseudoinvex on the same samples
      CHECK(certify_pseudoinvex(F, difference_kernel(), opts(200, 3, 2.0)).passed);
    }
  }

  TEST_CASE("zero, linear and constant functionals") {
    auto g = make_grid(0.0, 1.0, 41);
    const Certificate zero = certify_invex(functional("0", 1, g), difference_kernel(), opts(50, 1));
    CHECK(zero.passed);
    CHECK(zero.worst_violation == 0.0);
    CHECK(certify_quasiinvex(functional("3*x0 - 2*xd0 + t", 1, g), difference_kernel(), opts(200, 4)).passed);
    CHECK(certify_quasiinvex(functional("7", 1, g), difference_kernel(), opts(50, 5)).passed);
  }

  TEST_CASE("large-amplitude sine fails with a confirmed witness") {
    auto g = make_grid(0.0, 1.0, 101);
    const FunctionalSpec F = functional("sin(x0)", 1, g);
    const CertifyOptions o = opts(200, 7, 5.0);
    const Certificate c = certify_invex(F, difference_kernel(), o);
    CHECK_FALSE(c.passed);
    REQUIRE(c.witness_seed.has_value());
    CHECK(c.witness_confirmed);
    // Regenerating the witness pair reproduces the reported violation.
    const auto [x, u] = sample_pair(F, *c.witness_seed, o);
    const double v = pair_violation(InvexKind::Invex, F.value(PrimalPoint(x)), F.value(PrimalPoint(u)),
                                    directional_value(F, x, u, difference_kernel()(x, u)));
    CHECK(v == c.worst_violation);
  }

  TEST_CASE("violation rules") {
    CHECK(pair_violation(InvexKind::Invex, 1.0, 0.0, 0.5) == 0.0);
    CHECK(pair_violation(InvexKind::Invex, 1.0, 0.0, 1.5) == 0.5);
    CHECK(pair_violation(InvexKind::Pseudoinvex, 0.0, 1.0, 0.0) == 1.0);
    CHECK(pair_violation(InvexKind::Pseudoinvex, 0.0, 1.0, -1e-3) == 0.0);
    CHECK(pair_violation(InvexKind::Quasiinvex, 0.0, 1.0, 0.2) == 0.2);
    CHECK(pair_violation(InvexKind::Quasiinvex, 2.0, 1.0, 0.2) == 0.0);
  }

  TEST_CASE("finite difference direction agrees with the quadrature form") {
    auto g = make_grid(0.0, 1.0, 81);
    std::mt19937_64 rng(31);
    const FunctionalSpec F = functional("sin(x0)*xd0^2 + xdd0^2 + x0^4", 1, g);
    const Trajectory u = sample_trajectory(g, 1, BoundaryKind::Natural, rng);
    const Trajectory e = sample_trajectory(g, 1, BoundaryKind::Natural, rng);
    const double exact = directional_value(F, u, u, e);
    CHECK(std::abs(finite_difference_direction(F, u, e) - exact) <= 1e-6 * (1 + std::abs(exact)));
  }

  TEST_CASE("P1 hypotheses hold at the recovered point") {
    const auto& s = testing::solved("P1");
    const DualPoint& dp = s.recovery.dual_point;
    CertifyOptions o = opts(500, 1);
    o.anchor = dp.u.x;
    CHECK(certify_pseudoinvex(FunctionalSpec::combined(s.spec, s.part, dp), difference_kernel(), o).passed);
    for (int alpha = 1; alpha <= s.part.r(); ++alpha)
      CHECK(certify_quasiinvex(FunctionalSpec::partition(s.spec, s.part, alpha, dp), difference_kernel(), o).passed);
  }

  TEST_CASE("P3 combined functional is not pseudoinvex") {
    const auto& s = testing::solved("P3");
    const DualPoint& dp = s.recovery.dual_point;
    CertifyOptions o = opts(500, 1);
    o.anchor = dp.u.x;
    const Certificate c = certify_pseudoinvex(FunctionalSpec::combined(s.spec, s.part, dp), difference_kernel(), o);
    CHECK_FALSE(c.passed);
    CHECK(c.witness_seed.has_value());
    CHECK(c.witness_confirmed);
    CHECK(c.csv_row().find(std::to_string(*c.witness_seed)) != std::string::npos);
  }

  TEST_CASE("certificate csv") {
    auto g = make_grid(0.0, 1.0, 21);
    const Certificate c = certify_invex(functional("x0^2", 1, g), difference_kernel(), opts(10, 1));
    CHECK(Certificate::csv_header() == "functional,kind,pairs,worst_violation,witness_seed,passed,witness_confirmed\n");
    CHECK(c.csv_row().rfind("x0^2,invex,10,", 0) == 0);
    CHECK_THROWS_AS(certify_invex(functional("x0", 1, g), difference_kernel(), opts(0, 1)), DomainError);
  }
}
