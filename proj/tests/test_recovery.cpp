#include <doctest.h>

#include <random>

#include "mixdual/errors.hpp"
#include "mixdual/recovery.hpp"
#include "support.hpp"

using namespace mixdual;
using testing::vec;

namespace {

// S1 weighted-sum minimizer at w = (1/2, 1/2), from an SQP solve.
constexpr double kS1Mid[2] = {0.40715232, 1.01788083};

Eigen::MatrixXd random_psd(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> nd;
  std::uniform_int_distribution<int> rank_dist(0, n);
  const int r = rank_dist(rng);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, std::max(r, 1));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < r; ++j) A(i, j) = nd(rng);
  return A * A.transpose();
}

ProblemSpec single(const char* g) {
  std::string text = "name = One\nn = 1\np = 1\nm = 1\nboundary = fixed_zero\n";
  text += "f.1 = 0.5*xd0^2 + x0^2 - 3*x0\nB.1 = 1\ng.1 = ";
  return ProblemSpec::parse(text + g + "\n");
}

}  // namespace

TEST_SUITE("recovery") {
  TEST_CASE("recover_z examples") {
    const Eigen::VectorXd z = recover_z(vec({3, 4}), Eigen::MatrixXd::Identity(2, 2));
    CHECK(z[0] == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(z[1] == doctest::Approx(0.8).epsilon(1e-15));
    Eigen::MatrixXd B2 = vec({1, 0}).asDiagonal();
    CHECK(recover_z(vec({0, 5}), B2).isZero(0.0));
    Eigen::MatrixXd B(2, 2);
    B << 2, 1, 1, 2;
    const Eigen::VectorXd x = vec({1, 2});
    const Eigen::VectorXd w = recover_z(x, B);
    CHECK((w - x / std::sqrt(14.0)).norm() <= 1e-15);
    CHECK(std::abs(x.dot(B * w) - std::sqrt(14.0)) <= 1e-12);
    CHECK(std::abs(w.dot(B * w) - 1.0) <= 1e-12);
  }

  TEST_CASE("schwartz gap examples") {
    CHECK(schwartz_gap(vec({1, 0}), vec({-1, 0}), Eigen::MatrixXd::Identity(2, 2)) == doctest::Approx(2.0));
    Eigen::MatrixXd B(2, 2);
    B << 2, 1, 1, 2;
    CHECK(std::abs(schwartz_gap(vec({1, 2}), recover_z(vec({1, 2}), B), B)) <= 1e-10);
  }

  TEST_CASE("recover_z identities on random PSD matrices") {
    std::mt19937_64 rng(1234);
    std::normal_distribution<double> nd;
    std::uniform_int_distribution<int> dim(1, 6);
    for (int trial = 0; trial < 1000; ++trial) {
      const int n = dim(rng);
      const Eigen::MatrixXd B = random_psd(rng, n);
      Eigen::VectorXd x(n), v(n);
      for (int i = 0; i < n; ++i) {
        x[i] = nd(rng);
        v[i] = nd(rng);
      }
      const Eigen::VectorXd z = recover_z(x, B);
      const double q = x.dot(B * x);
      CHECK(std::abs(x.dot(B * z) - std::sqrt(std::max(0.0, q))) <= 1e-10);
      const double zz = z.dot(B * z);
      CHECK(std::min(std::abs(zz), std::abs(zz - 1.0)) <= 1e-10);
      CHECK(schwartz_gap(x, z, B) <= 1e-10);
      CHECK(schwartz_gap(x, v, B) >= -1e-10);
    }
  }

  TEST_CASE("single objective with an inactive constraint") {
    const ProblemSpec spec = single("x0 - 10");
    auto g = make_grid(0.0, 1.0, 101);
    const SolveResult r = solve_weighted(spec, g, vec({1.0}));
    REQUIRE(r.status == SolveStatus::Converged);
    const RecoveryResult rec = recover_multipliers(spec, r.x, Partition::wolfe(1), 1e-4);
    CHECK(rec.dual_point.lambda[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rec.dual_point.y.values().isZero(0.0));
    CHECK(rec.active_nodes == 0);
    CHECK(rec.stationarity_residual <= 1e-4);
  }

  TEST_CASE("zero point of a spec where it is efficient") {
    const ProblemSpec spec = ProblemSpec::parse(
        "name = Z\nn = 1\np = 1\nm = 1\nboundary = fixed_zero\nf.1 = x0^2 + xd0^2\ng.1 = x0 - 1\nB.1 = 1\n");
    auto g = make_grid(0.0, 1.0, 51);
    const PrimalPoint zero(Trajectory(g, 1));
    const Report r = strong_duality_check(spec, Partition::wolfe(1), zero, 1e-4);
    CHECK(r.passed());
    CHECK(r.at("objective_gap.1").value == 0.0);
  }

  TEST_CASE("P1 multipliers follow the weights") {
    const auto& s = testing::solved("P1");
    const RecoveryResult& rec = s.recovery;
    CHECK(std::abs(rec.dual_point.lambda[0] - 0.5) <= 0.05);
    CHECK(std::abs(rec.dual_point.lambda[1] - 0.5) <= 0.05);
    CHECK(rec.active_nodes > 0);
    CHECK_FALSE(rec.flagged);
    CHECK(rec.dual_point.y.values().minCoeff() >= 0.0);
    for (int i = 0; i < 2; ++i) {
      const auto& Z = rec.dual_point.z[i].values();
      for (int k = 0; k < Z.rows(); ++k) {
        const Eigen::VectorXd z = Z.row(k).transpose();
        CHECK(z.dot(s.spec.B[i] * z) <= 1.0 + 1e-9);
      }
    }
    const Report strong = strong_duality_check(s.spec, s.part, rec, 1e-4);
    CHECK(strong.passed());
    // The recovered densities agree with the solver's multiplier estimates.
    CHECK((rec.dual_point.y.values() - s.solve.multipliers).cwiseAbs().maxCoeff() <= 1e-6);
  }

  TEST_CASE("complementary slackness after recovery") {
    for (const char* name : {"P1", "P2", "P2N", "S1"}) {
      const auto& s = testing::solved(name);
      CHECK(s.recovery.slackness_residual <= 1e-6);
    }
  }

  TEST_CASE("P2 strong duality") {
    const auto& s = testing::solved("P2");
    const Report r = strong_duality_check(s.spec, s.part, s.recovery, 1e-3);
    CHECK(r.passed());
  }

  TEST_CASE("S1 multipliers match a dense KKT solve") {
    const auto& s = testing::solved("S1");
    const Eigen::VectorXd x = s.solve.x.x.values().row(0).transpose();
    CHECK(std::abs(x[0] - kS1Mid[0]) <= 1e-4);
    CHECK(std::abs(x[1] - kS1Mid[1]) <= 1e-4);
    // Hand-written gradients of the two-variable program. At x̄ neither
    // constraint is active, so y = 0 and λ solves
    // λ¹a + (1 − λ¹)b = 0 in the least-squares sense.
    const double r = x.norm();
    REQUIRE(x.squaredNorm() - 4.0 < -1e-6);
    REQUIRE(-x[1] < -1e-6);
    const Eigen::Vector2d a(2 * (x[0] - 2) + x[0] / r, 2 * (x[1] - 1) + x[1] / r);
    const Eigen::Vector2d b(2 * (x[0] + 1), 2 * (x[1] - 2) + 1.0);
    const double l1 = -b.dot(a - b) / (a - b).squaredNorm();
    const Eigen::VectorXd& lambda = s.recovery.dual_point.lambda;
    CHECK(std::abs(lambda[0] - l1) <= 1e-4);
    CHECK(std::abs(lambda[1] - (1.0 - l1)) <= 1e-4);
    CHECK(s.recovery.dual_point.y.values().cwiseAbs().maxCoeff() <= 1e-4);
  }

  TEST_CASE("recovery preconditions") {
    const auto& s = testing::solved("P1", 101, 0.5);
    Eigen::MatrixXd bad = s.solve.x.x.values() * 3.0;
    CHECK_THROWS_AS(recover_multipliers(s.spec, PrimalPoint(Trajectory(s.grid, bad)), s.part, 1e-4), InfeasibleInput);
    Eigen::MatrixXd worse = s.solve.x.x.values();
    worse.col(0) *= 0.5;
    RecoveryOptions o;
    o.verify_efficiency = true;
    CHECK_THROWS_AS(recover_multipliers(s.spec, PrimalPoint(Trajectory(s.grid, worse)), s.part, 1e-4, o),
                    NotEfficient);
    CHECK_THROWS_AS(recover_multipliers(s.spec, PrimalPoint(Trajectory(s.grid, worse)), s.part, 1e-4),
                    RecoveryFailed);
  }

  TEST_CASE("converse checks") {
    const auto& s = testing::solved("P1");
    const Report r = converse_duality_check(s.spec, s.part, s.recovery.dual_point, 1e-4);
    CHECK(r.passed());
    CHECK(r.find("independence_ratio") != nullptr);
    CHECK_FALSE(r.at("independence_ratio").gating);

    DualPoint moved = s.recovery.dual_point;
    moved.u = PrimalPoint(Trajectory(s.grid, moved.u.x.values() * 3.0));
    const Report bad = converse_duality_check(s.spec, s.part, moved, 1e-4);
    CHECK_FALSE(bad.passed());
    bool primal_failed = false;
    for (const auto& c : bad.checks())
      if (c.name.rfind("primal.", 0) == 0 && !c.passed) primal_failed = true;
    CHECK(primal_failed);
  }

  TEST_CASE("converse independence for one objective is a norm test") {
    const ProblemSpec spec = single("x0 - 10");
    auto g = make_grid(0.0, 1.0, 41);
    std::mt19937_64 rng(5);
    const DualPoint dp = testing::random_dual_point(spec, g, rng);
    const Report r = converse_duality_check(spec, Partition::wolfe(1), dp, 1e-4);
    CHECK(r.at("independence_ratio").value == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("recovery csv") {
    const auto& s = testing::solved("P1");
    const std::string csv = s.recovery.to_csv();
    CHECK(csv.rfind("quantity,index,value\nlambda,1,", 0) == 0);
    CHECK(csv.find("slackness_residual,0,") != std::string::npos);
  }
}
