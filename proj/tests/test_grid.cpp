#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "mixdual/errors.hpp"
#include "mixdual/grid.hpp"
#include "support.hpp"

using namespace mixdual;
using testing::scalar;

namespace {

constexpr double kPi = std::numbers::pi;

struct Errors {
  double first;
  double second_direct;
  double second_composed_interior;
  double integral;
};

// Max-norm errors for x = sin t on [0, π].
Errors errors_at(int N) {
  auto g = make_grid(0.0, kPi, N);
  const Trajectory x = scalar(g, [](double t) { return std::sin(t); });
  const Eigen::MatrixXd d1 = derivative(x).values();
  const Eigen::MatrixXd d2 = second_derivative(x, SecondDerivativeStencil::Direct).values();
  const Eigen::MatrixXd dd = second_derivative(x).values();
  Errors e{0, 0, 0, 0};
  for (int k = 0; k < N; ++k) {
    const double t = g->node(k);
    e.first = std::max(e.first, std::abs(d1(k, 0) - std::cos(t)));
    e.second_direct = std::max(e.second_direct, std::abs(d2(k, 0) + std::sin(t)));
    if (k >= 2 && k <= N - 3) e.second_composed_interior = std::max(e.second_composed_interior, std::abs(dd(k, 0) + std::sin(t)));
  }
  auto ge = make_grid(0.0, 1.0, N);
  Eigen::VectorXd f(N);
  for (int k = 0; k < N; ++k) f[k] = std::exp(ge->node(k));
  e.integral = std::abs(integrate(f, *ge) - (std::exp(1.0) - 1.0));
  return e;
}

}  // namespace

TEST_SUITE("grid") {
  TEST_CASE("grid invariants") {
    auto g = make_grid(-1.0, 2.0, 31);
    CHECK(g->node(0) == -1.0);
    CHECK(g->node(30) == 2.0);
    for (int k = 1; k < 31; ++k) CHECK(std::abs(g->node(k) - g->node(k - 1) - 0.1) <= 1e-12 * 3.0);
    CHECK(g->weights().sum() == doctest::Approx(3.0).epsilon(1e-14));
    CHECK_THROWS_AS(make_grid(0.0, 1.0, 4), DomainError);
    CHECK_THROWS_AS(make_grid(1.0, 1.0, 10), DomainError);
  }

  TEST_CASE("trajectory shape checks") {
    auto g = make_grid(0.0, 1.0, 11);
    CHECK_THROWS_AS(Trajectory(g, Eigen::MatrixXd::Zero(10, 1)), LengthMismatch);
    Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(11, 1);
    bad(3, 0) = std::nan("");
    CHECK_THROWS_AS(Trajectory(g, bad), DomainError);
  }

  TEST_CASE("derivative is exact on quadratics") {
    auto g = make_grid(0.0, 1.0, 11);
    const Trajectory x = scalar(g, [](double t) { return t * t; });
    const Trajectory d = derivative(x);
    for (int k = 0; k < 11; ++k) CHECK(d.values()(k, 0) == doctest::Approx(2.0 * g->node(k)).epsilon(1e-12));
    const Trajectory dd = second_derivative(x);
    for (int k = 0; k < 11; ++k) CHECK(dd.values()(k, 0) == doctest::Approx(2.0).epsilon(1e-10));
    const Trajectory c = derivative(scalar(g, [](double) { return 3.5; }));
    CHECK(c.values().cwiseAbs().maxCoeff() <= 1e-12);
  }

  TEST_CASE("derivative is linear") {
    auto g = make_grid(0.0, 1.0, 41);
    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd;
    Eigen::MatrixXd a(41, 3), b(41, 3);
    for (int k = 0; k < 41; ++k)
      for (int c = 0; c < 3; ++c) {
        a(k, c) = nd(rng);
        b(k, c) = nd(rng);
      }
    const double alpha = 1.7, beta = -0.3;
    const Eigen::MatrixXd lhs = apply_derivative(*g, alpha * a + beta * b);
    const Eigen::MatrixXd rhs = alpha * apply_derivative(*g, a) + beta * apply_derivative(*g, b);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12 * lhs.cwiseAbs().maxCoeff());
  }

  TEST_CASE("transpose operators match the dense matrices") {
    auto g = make_grid(0.0, 2.0, 9);
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(9, 9);
    const Eigen::MatrixXd D = apply_derivative(*g, I);
    CHECK((apply_derivative_transpose(*g, I) - D.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((apply_second_derivative_transpose(*g, I) - (D * D).transpose()).cwiseAbs().maxCoeff() <= 1e-10);
  }

  TEST_CASE("order-2 convergence when N-1 doubles") {
    const Errors coarse = errors_at(41);
    const Errors mid = errors_at(81);
    const Errors fine = errors_at(161);
    for (const auto& [c, f] : {std::pair{coarse, mid}, std::pair{mid, fine}}) {
      CHECK(c.first / f.first >= 3.5);
      CHECK(c.first / f.first <= 4.5);
      CHECK(c.second_direct / f.second_direct >= 3.5);
      CHECK(c.second_direct / f.second_direct <= 4.5);
      CHECK(c.second_composed_interior / f.second_composed_interior >= 3.5);
      CHECK(c.second_composed_interior / f.second_composed_interior <= 4.5);
      CHECK(c.integral / f.integral >= 3.5);
      CHECK(c.integral / f.integral <= 4.5);
    }
  }

  TEST_CASE("trapezoid values") {
    auto g = make_grid(0.0, 1.0, 101);
    CHECK(integrate(Eigen::VectorXd::Ones(101), *g) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(integrate(g->nodes(), *g) == doctest::Approx(0.5).epsilon(1e-14));
    const Eigen::VectorXd sq = g->nodes().array().square();
    CHECK(std::abs(integrate(sq, *g) - 1.0 / 3.0) <= 2e-5);
    CHECK_THROWS_AS(integrate(Eigen::VectorXd::Ones(100), *g), LengthMismatch);
  }

  TEST_CASE("adjoint identity") {
    auto g = make_grid(0.0, 1.0, 201);
    const Trajectory zero(g, 1);
    const Trajectory t = scalar(g, [](double s) { return s; });
    CHECK(adjoint_identity_residual(zero, t) == 0.0);
    const Trajectory bump = scalar(g, [](double s) { return s * (1.0 - s); });
    CHECK(adjoint_identity_residual(bump, t) <= 1e-3);
    const Trajectory wave = scalar(g, [](double s) { return std::sin(kPi * s); });
    CHECK(adjoint_identity_residual(wave, wave) <= 1e-3);
    CHECK_THROWS_AS(adjoint_identity_residual(t, t), DomainError);
    CHECK_THROWS_AS(adjoint_identity_residual(bump, scalar(make_grid(0.0, 1.0, 101), [](double s) { return s; })),
                    GridMismatch);
  }

  TEST_CASE("adjoint residual shrinks at second order") {
    auto residual = [](int N) {
      auto g = make_grid(0.0, 1.0, N);
      const Trajectory phi = scalar(g, [](double s) { return std::sin(kPi * s) * std::exp(s); });
      const Trajectory psi = scalar(g, [](double s) { return std::cos(2.0 * s) + s * s * s; });
      return adjoint_identity_residual(phi, psi);
    };
    const double r1 = residual(51), r2 = residual(101), r3 = residual(201);
    CHECK(r1 / r2 >= 3.5);
    CHECK(r1 / r2 <= 4.5);
    CHECK(r2 / r3 >= 3.5);
    CHECK(r2 / r3 <= 4.5);
  }
}
