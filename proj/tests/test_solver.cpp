#include <doctest.h>

#include <random>

#include "mixdual/errors.hpp"
#include "mixdual/solver.hpp"
#include "support.hpp"

using namespace mixdual;
using testing::vec;

namespace {

// Continuous P2 solution at w = (1/2, 1/2): x'''' + 100x = 50 + 40cos t - 3/4
// with clamped ends, solved by collocation to 1e-9 and integrated by adaptive
// quadrature.
constexpr double kP2J1 = -5.543679267595832;
constexpr double kP2J2 = -2.5861668791359738;
constexpr double kP2Mid = 0.1814165208304666;

// S1 minimizers under single weights, from an SQP solve of the two-variable
// program.
constexpr double kS1First[2] = {1.5527864, 0.7763932};
constexpr double kS1Second[2] = {-1.0, 1.5};

ProblemSpec quadratic_spec() {
  return ProblemSpec::parse(
      "name = Q\nn = 2\np = 1\nm = 1\nboundary = natural\n"
      "f.1 = 0.5*(x0^2 + x1^2) + 0.5*xd0^2\ng.1 = x0 - 10\n");
}

bool dominates(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double tol) {
  return (a.array() <= b.array() + tol).all() && (a.array() < b.array() - tol).any();
}

}  // namespace

TEST_SUITE("solver") {
  TEST_CASE("objective gradients match central differences") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> nd;
    for (const auto& entry : catalog()) {
      const ProblemSpec spec = catalog_problem(entry.name);
      auto g = make_grid(spec.a, spec.b, 21);
      const NlpInstance nlp(spec, g, Eigen::VectorXd::Constant(spec.p, 1.0 / spec.p));
      const int nv = nlp.num_variables();
      for (int trial = 0; trial < 50; ++trial) {
        Eigen::VectorXd v(nv);
        for (int i = 0; i < nv; ++i) v[i] = 0.5 * nd(rng);
        const double mu = 1e-2;
        const Eigen::MatrixXd G = nlp.objective_gradients(v, mu);
        double worst = 0.0;
        for (int i = 0; i < nv; ++i) {
          const double h = 1e-6;
          Eigen::VectorXd vp = v, vm = v;
          vp[i] += h;
          vm[i] -= h;
          const Eigen::VectorXd fd = (nlp.objectives(vp, mu) - nlp.objectives(vm, mu)) / (2 * h);
          for (int k = 0; k < spec.p; ++k)
            worst = std::max(worst, std::abs(G(i, k) - fd[k]) / std::max(1.0, std::abs(fd[k])));
        }
        CHECK(worst <= 1e-5);
      }
    }
  }

  TEST_CASE("P1 balanced weights converge") {
    const auto& s = testing::solved("P1");
    CHECK(s.solve.status == SolveStatus::Converged);
    CHECK(s.solve.kkt_residual <= 1e-6);
    CHECK(primal_feasibility(s.spec, s.solve.x, 1e-6).passed());
    // The obstacle row is active somewhere.
    CHECK(s.solve.multipliers.col(1).maxCoeff() > 0.1);
  }

  TEST_CASE("penalty grows monotonically and accepted violation never rises above the band") {
    for (const char* name : {"P1", "P2", "P3"}) {
      const auto& s = testing::solved(name);
      const auto& rho = s.solve.penalty_history;
      const auto& viol = s.solve.violation_history;
      REQUIRE(rho.size() == viol.size());
      for (std::size_t k = 1; k < rho.size(); ++k) {
        CHECK(rho[k] >= rho[k - 1]);
        CHECK(viol[k] <= std::max(viol[k - 1], SolverOptions{}.feas_tol));
      }
    }
  }

  TEST_CASE("converged means small KKT residual and feasibility") {
    for (const char* name : {"P1", "P2", "P2N", "P3", "S1"}) {
      const auto& s = testing::solved(name);
      CHECK(s.solve.status == SolveStatus::Converged);
      CHECK(s.solve.kkt_residual <= SolverOptions{}.tol);
      CHECK(primal_feasibility(s.spec, s.solve.x, SolverOptions{}.feas_tol).passed());
    }
  }

  TEST_CASE("unconstrained quadratic has the zero minimizer") {
    const ProblemSpec spec = quadratic_spec();
    auto g = make_grid(0.0, 1.0, 31);
    Eigen::MatrixXd x0 = Eigen::MatrixXd::Constant(31, 2, 0.7);
    const SolveResult r = solve_weighted(spec, g, vec({1.0}), Trajectory(g, x0));
    CHECK(r.status == SolveStatus::Converged);
    CHECK(r.x.x.values().cwiseAbs().maxCoeff() <= 1e-8);
  }

  TEST_CASE("P2 converges to the continuous solution") {
    // The clamped-end closure of D∘D makes the ẍ energy first-order accurate,
    // so the objective error halves with h.
    const ProblemSpec spec = catalog_problem("P2");
    std::vector<Eigen::Vector2d> err;
    for (int N : {101, 201, 401}) {
      const SolveResult r = solve_weighted(spec, make_grid(0.0, 1.0, N), vec({0.5, 0.5}));
      REQUIRE(r.status == SolveStatus::Converged);
      err.emplace_back(r.objective[0] - kP2J1, r.objective[1] - kP2J2);
      if (N >= 201) CHECK(std::abs(r.x.x.values()((N - 1) / 2, 0) - kP2Mid) <= 1e-3);
    }
    for (int k = 1; k < 3; ++k)
      for (int i = 0; i < 2; ++i) {
        const double ratio = err[k - 1][i] / err[k][i];
        CHECK(ratio >= 1.8);
        CHECK(ratio <= 2.2);
      }
    CHECK(err[2].cwiseAbs().maxCoeff() <= 0.025);
  }

  TEST_CASE("S1 single-weight solutions") {
    const ProblemSpec spec = catalog_problem("S1");
    auto g = make_grid(0.0, 1.0, 5);
    const StaticPair pair(spec);
    for (int k = 0; k < 2; ++k) {
      const Eigen::VectorXd w = Eigen::VectorXd::Unit(2, k);
      const SolveResult r = solve_weighted(spec, g, w);
      REQUIRE(r.status == SolveStatus::Converged);
      const Eigen::VectorXd x = r.x.x.values().row(2).transpose();
      CHECK((r.x.x.values().rowwise() - x.transpose()).cwiseAbs().maxCoeff() <= 1e-8);
      const double* ref = k == 0 ? kS1First : kS1Second;
      CHECK(std::abs(x[0] - ref[0]) <= 1e-4);
      CHECK(std::abs(x[1] - ref[1]) <= 1e-4);
      // Brute force over [-2, 2]^2 with step 0.01.
      double best = std::numeric_limits<double>::infinity();
      Eigen::VectorXd arg(2);
      for (int a = 0; a <= 400; ++a)
        for (int b = 0; b <= 400; ++b) {
          const Eigen::VectorXd p = vec({-2.0 + 0.01 * a, -2.0 + 0.01 * b});
          if (!pair.primal_feasible(p, 0.0)) continue;
          const double f = pair.primal(p)[k];
          if (f < best) {
            best = f;
            arg = p;
          }
        }
      CHECK((arg - x).norm() <= 0.02);
    }
  }

  TEST_CASE("weights are validated") {
    const ProblemSpec spec = catalog_problem("P1");
    auto g = make_grid(0.0, 1.0, 21);
    CHECK_THROWS_AS(solve_weighted(spec, g, vec({0.6, 0.6})), DomainError);
    CHECK_THROWS_AS(solve_weighted(spec, g, vec({1.5, -0.5})), DomainError);
    CHECK_THROWS_AS(solve_weighted(spec, g, vec({1.0})), LengthMismatch);
  }

  TEST_CASE("single objective epsilon problem equals the weighted one") {
    const ProblemSpec spec = ProblemSpec::parse(
        "name = One\nn = 1\np = 1\nm = 1\nboundary = fixed_zero\n"
        "f.1 = 0.5*xd0^2 + x0^2 - 3*x0\ng.1 = x0 - 0.2\nB.1 = 1\n");
    auto g = make_grid(0.0, 1.0, 41);
    const SolveResult a = solve_weighted(spec, g, vec({1.0}));
    const SolveResult b = solve_epsilon_constraint(spec, g, 0, Eigen::VectorXd(0));
    CHECK(a.status == SolveStatus::Converged);
    CHECK(b.status == SolveStatus::Converged);
    CHECK((a.x.x.values() - b.x.x.values()).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(efficiency_check(spec, a.x, 1e-6).passed());
  }

  TEST_CASE("epsilon constraint is consistent with the weighted solution") {
    const auto& s = testing::solved("P1", 101, 0.5);
    for (int k = 0; k < 2; ++k) {
      const SolveResult r = solve_epsilon_constraint(s.spec, s.grid, k, vec({s.solve.objective[1 - k]}));
      CHECK(r.status == SolveStatus::Converged);
      CHECK(r.objective[k] <= s.solve.objective[k] + 1e-6);
      CHECK(r.objective[1 - k] <= s.solve.objective[1 - k] + 1e-6);
    }
  }

  TEST_CASE("impossible objective bounds are infeasible") {
    const ProblemSpec spec = catalog_problem("P1");
    auto g = make_grid(0.0, 1.0, 21);
    SolverOptions o;
    o.max_outer = 20;
    const SolveResult r = solve_epsilon_constraint(spec, g, 0, vec({-1e6}), std::nullopt, o);
    CHECK(r.status == SolveStatus::Infeasible);
  }

  TEST_CASE("efficiency check") {
    const auto& s = testing::solved("P1", 101, 0.5);
    CHECK(efficiency_check(s.spec, s.solve.x, 1e-6).passed());
    // Shrinking one component stays feasible but gives up objective value.
    Eigen::MatrixXd worse = s.solve.x.x.values();
    worse.col(0) *= 0.5;
    const Report r = efficiency_check(s.spec, PrimalPoint(Trajectory(s.grid, worse)), 1e-6);
    CHECK_FALSE(r.passed());
    double best = 0.0;
    for (const auto& c : r.checks()) best = std::max(best, c.value);
    CHECK(best > 1e-6);
  }

  TEST_CASE("pareto sweep") {
    const ProblemSpec spec = catalog_problem("P1");
    auto g = make_grid(0.0, 1.0, 101);
    const SweepResult sweep = pareto_sweep(spec, g, simplex_weights(2, 9));
    CHECK(sweep.errors.empty());
    CHECK(sweep.points.size() >= 5);
    for (const auto& a : sweep.points)
      for (const auto& b : sweep.points) CHECK_FALSE(dominates(a.objective, b.objective, 1e-6));

    const SweepResult one = pareto_sweep(spec, g, {vec({0.5, 0.5})});
    CHECK(one.points.size() == 1);

    const ProblemSpec p3 = catalog_problem("P3");
    const SweepResult nonconvex = pareto_sweep(p3, g, simplex_weights(2, 5));
    CHECK(nonconvex.points.size() + nonconvex.errors.size() >= 1);
  }

  TEST_CASE("simplex weights") {
    const auto w = simplex_weights(2, 9);
    REQUIRE(w.size() == 9);
    for (const auto& v : w) {
      CHECK(v.minCoeff() > 0.0);
      CHECK(v.sum() == doctest::Approx(1.0).epsilon(1e-15));
    }
    for (const auto& v : simplex_weights(3, 4)) {
      CHECK(v.minCoeff() > 0.0);
      CHECK(v.sum() == doctest::Approx(1.0).epsilon(1e-15));
    }
  }
}
