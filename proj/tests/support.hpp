#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <string>

#include <Eigen/Core>

#include "mixdual/catalog.hpp"
#include "mixdual/dual.hpp"
#include "mixdual/grid.hpp"
#include "mixdual/invexity.hpp"
#include "mixdual/problem.hpp"
#include "mixdual/recovery.hpp"
#include "mixdual/solver.hpp"

namespace testing {

using Fn = std::function<Eigen::VectorXd(double)>;

inline mixdual::Trajectory sample(const mixdual::GridPtr& grid, int dim, const Fn& f) {
  Eigen::MatrixXd v(grid->size(), dim);
  for (int k = 0; k < grid->size(); ++k) v.row(k) = f(grid->node(k)).transpose();
  return mixdual::Trajectory(grid, v);
}

inline mixdual::Trajectory scalar(const mixdual::GridPtr& grid, const std::function<double(double)>& f) {
  return sample(grid, 1, [&](double t) { return Eigen::VectorXd::Constant(1, f(t)); });
}

inline Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

inline double relative(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

/// Weighted-sum solution and recovered multipliers, cached per
/// (problem, N, first weight) since the solves dominate test time.
struct Solved {
  mixdual::ProblemSpec spec;
  mixdual::GridPtr grid;
  mixdual::Partition part;
  mixdual::SolveResult solve;
  mixdual::RecoveryResult recovery;
};

inline mixdual::Partition default_partition(int m) {
  std::vector<int> rest;
  for (int j = 1; j < m; ++j) rest.push_back(j);
  if (rest.empty()) return mixdual::Partition(m, {{0}});
  return mixdual::Partition(m, {{0}, rest});
}

inline const Solved& solved(const std::string& name, int N = 201, double w1 = 0.5) {
  static std::map<std::string, Solved> cache;
  const std::string key = name + "/" + std::to_string(N) + "/" + std::to_string(w1);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  mixdual::ProblemSpec spec = mixdual::catalog_problem(name);
  auto grid = mixdual::make_grid(spec.a, spec.b, N);
  Eigen::VectorXd w = Eigen::VectorXd::Constant(spec.p, (1.0 - w1) / std::max(1, spec.p - 1));
  w[0] = w1;
  mixdual::Partition part = default_partition(spec.m);
  auto solve = mixdual::solve_weighted(spec, grid, w);
  auto recovery = mixdual::recover_multipliers(spec, solve.x, part, 1e-4);
  return cache.emplace(key, Solved{std::move(spec), grid, std::move(part), std::move(solve), std::move(recovery)})
      .first->second;
}

/// Random dual point: smooth u respecting the boundary conditions, y >= 0,
/// z with zᵀBz <= 1 and λ in the open simplex.
inline mixdual::DualPoint random_dual_point(const mixdual::ProblemSpec& spec, const mixdual::GridPtr& grid,
                                            std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  mixdual::PrimalPoint u(mixdual::sample_trajectory(grid, spec.n, spec.boundary, rng, 1.0));
  const int N = grid->size();
  Eigen::MatrixXd Y(N, spec.m);
  for (int k = 0; k < N; ++k)
    for (int j = 0; j < spec.m; ++j) Y(k, j) = u01(rng);
  std::vector<mixdual::Trajectory> z;
  for (int i = 0; i < spec.p; ++i) {
    Eigen::MatrixXd Z(N, spec.n);
    for (int k = 0; k < N; ++k) {
      Eigen::VectorXd v(spec.n);
      for (int c = 0; c < spec.n; ++c) v[c] = 2.0 * u01(rng) - 1.0;
      const double q = v.dot(spec.B[i] * v);
      if (q > 1.0) v /= std::sqrt(q);
      Z.row(k) = v.transpose();
    }
    z.emplace_back(grid, Z);
  }
  Eigen::VectorXd lambda(spec.p);
  for (int i = 0; i < spec.p; ++i) lambda[i] = 0.05 + u01(rng);
  lambda /= lambda.sum();
  return mixdual::DualPoint{std::move(u), mixdual::Trajectory(grid, Y), std::move(z), lambda};
}

}  // namespace testing
