#include "mixdual/solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "mixdual/errors.hpp"

namespace mixdual {

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIter: return "max_iter";
    case SolveStatus::Infeasible: return "infeasible";
  }
  return "unknown";
}

NlpInstance::NlpInstance(const ProblemSpec& spec, GridPtr grid, Eigen::VectorXd weights,
                         std::vector<ObjectiveBound> bounds)
    : spec_(&spec), grid_(std::move(grid)), weights_(std::move(weights)), bounds_(std::move(bounds)) {
  if (!grid_) throw DomainError("nlp: missing grid");
  if (weights_.size() != spec.p) throw LengthMismatch("nlp: weight count must equal p");
  for (const auto& b : bounds_)
    if (b.objective < 0 || b.objective >= spec.p) throw DomainError("nlp: bound on unknown objective");
  const int N = grid_->size();
  if (spec.boundary == BoundaryKind::FixedZero) {
    first_free_ = 2;
    free_nodes_ = N - 4;
  } else {
    first_free_ = 0;
    free_nodes_ = N;
  }
}

double NlpInstance::variable_weight(int v) const { return grid_->weights()[first_free_ + v / spec_->n]; }

Eigen::MatrixXd NlpInstance::to_values(const Eigen::VectorXd& v) const {
  const int n = spec_->n;
  const int N = grid_->size();
  if (v.size() != num_variables()) throw LengthMismatch("nlp: decision vector has wrong length");
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(N, n);
  for (int k = 0; k < free_nodes_; ++k)
    for (int c = 0; c < n; ++c) X(first_free_ + k, c) = v[k * n + c];
  if (spec_->boundary == BoundaryKind::FixedZero) {
    X.row(1) = 0.25 * X.row(2);
    X.row(N - 2) = 0.25 * X.row(N - 3);
  }
  return X;
}

Eigen::VectorXd NlpInstance::from_values(const Eigen::MatrixXd& X) const {
  const int n = spec_->n;
  if (X.rows() != grid_->size() || X.cols() != n) throw LengthMismatch("nlp: trajectory shape mismatch");
  Eigen::VectorXd v(num_variables());
  for (int k = 0; k < free_nodes_; ++k)
    for (int c = 0; c < n; ++c) v[k * n + c] = X(first_free_ + k, c);
  return v;
}

Eigen::VectorXd NlpInstance::restrict_gradient(const Eigen::MatrixXd& G) const {
  const int n = spec_->n;
  const int N = grid_->size();
  Eigen::VectorXd out(num_variables());
  for (int k = 0; k < free_nodes_; ++k)
    for (int c = 0; c < n; ++c) out[k * n + c] = G(first_free_ + k, c);
  if (spec_->boundary == BoundaryKind::FixedZero) {
    for (int c = 0; c < n; ++c) {
      out[c] += 0.25 * G(1, c);
      out[(free_nodes_ - 1) * n + c] += 0.25 * G(N - 2, c);
    }
  }
  return out;
}

NlpInstance::Evaluation NlpInstance::evaluate(const Eigen::VectorXd& v, double mu, bool with_gradients) const {
  const ProblemSpec& spec = *spec_;
  const int n = spec.n;
  const int N = grid_->size();
  Evaluation ev;
  ev.values = to_values(v);
  ev.rates = apply_derivative(*grid_, ev.values);
  ev.accels = apply_derivative(*grid_, ev.rates);
  ev.f.resize(N, spec.p);
  ev.g.resize(N, spec.m);
  if (with_gradients) ev.grads.assign(spec.p + spec.m, Eigen::MatrixXd(N, 3 * n));
  std::vector<double> x(n), xd(n), xdd(n), grad(3 * n);
  Eigen::VectorXd xk(n);
  for (int k = 0; k < N; ++k) {
    for (int c = 0; c < n; ++c) {
      x[c] = xk[c] = ev.values(k, c);
      xd[c] = ev.rates(k, c);
      xdd[c] = ev.accels(k, c);
    }
    const EvalPoint pt{grid_->node(k), x, xd, xdd};
    for (int e = 0; e < spec.p + spec.m; ++e) {
      const Expr& expr = e < spec.p ? spec.f[e] : spec.g[e - spec.p];
      double value = 0.0;
      if (with_gradients) {
        value = expr.evaluate_with_gradient(pt, grad);
        for (int j = 0; j < 3 * n; ++j) ev.grads[e](k, j) = grad[j];
      } else {
        value = expr.evaluate(pt);
      }
      if (e < spec.p) {
        const Eigen::VectorXd Bx = spec.B[e] * xk;
        const double q = std::max(0.0, xk.dot(Bx));
        const double s = std::sqrt(q + mu * mu);
        value += s;
        if (with_gradients && s > 0.0)
          for (int c = 0; c < n; ++c) ev.grads[e](k, c) += Bx[c] / s;
        ev.f(k, e) = value;
      } else {
        ev.g(k, e - spec.p) = value;
      }
    }
  }
  return ev;
}

Eigen::VectorXd NlpInstance::combined_gradient(const Evaluation& ev, const Eigen::VectorXd& objective_coef,
                                               const Eigen::MatrixXd& constraint_coef) const {
  const ProblemSpec& spec = *spec_;
  const int n = spec.n;
  const int N = grid_->size();
  const Eigen::VectorXd& w = grid_->weights();
  Eigen::MatrixXd Gx = Eigen::MatrixXd::Zero(N, n);
  Eigen::MatrixXd Gxd = Eigen::MatrixXd::Zero(N, n);
  Eigen::MatrixXd Gxdd = Eigen::MatrixXd::Zero(N, n);
  bool any_rate = false;
  bool any_accel = false;
  for (int e = 0; e < spec.p + spec.m; ++e) {
    const bool is_f = e < spec.p;
    const Expr& expr = is_f ? spec.f[e] : spec.g[e - spec.p];
    const bool rate = expr.references(VarKind::Rate);
    const bool accel = expr.references(VarKind::Accel);
    any_rate |= rate;
    any_accel |= accel;
    for (int k = 0; k < N; ++k) {
      const double coef = is_f ? objective_coef[e] * w[k] : constraint_coef(k, e - spec.p);
      if (coef == 0.0) continue;
      const auto row = ev.grads[e].row(k);
      Gx.row(k) += coef * row.segment(0, n);
      if (rate) Gxd.row(k) += coef * row.segment(n, n);
      if (accel) Gxdd.row(k) += coef * row.segment(2 * n, n);
    }
  }
  Eigen::MatrixXd full = Gx;
  if (any_rate) full += apply_derivative_transpose(*grid_, Gxd);
  if (any_accel) full += apply_second_derivative_transpose(*grid_, Gxdd);
  return restrict_gradient(full);
}

Eigen::VectorXd NlpInstance::objectives(const Eigen::VectorXd& v, double mu) const {
  const Evaluation ev = evaluate(v, mu, false);
  Eigen::VectorXd out(spec_->p);
  for (int i = 0; i < spec_->p; ++i) out[i] = integrate(Eigen::VectorXd(ev.f.col(i)), *grid_);
  return out;
}

Eigen::MatrixXd NlpInstance::objective_gradients(const Eigen::VectorXd& v, double mu) const {
  const Evaluation ev = evaluate(v, mu, true);
  Eigen::MatrixXd out(num_variables(), spec_->p);
  const Eigen::MatrixXd none = Eigen::MatrixXd::Zero(grid_->size(), spec_->m);
  for (int i = 0; i < spec_->p; ++i) out.col(i) = combined_gradient(ev, Eigen::VectorXd::Unit(spec_->p, i), none);
  return out;
}

double NlpInstance::scalarized(const Eigen::VectorXd& v, double mu) const { return weights_.dot(objectives(v, mu)); }

Eigen::VectorXd NlpInstance::scalarized_gradient(const Eigen::VectorXd& v, double mu) const {
  const Evaluation ev = evaluate(v, mu, true);
  return combined_gradient(ev, weights_, Eigen::MatrixXd::Zero(grid_->size(), spec_->m));
}

Eigen::MatrixXd NlpInstance::constraint_values(const Eigen::VectorXd& v) const { return evaluate(v, 0.0, false).g; }

Eigen::VectorXd NlpInstance::bound_values(const Eigen::VectorXd& v, double mu) const {
  const Eigen::VectorXd J = objectives(v, mu);
  Eigen::VectorXd out(bounds_.size());
  for (std::size_t e = 0; e < bounds_.size(); ++e) out[e] = J[bounds_[e].objective] - bounds_[e].bound;
  return out;
}

namespace {

// Augmented Lagrangian merit with squared-hinge inequality terms:
//   Φ = Σ wᵢJᵢ + Σ_{j,k} w_k/(2ρ)[(ν_jk + ρ g_jk)₊² − ν_jk²] + Σ_e 1/(2ρ)[(ν_e + ρ c_e)₊² − ν_e²]
// Nodal multipliers are densities, so ν_jk estimates y^j(t_k).
class Merit {
 public:
  Merit(const NlpInstance& nlp) : nlp_(nlp) {
    const auto& spec = nlp.spec();
    nodal_mult_ = Eigen::MatrixXd::Zero(nlp.grid().size(), spec.m);
    bound_mult_ = Eigen::VectorXd::Zero(nlp.bounds().size());
  }

  double mu = 1e-2;
  double rho = 10.0;

  Eigen::MatrixXd& nodal_multipliers() { return nodal_mult_; }
  Eigen::VectorXd& bound_multipliers() { return bound_mult_; }

  double value(const Eigen::VectorXd& v) const {
    const auto ev = nlp_.evaluate(v, mu, false);
    return value_of(ev);
  }

  double value_of(const NlpInstance::Evaluation& ev) const {
    const auto& grid = nlp_.grid();
    const auto& w = grid.weights();
    Eigen::VectorXd J(ev.f.cols());
    for (int i = 0; i < J.size(); ++i) J[i] = w.dot(ev.f.col(i));
    double phi = nlp_.weights().dot(J);
    for (int j = 0; j < ev.g.cols(); ++j)
      for (int k = 0; k < ev.g.rows(); ++k) {
        const double s = std::max(0.0, nodal_mult_(k, j) + rho * ev.g(k, j));
        phi += w[k] * (s * s - nodal_mult_(k, j) * nodal_mult_(k, j)) / (2.0 * rho);
      }
    const auto& bounds = nlp_.bounds();
    for (std::size_t e = 0; e < bounds.size(); ++e) {
      const double c = J[bounds[e].objective] - bounds[e].bound;
      const double s = std::max(0.0, bound_mult_[e] + rho * c);
      phi += (s * s - bound_mult_[e] * bound_mult_[e]) / (2.0 * rho);
    }
    return phi;
  }

  // Coefficient on each objective: weight plus the active bound-row factor.
  Eigen::VectorXd objective_coefficients(const NlpInstance::Evaluation& ev) const {
    const auto& w = nlp_.grid().weights();
    Eigen::VectorXd coef = nlp_.weights();
    const auto& bounds = nlp_.bounds();
    for (std::size_t e = 0; e < bounds.size(); ++e) {
      const double J = w.dot(ev.f.col(bounds[e].objective));
      coef[bounds[e].objective] += std::max(0.0, bound_mult_[e] + rho * (J - bounds[e].bound));
    }
    return coef;
  }

  Eigen::MatrixXd constraint_coefficients(const NlpInstance::Evaluation& ev) const {
    const auto& w = nlp_.grid().weights();
    Eigen::MatrixXd coef(ev.g.rows(), ev.g.cols());
    for (int j = 0; j < ev.g.cols(); ++j)
      for (int k = 0; k < ev.g.rows(); ++k) coef(k, j) = w[k] * std::max(0.0, nodal_mult_(k, j) + rho * ev.g(k, j));
    return coef;
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& v) const {
    const auto ev = nlp_.evaluate(v, mu, true);
    return nlp_.combined_gradient(ev, objective_coefficients(ev), constraint_coefficients(ev));
  }

  // Gradient with the bound-row coefficients held at `frozen`; its Jacobian
  // is banded, which the colored finite-difference Hessian relies on.
  Eigen::VectorXd frozen_gradient(const Eigen::VectorXd& v, const Eigen::VectorXd& frozen) const {
    const auto ev = nlp_.evaluate(v, mu, true);
    return nlp_.combined_gradient(ev, frozen, constraint_coefficients(ev));
  }

  // Columns sqrt(ρ)·∇J_i for active bound rows: the dense low-rank part of
  // the Hessian.
  Eigen::MatrixXd low_rank(const Eigen::VectorXd& v) const {
    const auto& bounds = nlp_.bounds();
    if (bounds.empty()) return {};
    const auto ev = nlp_.evaluate(v, mu, true);
    const auto& w = nlp_.grid().weights();
    const Eigen::MatrixXd none = Eigen::MatrixXd::Zero(ev.g.rows(), ev.g.cols());
    std::vector<Eigen::VectorXd> cols;
    for (std::size_t e = 0; e < bounds.size(); ++e) {
      const double J = w.dot(ev.f.col(bounds[e].objective));
      if (bound_mult_[e] + rho * (J - bounds[e].bound) <= 0.0) continue;
      cols.push_back(std::sqrt(rho) *
                     nlp_.combined_gradient(ev, Eigen::VectorXd::Unit(ev.f.cols(), bounds[e].objective), none));
    }
    Eigen::MatrixXd U(nlp_.num_variables(), cols.size());
    for (std::size_t c = 0; c < cols.size(); ++c) U.col(c) = cols[c];
    return U;
  }

  const NlpInstance& nlp() const { return nlp_; }

 private:
  const NlpInstance& nlp_;
  Eigen::MatrixXd nodal_mult_;
  Eigen::VectorXd bound_mult_;
};

constexpr int kCouplingRadius = 5;  // nodes; covers the D∘D stencil and its closures

double scaled_norm(const NlpInstance& nlp, const Eigen::VectorXd& g) {
  double worst = 0.0;
  for (int v = 0; v < g.size(); ++v) worst = std::max(worst, std::abs(g[v]) / nlp.variable_weight(v));
  return worst;
}

// Colored forward-difference Hessian of the (banded) frozen gradient.
Eigen::SparseMatrix<double> banded_hessian(const Merit& merit, const Eigen::VectorXd& v,
                                           const Eigen::VectorXd& frozen, const Eigen::VectorXd& g0) {
  const NlpInstance& nlp = merit.nlp();
  const int n = nlp.spec().n;
  const int nv = nlp.num_variables();
  const int nodes = nlp.free_nodes();
  const int stride = 2 * kCouplingRadius + 1;
  const int band = (kCouplingRadius + 1) * n;
  // band storage: H(r, r + d) at bandH(r, d + band)
  Eigen::MatrixXd bandH = Eigen::MatrixXd::Zero(nv, 2 * band + 1);
  Eigen::VectorXd step(nv);
  for (int color = 0; color < std::min(stride, nodes); ++color) {
    for (int c = 0; c < n; ++c) {
      Eigen::VectorXd vp = v;
      for (int k = color; k < nodes; k += stride) {
        const int s = k * n + c;
        step[s] = 1e-7 * std::max(1.0, std::abs(v[s]));
        vp[s] += step[s];
      }
      const Eigen::VectorXd diff = merit.frozen_gradient(vp, frozen) - g0;
      for (int k = color; k < nodes; k += stride) {
        const int s = k * n + c;
        const int lo = std::max(0, k - kCouplingRadius);
        const int hi = std::min(nodes - 1, k + kCouplingRadius);
        for (int kr = lo; kr <= hi; ++kr)
          for (int cr = 0; cr < n; ++cr) {
            const int r = kr * n + cr;
            const int d = s - r;
            if (std::abs(d) <= band) bandH(r, d + band) = diff[r] / step[s];
          }
      }
    }
  }
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(nv) * (2 * band + 1));
  for (int r = 0; r < nv; ++r)
    for (int d = -band; d <= band; ++d) {
      const int s = r + d;
      if (s < 0 || s >= nv) continue;
      const double sym = 0.5 * (bandH(r, d + band) + bandH(s, -d + band));
      if (sym != 0.0) trip.emplace_back(r, s, sym);
    }
  Eigen::SparseMatrix<double> H(nv, nv);
  H.setFromTriplets(trip.begin(), trip.end());
  return H;
}

// Newton direction on the merit using (H + τI + UUᵀ) d = -g.
Eigen::VectorXd newton_direction(const Eigen::SparseMatrix<double>& H, const Eigen::MatrixXd& U,
                                 const Eigen::VectorXd& g) {
  const int nv = static_cast<int>(g.size());
  double max_diag = 0.0;
  for (int i = 0; i < nv; ++i) max_diag = std::max(max_diag, std::abs(H.coeff(i, i)));
  if (max_diag == 0.0) max_diag = 1.0;
  Eigen::SparseMatrix<double> I(nv, nv);
  I.setIdentity();
  double tau = 0.0;
  for (int attempt = 0; attempt < 60; ++attempt) {
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt;
    if (tau > 0.0) {
      llt.compute(H + tau * I);
    } else {
      llt.compute(H);
    }
    if (llt.info() == Eigen::Success) {
      Eigen::VectorXd y = llt.solve(g);
      if (U.cols() > 0) {
        const Eigen::MatrixXd Z = llt.solve(U);
        const Eigen::MatrixXd small = Eigen::MatrixXd::Identity(U.cols(), U.cols()) + U.transpose() * Z;
        y -= Z * small.ldlt().solve(U.transpose() * y);
      }
      if (y.allFinite()) return -y;
    }
    tau = tau == 0.0 ? 1e-10 * max_diag : tau * 10.0;
  }
  return -g;
}

struct InnerStats {
  int iterations = 0;
};

InnerStats minimize_merit(const Merit& merit, Eigen::VectorXd& v, double tol, int max_inner) {
  const NlpInstance& nlp = merit.nlp();
  InnerStats stats;
  double phi = merit.value(v);
  int stalled = 0;
  for (int it = 0; it < max_inner; ++it) {
    const auto ev = nlp.evaluate(v, merit.mu, true);
    const Eigen::VectorXd frozen = merit.objective_coefficients(ev);
    const Eigen::VectorXd g = nlp.combined_gradient(ev, frozen, merit.constraint_coefficients(ev));
    if (scaled_norm(nlp, g) <= tol) break;
    ++stats.iterations;
    const double phi_before = phi;
    const Eigen::SparseMatrix<double> H = banded_hessian(merit, v, frozen, g);
    Eigen::VectorXd d = newton_direction(H, merit.low_rank(v), g);
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      d = -g;
      slope = -g.squaredNorm();
    }
    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      const Eigen::VectorXd trial = v + alpha * d;
      const double phi_trial = merit.value(trial);
      if (std::isfinite(phi_trial) && phi_trial <= phi + 1e-4 * alpha * slope) {
        v = trial;
        phi = phi_trial;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
    // Below the roundoff floor of the gradient the merit stops moving.
    stalled = phi_before - phi <= 1e-15 * std::max(1.0, std::abs(phi)) ? stalled + 1 : 0;
    if (stalled >= 3) break;
  }
  return stats;
}

SolveResult run_augmented_lagrangian(const NlpInstance& nlp, const Trajectory& x0, const SolverOptions& opts) {
  const ProblemSpec& spec = nlp.spec();
  Merit merit(nlp);
  merit.mu = opts.mu0;
  merit.rho = opts.rho0;
  Eigen::VectorXd v = nlp.from_values(x0.values());
  const auto& w = nlp.grid().weights();

  SolveResult result{PrimalPoint(x0), {}, 0.0, 0.0, 0, 0, SolveStatus::MaxIter, {}, {}, {}};
  double accepted_violation = std::numeric_limits<double>::infinity();
  bool converged = false;
  double violation = 0.0;
  double kkt = 0.0;
  for (int outer = 1; outer <= opts.max_outer; ++outer) {
    result.iterations = outer;
    result.inner_iterations += minimize_merit(merit, v, 0.1 * opts.tol, opts.max_inner).iterations;

    const auto ev = nlp.evaluate(v, merit.mu, true);
    Eigen::VectorXd bound_c(nlp.bounds().size());
    for (std::size_t e = 0; e < nlp.bounds().size(); ++e)
      bound_c[e] = w.dot(ev.f.col(nlp.bounds()[e].objective)) - nlp.bounds()[e].bound;
    violation = std::max({0.0, ev.g.size() ? ev.g.maxCoeff() : 0.0, bound_c.size() ? bound_c.maxCoeff() : 0.0});

    const bool accept = violation <= std::max(opts.feas_tol, 0.25 * accepted_violation);
    if (accept) {
      accepted_violation = violation;
      // Gradient of the merit at v equals the Lagrangian gradient with the
      // updated multipliers.
      const Eigen::VectorXd g = nlp.combined_gradient(ev, merit.objective_coefficients(ev),
                                                      merit.constraint_coefficients(ev));
      auto& nodal = merit.nodal_multipliers();
      for (int j = 0; j < spec.m; ++j)
        for (int k = 0; k < nodal.rows(); ++k) nodal(k, j) = std::max(0.0, nodal(k, j) + merit.rho * ev.g(k, j));
      auto& bm = merit.bound_multipliers();
      for (int e = 0; e < bm.size(); ++e) bm[e] = std::max(0.0, bm[e] + merit.rho * bound_c[e]);
      double comp = 0.0;
      for (int j = 0; j < spec.m; ++j)
        for (int k = 0; k < nodal.rows(); ++k) comp = std::max(comp, std::abs(nodal(k, j) * ev.g(k, j)));
      for (int e = 0; e < bm.size(); ++e) comp = std::max(comp, std::abs(bm[e] * bound_c[e]));
      kkt = std::max(scaled_norm(nlp, g), comp);
      result.penalty_history.push_back(merit.rho);
      result.violation_history.push_back(violation);
      if (merit.mu <= opts.mu_min && violation <= opts.feas_tol && kkt <= opts.tol) {
        converged = true;
        break;
      }
    } else {
      if (merit.rho >= opts.rho_max) break;
      merit.rho = std::min(merit.rho * 10.0, opts.rho_max);
    }
    merit.mu = std::max(0.5 * merit.mu, opts.mu_min);
  }

  result.x = PrimalPoint(Trajectory(nlp.grid_ptr(), nlp.to_values(v)));
  result.objective = nlp.objectives(v, 0.0);
  result.kkt_residual = kkt;
  result.max_violation = violation;
  result.multipliers = merit.nodal_multipliers();
  if (converged) {
    result.status = SolveStatus::Converged;
  } else if (violation > opts.feas_tol) {
    result.status = SolveStatus::Infeasible;
  } else {
    result.status = SolveStatus::MaxIter;
  }
  return result;
}

Trajectory initial_point(const ProblemSpec& spec, const GridPtr& grid, const std::optional<Trajectory>& x0) {
  if (!x0) return Trajectory(grid, spec.n);
  if (!(x0->grid() == *grid) || x0->dim() != spec.n) throw GridMismatch("solver: x0 does not match grid or dimension");
  return *x0;
}

}  // namespace

SolveResult solve_weighted(const ProblemSpec& spec, const GridPtr& grid, const Eigen::VectorXd& weights,
                           const std::optional<Trajectory>& x0, const SolverOptions& opts) {
  if (weights.size() != spec.p) throw LengthMismatch("solve_weighted: need p weights");
  if (weights.minCoeff() < 0.0 || std::abs(weights.sum() - 1.0) > 1e-12 || weights.maxCoeff() <= 0.0)
    throw DomainError("solve_weighted: weights must be nonnegative and sum to one");
  const NlpInstance nlp(spec, grid, weights);
  return run_augmented_lagrangian(nlp, initial_point(spec, grid, x0), opts);
}

SolveResult solve_epsilon_constraint(const ProblemSpec& spec, const GridPtr& grid, int k, const Eigen::VectorXd& bounds,
                                     const std::optional<Trajectory>& x0, const SolverOptions& opts) {
  if (k < 0 || k >= spec.p) throw DomainError("solve_epsilon_constraint: objective index out of range");
  if (bounds.size() != spec.p - 1) throw LengthMismatch("solve_epsilon_constraint: need p-1 bounds");
  std::vector<ObjectiveBound> rows;
  for (int i = 0, b = 0; i < spec.p; ++i) {
    if (i == k) continue;
    rows.push_back({i, bounds[b++]});
  }
  const NlpInstance nlp(spec, grid, Eigen::VectorXd::Unit(spec.p, k), rows);
  return run_augmented_lagrangian(nlp, initial_point(spec, grid, x0), opts);
}

Report efficiency_check(const ProblemSpec& spec, const PrimalPoint& xbar, double tol, const SolverOptions& opts) {
  Report report("efficiency_check");
  const Eigen::VectorXd J = primal_objective(spec, xbar);
  for (int k = 0; k < spec.p; ++k) {
    Eigen::VectorXd bounds(spec.p - 1);
    for (int i = 0, b = 0; i < spec.p; ++i)
      if (i != k) bounds[b++] = J[i];
    const SolveResult r = solve_epsilon_constraint(spec, xbar.x.grid_ptr(), k, bounds, xbar.x, opts);
    const double improvement = J[k] - r.objective[k];
    Check& c = report.add_upper("improvement_" + std::to_string(k + 1), improvement, tol,
                                "status=" + to_string(r.status) + " violation=" + format_double(r.max_violation));
    // A solve that cannot reach feasibility says nothing about improvement.
    if (r.max_violation > opts.feas_tol) c.passed = improvement <= tol;
  }
  return report;
}

SweepResult pareto_sweep(const ProblemSpec& spec, const GridPtr& grid, const std::vector<Eigen::VectorXd>& weight_grid,
                         const SolverOptions& opts, double dedupe) {
  SweepResult sweep;
  for (const auto& w : weight_grid) {
    try {
      SolveResult r = solve_weighted(spec, grid, w, std::nullopt, opts);
      if (r.status != SolveStatus::Converged) {
        sweep.errors.push_back("weights " + format_double(w[0]) + ": " + to_string(r.status));
      }
      bool duplicate = false;
      for (const auto& kept : sweep.points)
        if ((kept.x.x.values() - r.x.x.values()).cwiseAbs().maxCoeff() <= dedupe) {
          duplicate = true;
          break;
        }
      if (!duplicate) {
        sweep.points.push_back(std::move(r));
        sweep.point_weights.push_back(w);
      }
    } catch (const Error& e) {
      sweep.errors.push_back("weights " + format_double(w[0]) + ": " + e.what());
    }
  }
  return sweep;
}

std::vector<Eigen::VectorXd> simplex_weights(int p, int count) {
  if (p < 1 || count < 1) throw DomainError("simplex_weights: need p >= 1 and count >= 1");
  std::vector<Eigen::VectorXd> out;
  if (p == 1) {
    out.push_back(Eigen::VectorXd::Ones(1));
    return out;
  }
  if (p == 2) {
    for (int i = 1; i <= count; ++i) {
      const double a = static_cast<double>(i) / (count + 1);
      out.push_back((Eigen::VectorXd(2) << a, 1.0 - a).finished());
    }
    return out;
  }
  // Positive compositions of `total` into p parts, in lexicographic order.
  auto binom = [](int nn, int kk) {
    double r = 1;
    for (int i = 1; i <= kk; ++i) r = r * (nn - kk + i) / i;
    return r;
  };
  int total = p;
  while (binom(total - 1, p - 1) < count) ++total;
  std::vector<int> parts(p);
  std::function<void(int, int)> fill = [&](int slot, int left) {
    if (static_cast<int>(out.size()) == count) return;
    if (slot == p - 1) {
      parts[slot] = left;
      Eigen::VectorXd w(p);
      for (int i = 0; i < p; ++i) w[i] = static_cast<double>(parts[i]) / total;
      out.push_back(w);
      return;
    }
    for (int v = 1; v <= left - (p - 1 - slot); ++v) {
      parts[slot] = v;
      fill(slot + 1, left - v);
    }
  };
  fill(0, total);
  return out;
}

}  // namespace mixdual
