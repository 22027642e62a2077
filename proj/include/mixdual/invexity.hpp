#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>

#include "mixdual/dual.hpp"
#include "mixdual/grid.hpp"
#include "mixdual/problem.hpp"
#include "mixdual/report.hpp"

namespace mixdual {

/// An integral functional F(x) = ∫ φ(t, x, ẋ, ẍ) dt on a fixed grid, with
/// the boundary conditions its sample trajectories must respect.
class FunctionalSpec {
 public:
  using Integrand = std::function<IntegrandSamples(const PrimalPoint&)>;

  FunctionalSpec(std::string id, GridPtr grid, int dim, BoundaryKind boundary, Integrand integrand);

  static FunctionalSpec from_expr(std::string id, const Expr& e, GridPtr grid, BoundaryKind boundary);
  /// Σᵢλⁱ[fⁱ + (·)ᵀBⁱzⁱ + Σ_{j∈J0} yʲgʲ] with λ, y, z taken from dp.
  static FunctionalSpec combined(const ProblemSpec& spec, const Partition& part, const DualPoint& dp);
  /// Σ_{j∈Jα} yʲgʲ with y taken from dp.
  static FunctionalSpec partition(const ProblemSpec& spec, const Partition& part, int alpha, const DualPoint& dp);

  const std::string& id() const { return id_; }
  const GridPtr& grid() const { return grid_; }
  int dim() const { return dim_; }
  BoundaryKind boundary() const { return boundary_; }

  /// Throws GridMismatch when x is on another grid or has another dimension.
  IntegrandSamples samples(const PrimalPoint& x) const;
  double value(const PrimalPoint& x) const;

 private:
  std::string id_;
  GridPtr grid_;
  int dim_;
  BoundaryKind boundary_;
  Integrand integrand_;
};

/// η(x, u); the default is x − u.
using EtaKernel = std::function<Trajectory(const Trajectory& x, const Trajectory& u)>;

EtaKernel difference_kernel();

/// ∫ ηᵀφ_x + (Dη)ᵀφ_ẋ + (D²η)ᵀφ_ẍ dt with the partials taken at u.
double directional_value(const FunctionalSpec& F, const Trajectory& x, const Trajectory& u, const Trajectory& eta);

/// Random smooth trajectory: per component, a combination of degree <= 6
/// polynomial basis functions normalized to max 1 with coefficients uniform
/// in [-amplitude, amplitude]. Fixed-endpoint samples use the basis
/// s²(1−s)²sʲ and are then made to satisfy the discrete boundary conditions
/// exactly.
Trajectory sample_trajectory(const GridPtr& grid, int dim, BoundaryKind boundary, std::mt19937_64& rng,
                             double amplitude = 1.0);

struct CertifyOptions {
  int pairs = 500;
  std::uint64_t seed = 1;
  /// When set, u is fixed to this point and only x is sampled.
  std::optional<Trajectory> anchor;
  double amplitude = 1.0;
};

enum class InvexKind { Invex, Pseudoinvex, Quasiinvex };

std::string to_string(InvexKind kind);

/// Sampling certificate. PASS is evidence over the sampled pairs, not a
/// proof; FAIL carries the seed of a witness pair that was re-checked with a
/// finite-difference directional derivative.
struct Certificate {
  std::string functional_id;
  InvexKind kind = InvexKind::Invex;
  int pairs = 0;
  double worst_violation = 0.0;
  bool passed = true;
  std::optional<std::uint64_t> witness_seed;
  /// The witness still violates when re-evaluated independently.
  bool witness_confirmed = false;
  Report report{"invexity"};

  static std::string csv_header();
  std::string csv_row() const;
};

/// Certificate threshold on the worst violation.
inline constexpr double kInvexityTolerance = 1e-7;

/// The pair drawn for one per-pair seed: (x, u).
std::pair<Trajectory, Trajectory> sample_pair(const FunctionalSpec& F, std::uint64_t pair_seed,
                                              const CertifyOptions& options);
/// Per-pair seed of pair q.
std::uint64_t pair_seed(std::uint64_t seed, int q);

/// Violation of one pair, >= 0; 0 means the defining implication holds.
double pair_violation(InvexKind kind, double fx, double fu, double direction);

Certificate certify_invex(const FunctionalSpec& F, const EtaKernel& eta, const CertifyOptions& options);
Certificate certify_pseudoinvex(const FunctionalSpec& F, const EtaKernel& eta, const CertifyOptions& options);
Certificate certify_quasiinvex(const FunctionalSpec& F, const EtaKernel& eta, const CertifyOptions& options);

/// Central-difference directional derivative of F at u along eta, with one
/// Richardson extrapolation step.
double finite_difference_direction(const FunctionalSpec& F, const Trajectory& u, const Trajectory& eta);

}  // namespace mixdual
