#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace mixdual {

/// Variable families an integrand may reference.
enum class VarKind { Time, State, Rate, Accel };

/// Arguments (t, x, ẋ, ẍ) of an integrand. Views only; the caller owns storage.
struct EvalPoint {
  double t = 0.0;
  std::span<const double> x;
  std::span<const double> xd;
  std::span<const double> xdd;
};

/// Value and exact first partials of an integrand at one point.
struct Partials {
  double value = 0.0;
  Eigen::VectorXd dx;
  Eigen::VectorXd dxd;
  Eigen::VectorXd dxdd;
};

/// Immutable scalar expression in t, x[i], xd[i], xdd[i].
///
/// Grammar (whitespace insignificant):
///
///     expr   := term (('+'|'-') term)*
///     term   := factor (('*'|'/') factor)*
///     factor := atom ('^' integer)?
///     atom   := number | 't' | 'x'i | 'xd'i | 'xdd'i
///             | func '(' expr ')' | '(' expr ')' | '-' atom
///     func   := sin | cos | exp | sqrt
///
/// A unary minus binds tighter than '^', so `-x0^2` is `(-x0)^2`. Exponents are
/// integers and may carry a sign. Indices are zero-based.
///
/// Partials are computed in forward mode: every tape slot carries its value
/// and the exact gradient with respect to (x, xd, xdd).
class Expr {
 public:
  static Expr parse(std::string_view text, int dim);

  int dim() const { return dim_; }
  bool references(VarKind kind) const;

  double evaluate(const EvalPoint& p) const;
  Partials partials(const EvalPoint& p) const;
  /// Writes the gradient as [d/dx | d/dxd | d/dxdd] into `gradient`
  /// (length 3·dim) and returns the value.
  double evaluate_with_gradient(const EvalPoint& p, std::span<double> gradient) const;

  /// Fully parenthesised form; parse(to_string()) evaluates identically.
  std::string to_string() const;

  struct Node;
  struct Instr;

 private:
  Expr(std::shared_ptr<const Node> root, int dim);

  std::shared_ptr<const Node> root_;
  std::shared_ptr<const std::vector<Instr>> tape_;
  int dim_ = 0;
  unsigned kinds_ = 0;
};

}  // namespace mixdual
