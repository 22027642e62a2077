#include "mixdual/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "mixdual/errors.hpp"

namespace mixdual {

namespace {

enum class Op { Const, Time, State, Rate, Accel, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp, Sqrt };

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

struct Expr::Node {
  Op op;
  double value = 0.0;  // Const
  int index = 0;       // variable index or integer exponent
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
};

struct Expr::Instr {
  Op op;
  double value;
  int index;
  int lhs;
  int rhs;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

NodePtr make_node(Op op, NodePtr lhs = nullptr, NodePtr rhs = nullptr, double value = 0.0, int index = 0) {
  auto node = std::make_shared<Expr::Node>();
  node->op = op;
  node->value = value;
  node->index = index;
  node->lhs = std::move(lhs);
  node->rhs = std::move(rhs);
  return node;
}

class Parser {
 public:
  Parser(std::string_view text, int dim) : text_(text), dim_(dim) {}

  NodePtr parse() {
    skip();
    if (pos_ >= text_.size()) throw SyntaxError("empty expression", pos_);
    NodePtr root = expr();
    skip();
    if (pos_ != text_.size()) throw SyntaxError(std::string("unexpected '") + text_[pos_] + "'", pos_);
    return root;
  }

 private:
  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) throw SyntaxError(std::string("expected '") + c + "'", pos_);
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = make_node(Op::Add, lhs, term());
      } else if (accept('-')) {
        lhs = make_node(Op::Sub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = factor();
    for (;;) {
      if (accept('*')) {
        lhs = make_node(Op::Mul, lhs, factor());
      } else if (accept('/')) {
        lhs = make_node(Op::Div, lhs, factor());
      } else {
        return lhs;
      }
    }
  }

  NodePtr factor() {
    NodePtr base = atom();
    if (!accept('^')) return base;
    skip();
    const std::size_t start = pos_;
    bool negative = false;
    if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) {
      negative = text_[pos_] == '-';
      ++pos_;
    }
    const std::size_t digits = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ == digits) throw SyntaxError("expected integer exponent", start);
    const long k = std::strtol(std::string(text_.substr(digits, pos_ - digits)).c_str(), nullptr, 10);
    if (k > 64) throw SyntaxError("exponent too large", start);
    return make_node(Op::Pow, base, nullptr, 0.0, static_cast<int>(negative ? -k : k));
  }

  NodePtr atom() {
    skip();
    if (pos_ >= text_.size()) throw SyntaxError("unexpected end of expression", pos_);
    const char c = text_[pos_];
    if (c == '-') {
      ++pos_;
      return make_node(Op::Neg, atom());
    }
    if (c == '(') {
      ++pos_;
      NodePtr inner = expr();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    throw SyntaxError(std::string("unexpected '") + c + "'", pos_);
  }

  NodePtr number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      const std::size_t from = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      return pos_ - from;
    };
    std::size_t count = digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      count += digits();
    }
    if (count == 0) throw SyntaxError("malformed number", start);
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      const std::size_t mark = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (digits() == 0) pos_ = mark;  // not an exponent; leave 'e' for the caller
    }
    const double v = std::strtod(std::string(text_.substr(start, pos_ - start)).c_str(), nullptr);
    return make_node(Op::Const, nullptr, nullptr, v);
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    const std::string name(text_.substr(start, pos_ - start));
    if (name == "t") return make_node(Op::Time);
    if (name == "sin" || name == "cos" || name == "exp" || name == "sqrt") {
      const Op op = name == "sin" ? Op::Sin : name == "cos" ? Op::Cos : name == "exp" ? Op::Exp : Op::Sqrt;
      expect('(');
      NodePtr arg = expr();
      expect(')');
      return make_node(op, arg);
    }
    if (name == "x" || name == "xd" || name == "xdd") {
      const std::size_t digits = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (pos_ == digits) throw SyntaxError("expected index after '" + name + "'", digits);
      const long index = std::strtol(std::string(text_.substr(digits, pos_ - digits)).c_str(), nullptr, 10);
      if (index >= dim_)
        throw IndexOutOfRange(name + std::to_string(index) + " out of range for dimension " + std::to_string(dim_));
      const Op op = name == "x" ? Op::State : name == "xd" ? Op::Rate : Op::Accel;
      return make_node(op, nullptr, nullptr, 0.0, static_cast<int>(index));
    }
    throw UnknownIdentifier("unknown identifier '" + name + "' at position " + std::to_string(start));
  }

  std::string_view text_;
  int dim_;
  std::size_t pos_ = 0;
};

int compile(const Expr::Node& node, std::vector<Expr::Instr>& tape, unsigned& kinds) {
  int lhs = -1;
  int rhs = -1;
  if (node.lhs) lhs = compile(*node.lhs, tape, kinds);
  if (node.rhs) rhs = compile(*node.rhs, tape, kinds);
  switch (node.op) {
    case Op::Time: kinds |= 1u << static_cast<unsigned>(VarKind::Time); break;
    case Op::State: kinds |= 1u << static_cast<unsigned>(VarKind::State); break;
    case Op::Rate: kinds |= 1u << static_cast<unsigned>(VarKind::Rate); break;
    case Op::Accel: kinds |= 1u << static_cast<unsigned>(VarKind::Accel); break;
    default: break;
  }
  tape.push_back({node.op, node.value, node.index, lhs, rhs});
  return static_cast<int>(tape.size()) - 1;
}

std::string print(const Expr::Node& node) {
  switch (node.op) {
    case Op::Const: return format_number(node.value);
    case Op::Time: return "t";
    case Op::State: return "x" + std::to_string(node.index);
    case Op::Rate: return "xd" + std::to_string(node.index);
    case Op::Accel: return "xdd" + std::to_string(node.index);
    case Op::Add: return "(" + print(*node.lhs) + " + " + print(*node.rhs) + ")";
    case Op::Sub: return "(" + print(*node.lhs) + " - " + print(*node.rhs) + ")";
    case Op::Mul: return "(" + print(*node.lhs) + " * " + print(*node.rhs) + ")";
    case Op::Div: return "(" + print(*node.lhs) + " / " + print(*node.rhs) + ")";
    case Op::Pow: return "(" + print(*node.lhs) + ")^" + std::to_string(node.index);
    case Op::Neg: return "-(" + print(*node.lhs) + ")";
    case Op::Sin: return "sin(" + print(*node.lhs) + ")";
    case Op::Cos: return "cos(" + print(*node.lhs) + ")";
    case Op::Exp: return "exp(" + print(*node.lhs) + ")";
    case Op::Sqrt: return "sqrt(" + print(*node.lhs) + ")";
  }
  return {};
}

double int_power(double base, int k) {
  if (k < 0) {
    if (base == 0.0) throw EvalError("division by zero in negative power");
    return 1.0 / int_power(base, -k);
  }
  double result = 1.0;
  for (int i = 0; i < k; ++i) result *= base;
  return result;
}

// Runs the tape. With grad_width > 0, slot i's gradient lives in
// grads[i*grad_width ...].
double run_tape(const std::vector<Expr::Instr>& tape, const EvalPoint& p, int dim, std::vector<double>& vals,
                std::vector<double>& grads, int grad_width) {
  const std::size_t len = tape.size();
  vals.resize(len);
  if (grad_width > 0) grads.assign(len * static_cast<std::size_t>(grad_width), 0.0);
  for (std::size_t i = 0; i < len; ++i) {
    const Expr::Instr& in = tape[i];
    double* gi = grad_width > 0 ? &grads[i * grad_width] : nullptr;
    const double a = in.lhs >= 0 ? vals[in.lhs] : 0.0;
    const double b = in.rhs >= 0 ? vals[in.rhs] : 0.0;
    const double* ga = (gi && in.lhs >= 0) ? &grads[in.lhs * grad_width] : nullptr;
    const double* gb = (gi && in.rhs >= 0) ? &grads[in.rhs * grad_width] : nullptr;
    double v = 0.0;
    switch (in.op) {
      case Op::Const: v = in.value; break;
      case Op::Time: v = p.t; break;
      case Op::State:
        v = p.x[in.index];
        if (gi) gi[in.index] = 1.0;
        break;
      case Op::Rate:
        v = p.xd[in.index];
        if (gi) gi[dim + in.index] = 1.0;
        break;
      case Op::Accel:
        v = p.xdd[in.index];
        if (gi) gi[2 * dim + in.index] = 1.0;
        break;
      case Op::Add:
        v = a + b;
        if (gi)
          for (int j = 0; j < grad_width; ++j) gi[j] = ga[j] + gb[j];
        break;
      case Op::Sub:
        v = a - b;
        if (gi)
          for (int j = 0; j < grad_width; ++j) gi[j] = ga[j] - gb[j];
        break;
      case Op::Mul:
        v = a * b;
        if (gi)
          for (int j = 0; j < grad_width; ++j) gi[j] = ga[j] * b + a * gb[j];
        break;
      case Op::Div:
        if (b == 0.0) throw EvalError("division by zero");
        v = a / b;
        if (gi)
          for (int j = 0; j < grad_width; ++j) gi[j] = (ga[j] - v * gb[j]) / b;
        break;
      case Op::Pow: {
        v = int_power(a, in.index);
        if (gi) {
          const double d = in.index == 0 ? 0.0 : in.index * int_power(a, in.index - 1);
          for (int j = 0; j < grad_width; ++j) gi[j] = d * ga[j];
        }
        break;
      }
      case Op::Neg:
        v = -a;
        if (gi)
          for (int j = 0; j < grad_width; ++j) gi[j] = -ga[j];
        break;
      case Op::Sin:
        v = std::sin(a);
        if (gi) {
          const double d = std::cos(a);
          for (int j = 0; j < grad_width; ++j) gi[j] = d * ga[j];
        }
        break;
      case Op::Cos:
        v = std::cos(a);
        if (gi) {
          const double d = -std::sin(a);
          for (int j = 0; j < grad_width; ++j) gi[j] = d * ga[j];
        }
        break;
      case Op::Exp:
        v = std::exp(a);
        if (gi)
          for (int j = 0; j < grad_width; ++j) gi[j] = v * ga[j];
        break;
      case Op::Sqrt:
        if (a < 0.0) throw EvalError("sqrt of negative value " + format_number(a));
        v = std::sqrt(a);
        if (gi) {
          if (v == 0.0) throw EvalError("sqrt is not differentiable at 0");
          const double d = 0.5 / v;
          for (int j = 0; j < grad_width; ++j) gi[j] = d * ga[j];
        }
        break;
    }
    vals[i] = v;
  }
  return vals[len - 1];
}

void check_point(const EvalPoint& p, int dim) {
  if (static_cast<int>(p.x.size()) != dim || static_cast<int>(p.xd.size()) != dim ||
      static_cast<int>(p.xdd.size()) != dim)
    throw LengthMismatch("evaluation point does not match expression dimension " + std::to_string(dim));
}

thread_local std::vector<double> tl_vals;
thread_local std::vector<double> tl_grads;

}  // namespace

Expr::Expr(std::shared_ptr<const Node> root, int dim) : root_(std::move(root)), dim_(dim) {
  auto tape = std::make_shared<std::vector<Instr>>();
  compile(*root_, *tape, kinds_);
  tape_ = std::move(tape);
}

Expr Expr::parse(std::string_view text, int dim) {
  if (dim < 1) throw DomainError("expression dimension must be at least 1");
  return Expr(Parser(text, dim).parse(), dim);
}

bool Expr::references(VarKind kind) const { return (kinds_ >> static_cast<unsigned>(kind)) & 1u; }

double Expr::evaluate(const EvalPoint& p) const {
  check_point(p, dim_);
  return run_tape(*tape_, p, dim_, tl_vals, tl_grads, 0);
}

double Expr::evaluate_with_gradient(const EvalPoint& p, std::span<double> gradient) const {
  check_point(p, dim_);
  const int width = 3 * dim_;
  if (static_cast<int>(gradient.size()) != width) throw LengthMismatch("gradient buffer must hold 3*dim entries");
  const double v = run_tape(*tape_, p, dim_, tl_vals, tl_grads, width);
  const double* last = &tl_grads[(tape_->size() - 1) * width];
  for (int j = 0; j < width; ++j) gradient[j] = last[j];
  return v;
}

Partials Expr::partials(const EvalPoint& p) const {
  std::vector<double> g(3 * dim_);
  Partials out;
  out.value = evaluate_with_gradient(p, g);
  out.dx = Eigen::Map<const Eigen::VectorXd>(g.data(), dim_);
  out.dxd = Eigen::Map<const Eigen::VectorXd>(g.data() + dim_, dim_);
  out.dxdd = Eigen::Map<const Eigen::VectorXd>(g.data() + 2 * dim_, dim_);
  return out;
}

std::string Expr::to_string() const { return print(*root_); }

}  // namespace mixdual
