#include "mixdual/problem.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "mixdual/errors.hpp"

namespace mixdual {

std::string to_string(BoundaryKind kind) { return kind == BoundaryKind::FixedZero ? "fixed_zero" : "natural"; }

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

int parse_int(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != value.size() || value.empty()) throw ConfigError("problem: '" + key + "' expects an integer");
  return v;
}

double parse_real(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != value.size() || value.empty()) throw ConfigError("problem: '" + key + "' expects a real number");
  return v;
}

Eigen::MatrixXd parse_matrix(const std::string& key, const std::string& value) {
  std::vector<std::vector<double>> rows;
  std::stringstream rs(value);
  std::string row;
  while (std::getline(rs, row, ';')) {
    std::vector<double> entries;
    std::stringstream es(row);
    std::string entry;
    while (std::getline(es, entry, ',')) entries.push_back(parse_real(key, trim(entry)));
    rows.push_back(std::move(entries));
  }
  if (rows.empty()) throw ConfigError("problem: '" + key + "' is empty");
  Eigen::MatrixXd M(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) throw ConfigError("problem: '" + key + "' has ragged rows");
    for (std::size_t j = 0; j < rows[i].size(); ++j) M(i, j) = rows[i][j];
  }
  return M;
}

// Splits "f.3" into ("f", 3).
bool indexed_key(const std::string& key, std::string& family, int& index) {
  const auto dot = key.find('.');
  if (dot == std::string::npos) return false;
  family = key.substr(0, dot);
  const std::string digits = key.substr(dot + 1);
  if (digits.empty() || !std::all_of(digits.begin(), digits.end(), ::isdigit)) return false;
  index = std::stoi(digits);
  return true;
}

std::string matrix_text(const Eigen::MatrixXd& M) {
  std::string out;
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    if (i) out += "; ";
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      if (j) out += ",";
      out += format_double(M(i, j));
    }
  }
  return out;
}

}  // namespace

ProblemSpec ProblemSpec::parse(std::string_view text) {
  std::map<std::string, std::string> plain;
  std::map<int, std::string> f_text, g_text, b_text;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) throw ConfigError("problem line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(std::string_view(stripped).substr(0, eq));
    const std::string value = trim(std::string_view(stripped).substr(eq + 1));
    std::string family;
    int index = 0;
    if (indexed_key(key, family, index)) {
      auto* target = family == "f" ? &f_text : family == "g" ? &g_text : family == "B" ? &b_text : nullptr;
      if (!target) throw ConfigError("problem line " + std::to_string(line_no) + ": unknown key '" + key + "'");
      if (!target->emplace(index, value).second) throw ConfigError("problem: duplicate key '" + key + "'");
    } else {
      static const char* known[] = {"name", "note", "n", "p", "m", "a", "b", "boundary"};
      if (std::find(std::begin(known), std::end(known), key) == std::end(known))
        throw ConfigError("problem line " + std::to_string(line_no) + ": unknown key '" + key + "'");
      if (!plain.emplace(key, value).second) throw ConfigError("problem: duplicate key '" + key + "'");
    }
  }

  ProblemSpec spec;
  for (const char* required : {"n", "p", "m", "boundary"})
    if (!plain.count(required)) throw ConfigError(std::string("problem: missing key '") + required + "'");
  spec.name = plain.count("name") ? plain["name"] : "unnamed";
  spec.note = plain.count("note") ? plain["note"] : "";
  spec.n = parse_int("n", plain["n"]);
  spec.p = parse_int("p", plain["p"]);
  spec.m = parse_int("m", plain["m"]);
  if (plain.count("a")) spec.a = parse_real("a", plain["a"]);
  if (plain.count("b")) spec.b = parse_real("b", plain["b"]);
  const std::string& boundary = plain["boundary"];
  if (boundary == "fixed_zero") {
    spec.boundary = BoundaryKind::FixedZero;
  } else if (boundary == "natural") {
    spec.boundary = BoundaryKind::Natural;
  } else {
    throw ConfigError("problem: boundary must be fixed_zero or natural, got '" + boundary + "'");
  }
  if (spec.n < 1 || spec.p < 1 || spec.m < 1) throw ConfigError("problem: n, p, m must all be at least 1");

  auto collect = [&](const std::map<int, std::string>& texts, int count, const char* family) {
    std::vector<Expr> out;
    for (int i = 1; i <= count; ++i) {
      auto it = texts.find(i);
      if (it == texts.end()) throw ConfigError("problem: missing " + std::string(family) + "." + std::to_string(i));
      out.push_back(Expr::parse(it->second, spec.n));
    }
    if (static_cast<int>(texts.size()) != count || texts.rbegin()->first != count)
      throw ConfigError("problem: unexpected " + std::string(family) + ".* index");
    return out;
  };
  spec.f = collect(f_text, spec.p, "f");
  spec.g = collect(g_text, spec.m, "g");
  for (int i = 1; i <= spec.p; ++i) {
    auto it = b_text.find(i);
    spec.B.push_back(it == b_text.end() ? Eigen::MatrixXd::Zero(spec.n, spec.n)
                                        : parse_matrix("B." + std::to_string(i), it->second));
  }
  for (const auto& [i, _] : b_text)
    if (i < 1 || i > spec.p) throw ConfigError("problem: B." + std::to_string(i) + " has no objective");
  spec.validate();
  return spec;
}

ProblemSpec ProblemSpec::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open problem file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string ProblemSpec::to_text() const {
  std::ostringstream os;
  os << "name = " << name << '\n';
  if (!note.empty()) os << "note = " << note << '\n';
  os << "n = " << n << "\np = " << p << "\nm = " << m << '\n';
  os << "a = " << format_double(a) << "\nb = " << format_double(b) << '\n';
  os << "boundary = " << to_string(boundary) << '\n';
  for (int i = 0; i < p; ++i) os << "f." << i + 1 << " = " << f[i].to_string() << '\n';
  for (int i = 0; i < p; ++i) os << "B." << i + 1 << " = " << matrix_text(B[i]) << '\n';
  for (int j = 0; j < m; ++j) os << "g." << j + 1 << " = " << g[j].to_string() << '\n';
  return os.str();
}

void ProblemSpec::validate() const {
  if (n < 1 || p < 1 || m < 1) throw DomainError("problem: n, p, m must all be at least 1");
  if (!(b > a)) throw DomainError("problem: need b > a");
  if (static_cast<int>(f.size()) != p || static_cast<int>(B.size()) != p || static_cast<int>(g.size()) != m)
    throw DomainError("problem: expression counts do not match p and m");
  for (const auto& e : f)
    if (e.dim() != n) throw DomainError("problem: objective dimension mismatch");
  for (const auto& e : g)
    if (e.dim() != n) throw DomainError("problem: constraint dimension mismatch");
  for (int i = 0; i < p; ++i) {
    if (B[i].rows() != n || B[i].cols() != n)
      throw DomainError("problem: B." + std::to_string(i + 1) + " must be " + std::to_string(n) + "x" +
                        std::to_string(n));
    if ((B[i] - B[i].transpose()).cwiseAbs().maxCoeff() > 1e-12)
      throw DomainError("problem: B." + std::to_string(i + 1) + " is not symmetric");
    if (!psd_check(B[i], 1e-10)) throw DomainError("problem: B." + std::to_string(i + 1) + " is not PSD");
  }
}

bool ProblemSpec::references(VarKind kind) const {
  for (const auto& e : f)
    if (e.references(kind)) return true;
  for (const auto& e : g)
    if (e.references(kind)) return true;
  return false;
}

bool ProblemSpec::is_static() const {
  return !references(VarKind::Time) && !references(VarKind::Rate) && !references(VarKind::Accel);
}

PrimalPoint::PrimalPoint(Trajectory traj)
    : x(std::move(traj)), xd(derivative(x)), xdd(derivative(xd)) {}

IntegrandSamples sample_integrand(const Expr& e, const PrimalPoint& pt) {
  const int N = pt.x.size();
  const int n = pt.x.dim();
  if (e.dim() != n) throw LengthMismatch("integrand dimension does not match trajectory");
  IntegrandSamples s{Eigen::VectorXd(N), Eigen::MatrixXd(N, n), Eigen::MatrixXd(N, n), Eigen::MatrixXd(N, n)};
  std::vector<double> x(n), xd(n), xdd(n), grad(3 * n);
  for (int k = 0; k < N; ++k) {
    for (int c = 0; c < n; ++c) {
      x[c] = pt.x.values()(k, c);
      xd[c] = pt.xd.values()(k, c);
      xdd[c] = pt.xdd.values()(k, c);
    }
    s.value[k] = e.evaluate_with_gradient({pt.grid().node(k), x, xd, xdd}, grad);
    for (int c = 0; c < n; ++c) {
      s.dx(k, c) = grad[c];
      s.dxd(k, c) = grad[n + c];
      s.dxdd(k, c) = grad[2 * n + c];
    }
  }
  return s;
}

Eigen::VectorXd sample_values(const Expr& e, const PrimalPoint& pt) {
  const int N = pt.x.size();
  const int n = pt.x.dim();
  if (e.dim() != n) throw LengthMismatch("integrand dimension does not match trajectory");
  Eigen::VectorXd out(N);
  std::vector<double> x(n), xd(n), xdd(n);
  for (int k = 0; k < N; ++k) {
    for (int c = 0; c < n; ++c) {
      x[c] = pt.x.values()(k, c);
      xd[c] = pt.xd.values()(k, c);
      xdd[c] = pt.xdd.values()(k, c);
    }
    out[k] = e.evaluate({pt.grid().node(k), x, xd, xdd});
  }
  return out;
}

double sqrt_term(const Eigen::VectorXd& v, const Eigen::MatrixXd& B) {
  return std::sqrt(std::max(0.0, v.dot(B * v)));
}

Eigen::VectorXd primal_objective(const ProblemSpec& spec, const PrimalPoint& pt) {
  if (pt.x.dim() != spec.n) throw LengthMismatch("primal point dimension does not match problem");
  Eigen::VectorXd out(spec.p);
  const int N = pt.x.size();
  for (int i = 0; i < spec.p; ++i) {
    Eigen::VectorXd integrand = sample_values(spec.f[i], pt);
    for (int k = 0; k < N; ++k) integrand[k] += sqrt_term(pt.x.values().row(k).transpose(), spec.B[i]);
    out[i] = integrate(integrand, pt.grid());
  }
  return out;
}

Report primal_feasibility(const ProblemSpec& spec, const PrimalPoint& pt, double tol) {
  Report report("primal_feasibility");
  double worst = -std::numeric_limits<double>::infinity();
  int worst_j = 0, worst_k = 0;
  for (int j = 0; j < spec.m; ++j) {
    const Eigen::VectorXd gv = sample_values(spec.g[j], pt);
    Eigen::Index k = 0;
    const double mx = gv.maxCoeff(&k);
    if (mx > worst) {
      worst = mx;
      worst_j = j;
      worst_k = static_cast<int>(k);
    }
  }
  report.add_upper("constraint_max", worst, tol,
                   "g." + std::to_string(worst_j + 1) + " at node " + std::to_string(worst_k) + " (t=" +
                       format_double(pt.grid().node(worst_k)) + ")");
  if (spec.boundary == BoundaryKind::FixedZero) {
    const int last = pt.x.size() - 1;
    report.add_upper("x(a)", pt.x.values().row(0).cwiseAbs().maxCoeff(), tol);
    report.add_upper("x(b)", pt.x.values().row(last).cwiseAbs().maxCoeff(), tol);
    report.add_upper("xd(a)", pt.xd.values().row(0).cwiseAbs().maxCoeff(), tol);
    report.add_upper("xd(b)", pt.xd.values().row(last).cwiseAbs().maxCoeff(), tol);
  }
  return report;
}

bool psd_check(const Eigen::MatrixXd& B, double tol) {
  if (B.rows() != B.cols()) throw NonSquare("psd_check: matrix is not square");
  if (B.size() == 0) return true;
  if ((B - B.transpose()).cwiseAbs().maxCoeff() > tol) return false;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(B, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff() >= -tol;
}

}  // namespace mixdual
