#include "mixdual/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <random>
#include <sstream>

#include "mixdual/dual.hpp"
#include "mixdual/errors.hpp"
#include "mixdual/invexity.hpp"
#include "mixdual/recovery.hpp"

namespace mixdual {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

double parse_real(std::string_view key, std::string_view text) {
  const std::string s = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    throw ConfigError("config: '" + std::string(key) + "' expects a real number, got '" + s + "'");
  return v;
}

template <typename Int>
Int parse_int(std::string_view key, std::string_view text) {
  const std::string s = trim(text);
  Int v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw ConfigError("config: '" + std::string(key) + "' expects an integer, got '" + s + "'");
  return v;
}

std::string join(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? "," : "") + format_double(values[i]);
  return out;
}

}  // namespace

void ExperimentConfig::set(std::string_view raw_key, std::string_view raw_value) {
  const std::string key = trim(raw_key);
  const std::string value = trim(raw_value);
  if (key == "problem") {
    problem = value;
  } else if (key == "grid") {
    grid = parse_int<int>(key, value);
  } else if (key == "partition") {
    partition = value;
  } else if (key == "mode") {
    mode = value;
  } else if (key == "tol") {
    tol = parse_real(key, value);
  } else if (key == "seed") {
    seed = parse_int<std::uint64_t>(key, value);
  } else if (key == "out") {
    out = value;
  } else if (key == "weights") {
    weights.clear();
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) weights.push_back(parse_real(key, item));
  } else if (key == "pairs") {
    pairs = parse_int<int>(key, value);
  } else if (key == "invexity_pairs") {
    invexity_pairs = parse_int<int>(key, value);
  } else if (key == "frontier_points") {
    frontier_points = parse_int<int>(key, value);
  } else if (key == "static_pairs") {
    static_pairs = parse_int<int>(key, value);
  } else if (key == "efficiency_tol") {
    efficiency_tol = parse_real(key, value);
  } else if (key == "solver.tol") {
    solver.tol = parse_real(key, value);
  } else if (key == "solver.feas_tol") {
    solver.feas_tol = parse_real(key, value);
  } else if (key == "solver.max_outer") {
    solver.max_outer = parse_int<int>(key, value);
  } else if (key == "solver.max_inner") {
    solver.max_inner = parse_int<int>(key, value);
  } else if (key == "solver.mu0") {
    solver.mu0 = parse_real(key, value);
  } else {
    throw ConfigError("config: unknown key '" + key + "'");
  }
}

void ExperimentConfig::apply_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    set(std::string_view(line).substr(0, eq), std::string_view(line).substr(eq + 1));
  }
}

void ExperimentConfig::validate() const {
  if (std::find(experiment_modes().begin(), experiment_modes().end(), mode) == experiment_modes().end())
    throw ConfigError("config: unknown mode '" + mode + "'");
  if (grid < 5) throw ConfigError("config: grid must be at least 5");
  if (!(tol > 0.0)) throw ConfigError("config: tol must be positive");
  if (pairs < 1 || invexity_pairs < 1 || frontier_points < 1 || static_pairs < 1)
    throw ConfigError("config: sample counts must be positive");
  if (!(efficiency_tol > 0.0)) throw ConfigError("config: efficiency_tol must be positive");
  if (!(solver.tol > 0.0) || !(solver.feas_tol > 0.0) || !(solver.mu0 > 0.0))
    throw ConfigError("config: solver tolerances must be positive");
  if (solver.max_outer < 1 || solver.max_inner < 1) throw ConfigError("config: solver iteration limits must be positive");
  if (out.empty()) throw ConfigError("config: out must not be empty");
}

std::string ExperimentConfig::echo() const {
  std::string s;
  auto line = [&](const std::string& k, const std::string& v) { s += k + " = " + v + "\n"; };
  line("problem", problem);
  line("grid", std::to_string(grid));
  line("partition", partition);
  line("mode", mode);
  line("tol", format_double(tol));
  line("seed", std::to_string(seed));
  line("out", out);
  line("weights", join(weights));
  line("pairs", std::to_string(pairs));
  line("invexity_pairs", std::to_string(invexity_pairs));
  line("frontier_points", std::to_string(frontier_points));
  line("static_pairs", std::to_string(static_pairs));
  line("efficiency_tol", format_double(efficiency_tol));
  line("solver.tol", format_double(solver.tol));
  line("solver.feas_tol", format_double(solver.feas_tol));
  line("solver.max_outer", std::to_string(solver.max_outer));
  line("solver.max_inner", std::to_string(solver.max_inner));
  line("solver.mu0", format_double(solver.mu0));
  return s;
}

ProblemSpec resolve_problem(const std::string& problem, const std::vector<CatalogEntry>& registry) {
  for (const auto& e : registry)
    if (e.name == problem) return ProblemSpec::parse(e.text);
  if (std::filesystem::is_regular_file(problem)) return ProblemSpec::load(problem);
  throw ConfigError("unknown problem '" + problem + "' (not in the catalog and not a file)");
}

std::string list_problems(const std::vector<CatalogEntry>& registry, bool csv) {
  std::string out = csv ? "name,n,p,m,boundary,note\n" : "";
  for (const auto& e : registry) {
    const ProblemSpec s = ProblemSpec::parse(e.text);
    if (csv) {
      out += csv_field(s.name) + "," + std::to_string(s.n) + "," + std::to_string(s.p) + "," + std::to_string(s.m) +
             "," + to_string(s.boundary) + "," + csv_field(s.note) + "\n";
    } else {
      char buf[160];
      std::snprintf(buf, sizeof buf, "%-6s n=%d p=%d m=%d %-10s %s\n", s.name.c_str(), s.n, s.p, s.m,
                    to_string(s.boundary).c_str(), s.note.c_str());
      out += buf;
    }
  }
  return out;
}

namespace {

// Dominance within tol: a is no worse everywhere and strictly better somewhere.
bool dominates(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double tol) {
  return (a.array() <= b.array() + tol).all() && (a.array() < b.array() - tol).any();
}

class Runner {
 public:
  Runner(const ExperimentConfig& cfg, ProblemSpec spec)
      : cfg_(cfg), spec_(std::move(spec)), grid_(make_grid(spec_.a, spec_.b, cfg.grid)), part_(resolve_partition()) {
    weights_ = Eigen::VectorXd::Constant(spec_.p, 1.0 / spec_.p);
    if (!cfg.weights.empty()) {
      if (static_cast<int>(cfg.weights.size()) != spec_.p) throw ConfigError("config: weights need p entries");
      weights_ = Eigen::Map<const Eigen::VectorXd>(cfg.weights.data(), spec_.p);
      if (weights_.minCoeff() <= 0.0 || std::abs(weights_.sum() - 1.0) > 1e-12)
        throw ConfigError("config: weights must be positive and sum to one");
    }
    if (cfg.mode == "static" && !spec_.is_static())
      throw ConfigError("config: static mode needs a problem without t, xd or xdd");
    if (cfg.mode == "static" && spec_.n > 2) throw ConfigError("config: static brute force supports n <= 2");
  }

  ExperimentOutput run() {
    add_line("problem: " + spec_.name + " (n=" + std::to_string(spec_.n) + " p=" + std::to_string(spec_.p) +
             " m=" + std::to_string(spec_.m) + " " + to_string(spec_.boundary) + ")");
    add_line("partition: " + part_.to_string() + " (" + to_string(classify(part_)) + ")");
    add_line("weights: " + join(std::vector<double>(weights_.data(), weights_.data() + weights_.size())));
    add_line("grid: " + std::to_string(cfg_.grid));

    const std::string& mode = cfg_.mode;
    const bool all = mode == "all";
    try {
      if (mode != "frontier" && mode != "static") {
        if (!solve_base()) return finish();
      }
      if (all || mode == "strong") run_strong();
      if (all || mode == "weak") run_weak();
      if (all || mode == "converse") run_converse();
      if (all || mode == "invexity") run_invexity();
      if (all || mode == "frontier") run_frontier();
      if (mode == "static" || (all && spec_.is_static() && spec_.n <= 2)) run_static();
    } catch (const RecoveryFailed& e) {
      fail_check(std::string("recovery failed: ") + e.what());
    } catch (const NotEfficient& e) {
      fail_check(std::string("not efficient: ") + e.what());
    } catch (const InfeasibleInput& e) {
      fail_check(std::string("infeasible input: ") + e.what());
    } catch (const Error& e) {
      solver_failed_ = true;
      add_line(std::string("FAIL numerical error: ") + e.what());
    }
    return finish();
  }

  ExperimentConfig effective() const {
    ExperimentConfig e = cfg_;
    e.partition = part_.to_string();
    e.weights.assign(weights_.data(), weights_.data() + weights_.size());
    return e;
  }

 private:
  Partition resolve_partition() const {
    if (!cfg_.partition.empty()) return Partition::parse(cfg_.partition, spec_.m);
    std::vector<int> rest;
    for (int j = 1; j < spec_.m; ++j) rest.push_back(j);
    if (rest.empty()) return Partition(spec_.m, {{0}});
    return Partition(spec_.m, {{0}, rest});
  }

  void add_line(const std::string& s) { summary_ += s + "\n"; }

  void fail_check(const std::string& why) {
    check_failed_ = true;
    add_line("FAIL " + why);
  }

  void record(const std::string& file, const Report& report) {
    if (!report.passed()) check_failed_ = true;
    summary_ += report.summary();
    output_.files.emplace_back(file, report.to_csv());
  }

  bool solve_base() {
    const SolveResult r = solve_weighted(spec_, grid_, weights_, std::nullopt, cfg_.solver);
    char buf[200];
    std::snprintf(buf, sizeof buf, "solve: status=%s kkt=%.3e violation=%.3e outer=%d inner=%d",
                  to_string(r.status).c_str(), r.kkt_residual, r.max_violation, r.iterations, r.inner_iterations);
    add_line(buf);
    std::string csv = "node,t";
    for (int c = 0; c < spec_.n; ++c) csv += ",x" + std::to_string(c);
    for (int j = 0; j < spec_.m; ++j) csv += ",multiplier" + std::to_string(j + 1);
    csv += "\n";
    for (int k = 0; k < grid_->size(); ++k) {
      csv += std::to_string(k) + "," + format_double(grid_->node(k));
      for (int c = 0; c < spec_.n; ++c) csv += "," + format_double(r.x.x.values()(k, c));
      for (int j = 0; j < spec_.m; ++j) csv += "," + format_double(r.multipliers(k, j));
      csv += "\n";
    }
    output_.files.emplace_back("solution.csv", csv);
    if (r.status != SolveStatus::Converged) {
      solver_failed_ = true;
      add_line("FAIL solver did not converge");
      return false;
    }
    base_.emplace(r);
    return true;
  }

  RecoveryOptions recovery_options() const {
    RecoveryOptions o;
    o.solver = cfg_.solver;
    return o;
  }

  const RecoveryResult& recovered() {
    if (!recovery_) {
      recovery_.emplace(recover_multipliers(spec_, base_->x, part_, cfg_.tol, recovery_options()));
      output_.files.emplace_back("recovery.csv", recovery_->to_csv());
    }
    return *recovery_;
  }

  void run_strong() {
    record("efficiency.csv", efficiency_check(spec_, base_->x, cfg_.efficiency_tol, cfg_.solver));
    record("strong.csv", strong_duality_check(spec_, part_, recovered(), cfg_.tol));
    if (spec_.boundary == BoundaryKind::Natural)
      record("transversality.csv", transversality_residual(spec_, part_, recovered().dual_point, 1e-3));
  }

  // Invexity hypotheses of weak duality at the recovered point.
  std::vector<Certificate> hypotheses(int pairs) {
    const DualPoint& dp = recovered().dual_point;
    CertifyOptions o;
    o.pairs = pairs;
    o.seed = cfg_.seed;
    o.anchor = dp.u.x;
    std::vector<Certificate> certs;
    const EtaKernel eta = difference_kernel();
    certs.push_back(certify_pseudoinvex(FunctionalSpec::combined(spec_, part_, dp), eta, o));
    for (int alpha = 1; alpha <= part_.r(); ++alpha)
      certs.push_back(certify_quasiinvex(FunctionalSpec::partition(spec_, part_, alpha, dp), eta, o));
    return certs;
  }

  void run_weak() {
    const DualPoint& dp = recovered().dual_point;
    bool hypotheses_hold = true;
    for (const auto& c : hypotheses(cfg_.invexity_pairs)) hypotheses_hold &= c.passed;

    std::mt19937_64 rng(cfg_.seed);
    std::string csv = "sample,dominated";
    for (int i = 0; i < spec_.p; ++i) csv += ",delta" + std::to_string(i + 1);
    csv += "\n";
    int found = 0;
    int violations = 0;
    double worst = -std::numeric_limits<double>::infinity();
    for (int attempt = 0; attempt < 50 * cfg_.pairs && found < cfg_.pairs; ++attempt) {
      const double amplitude = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      const PrimalPoint x(sample_trajectory(grid_, spec_.n, spec_.boundary, rng, amplitude));
      if (!primal_feasibility(spec_, x, cfg_.solver.feas_tol).passed()) continue;
      const Report r = weak_duality_check(spec_, part_, x, dp, 1e-6, cfg_.tol);
      const bool dominated = !r.at("dominance").passed;
      violations += dominated;
      csv += std::to_string(found) + "," + (dominated ? "1" : "0");
      Eigen::VectorXd delta(spec_.p);
      for (int i = 0; i < spec_.p; ++i) {
        delta[i] = r.at("delta." + std::to_string(i + 1)).value;
        csv += "," + format_double(delta[i]);
      }
      worst = std::max(worst, -delta.maxCoeff());
      csv += "\n";
      ++found;
    }
    output_.files.emplace_back("weak_samples.csv", csv);
    Report report("weak_duality");
    report.add_lower("feasible_samples", found, cfg_.pairs);
    Check& v = report.add_upper("violations", violations, 0,
                                hypotheses_hold ? "invexity hypotheses hold on samples"
                                                : "invexity hypotheses fail; violations are informational");
    v.gating = hypotheses_hold;
    record("weak.csv", report);
  }

  void run_converse() {
    record("converse.csv", converse_duality_check(spec_, part_, recovered().dual_point, cfg_.tol));
  }

  void run_invexity() {
    const DualPoint& dp = recovered().dual_point;
    std::vector<Certificate> certs = hypotheses(cfg_.invexity_pairs);
    CertifyOptions o;
    o.pairs = cfg_.invexity_pairs;
    o.seed = cfg_.seed;
    o.anchor = dp.u.x;
    Certificate invex = certify_invex(FunctionalSpec::combined(spec_, part_, dp), difference_kernel(), o);
    std::string csv = Certificate::csv_header();
    Report report("invexity");
    for (const auto& c : certs) {
      csv += c.csv_row();
      Check& k = report.add_upper(to_string(c.kind) + "." + c.functional_id, c.worst_violation, kInvexityTolerance,
                                  c.witness_seed ? "witness_seed=" + std::to_string(*c.witness_seed) +
                                                       (c.witness_confirmed ? " confirmed" : " unconfirmed")
                                                 : "");
      (void)k;
    }
    csv += invex.csv_row();
    Check& k = report.add_upper("invex.combined", invex.worst_violation, kInvexityTolerance);
    k.gating = false;
    output_.files.emplace_back("certificates.csv", csv);
    record("invexity.csv", report);
  }

  void run_frontier() {
    const SweepResult sweep = pareto_sweep(spec_, grid_, simplex_weights(spec_.p, cfg_.frontier_points), cfg_.solver);
    std::string csv = "point";
    for (int i = 0; i < spec_.p; ++i) csv += ",weight" + std::to_string(i + 1);
    for (int i = 0; i < spec_.p; ++i) csv += ",objective" + std::to_string(i + 1);
    csv += ",status,kkt\n";
    for (std::size_t q = 0; q < sweep.points.size(); ++q) {
      csv += std::to_string(q);
      for (int i = 0; i < spec_.p; ++i) csv += "," + format_double(sweep.point_weights[q][i]);
      for (int i = 0; i < spec_.p; ++i) csv += "," + format_double(sweep.points[q].objective[i]);
      csv += "," + to_string(sweep.points[q].status) + "," + format_double(sweep.points[q].kkt_residual) + "\n";
    }
    output_.files.emplace_back("frontier_points.csv", csv);
    int dominated = 0;
    for (const auto& a : sweep.points)
      for (const auto& b : sweep.points) dominated += dominates(a.objective, b.objective, cfg_.solver.tol);
    Report report("frontier");
    Check& d = report.add_lower("distinct_points", static_cast<double>(sweep.points.size()), 1);
    d.gating = false;
    report.add_upper("dominated_pairs", dominated, 0);
    report.add_upper("failed_solves", static_cast<double>(sweep.errors.size()), 0,
                     sweep.errors.empty() ? "" : sweep.errors.front());
    record("frontier.csv", report);
  }

  void run_static() {
    const StaticPair pair(spec_);
    const int n = spec_.n;
    // Brute force over [-2, 2]^n with step 0.01.
    const int steps = 401;
    std::vector<Eigen::VectorXd> xs;
    std::vector<Eigen::VectorXd> fs;
    std::vector<int> idx(n, 0);
    for (;;) {
      Eigen::VectorXd x(n);
      for (int c = 0; c < n; ++c) x[c] = -2.0 + 0.01 * idx[c];
      if (pair.primal_feasible(x, 0.0)) {
        xs.push_back(x);
        fs.push_back(pair.primal(x));
      }
      int c = 0;
      while (c < n && ++idx[c] == steps) idx[c++] = 0;
      if (c == n) break;
    }
    // Non-dominated filter: sort by the first objective, then keep points
    // not dominated by any kept point.
    std::vector<std::size_t> order(xs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      for (int i = 0; i < spec_.p; ++i)
        if (fs[a][i] != fs[b][i]) return fs[a][i] < fs[b][i];
      return a < b;
    });
    std::vector<std::size_t> efficient;
    for (std::size_t i : order) {
      bool dom = false;
      for (std::size_t k : efficient)
        if (dominates(fs[k], fs[i], 0.0)) {
          dom = true;
          break;
        }
      if (!dom) efficient.push_back(i);
    }

    // Solver points: weights including the simplex vertices.
    std::vector<Eigen::VectorXd> wgrid;
    for (int i = 0; i < spec_.p; ++i) wgrid.push_back(Eigen::VectorXd::Unit(spec_.p, i));
    for (const auto& w : simplex_weights(spec_.p, cfg_.frontier_points)) wgrid.push_back(w);
    const GridPtr small = make_grid(spec_.a, spec_.b, 5);
    std::string csv = "point,distance";
    for (int c = 0; c < n; ++c) csv += ",x" + std::to_string(c);
    csv += "\n";
    double worst_distance = 0.0;
    int failed = 0;
    std::vector<StaticDualPoint> duals;
    for (std::size_t q = 0; q < wgrid.size(); ++q) {
      const SolveResult r = solve_weighted(spec_, small, wgrid[q], std::nullopt, cfg_.solver);
      if (r.status != SolveStatus::Converged) {
        ++failed;
        continue;
      }
      const Eigen::VectorXd x = r.x.x.values().row(0).transpose();
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t k : efficient) best = std::min(best, (xs[k] - x).norm());
      worst_distance = std::max(worst_distance, best);
      csv += std::to_string(q) + "," + format_double(best);
      for (int c = 0; c < n; ++c) csv += "," + format_double(x[c]);
      csv += "\n";
      if (wgrid[q].minCoeff() > 0.0) {
        // Dual point from the solver's multiplier estimates at one node.
        StaticDualPoint dp;
        dp.u = x;
        dp.y = r.multipliers.row(2).transpose();
        for (int i = 0; i < spec_.p; ++i) dp.z.push_back(recover_z(x, spec_.B[i]));
        dp.lambda = wgrid[q];
        duals.push_back(dp);
      }
    }
    output_.files.emplace_back("static_points.csv", csv);

    // Weak duality over random feasible primal points and the dual points.
    std::mt19937_64 rng(cfg_.seed);
    auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53); };
    int violations = 0;
    int tested = 0;
    double worst_dual = 0.0;
    for (const auto& dp : duals) worst_dual = std::max(worst_dual, pair.stationarity(dp).norm());
    for (int attempt = 0; attempt < 100 * cfg_.static_pairs && tested < cfg_.static_pairs && !duals.empty();
         ++attempt) {
      Eigen::VectorXd x(n);
      for (int c = 0; c < n; ++c) x[c] = uniform(-2.0, 2.0);
      if (!pair.primal_feasible(x, 0.0)) continue;
      const StaticDualPoint& dp = duals[rng() % duals.size()];
      const Eigen::VectorXd delta = pair.primal(x) - pair.dual_objective(part_, dp);
      violations += delta.maxCoeff() <= 1e-6 && delta.minCoeff() < -1e-6;
      ++tested;
    }

    Report report("static");
    report.add_upper("max_distance", worst_distance, 0.02,
                     std::to_string(efficient.size()) + " brute-force efficient points");
    report.add_upper("failed_solves", failed, 0);
    report.add_upper("dual_stationarity", worst_dual, cfg_.tol);
    report.add_lower("weak_pairs", tested, cfg_.static_pairs);
    report.add_upper("weak_violations", violations, 0);
    record("static.csv", report);
  }

  ExperimentOutput finish() {
    if (solver_failed_) {
      output_.exit_code = kExitSolverFailure;
    } else if (check_failed_) {
      output_.exit_code = kExitCheckFailed;
    } else {
      output_.exit_code = kExitOk;
    }
    add_line(std::string("result: ") + (output_.exit_code == kExitOk ? "PASS" : "FAIL") +
             " (exit " + std::to_string(output_.exit_code) + ")");
    output_.summary = summary_;
    return std::move(output_);
  }

  const ExperimentConfig& cfg_;
  ProblemSpec spec_;
  GridPtr grid_;
  Partition part_;
  Eigen::VectorXd weights_;
  std::optional<SolveResult> base_;
  std::optional<RecoveryResult> recovery_;
  ExperimentOutput output_;
  std::string summary_;
  bool check_failed_ = false;
  bool solver_failed_ = false;
};

}  // namespace

ExperimentOutput run_experiment(const ExperimentConfig& config, const std::vector<CatalogEntry>& registry) {
  ExperimentOutput out;
  std::optional<Runner> runner;
  try {
    config.validate();
    runner.emplace(config, resolve_problem(config.problem, registry));
  } catch (const Error& e) {
    out.exit_code = kExitConfigError;
    out.summary = std::string("configuration error: ") + e.what() + "\n";
    out.files.emplace_back("config.echo", config.echo());
    return out;
  }
  out = runner->run();
  out.files.insert(out.files.begin(), {"config.echo", runner->effective().echo()});
  return out;
}

void write_output(const ExperimentConfig& config, const ExperimentOutput& output) {
  const std::filesystem::path dir(config.out);
  std::filesystem::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + (dir / name).string());
    f << text;
  };
  write("summary.txt", output.summary);
  for (const auto& [name, text] : output.files) write(name, text);
}

}  // namespace mixdual
