#include "sparse_lsq/run.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <ostream>
#include <sstream>

#include "sparse_lsq/errors.hpp"

namespace sparse_lsq {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

nlohmann::json config_echo(const RunSpec& spec) {
  nlohmann::json c;
  c["k"] = spec.k;
  c["epsilon"] = spec.epsilon;
  c["mode"] = to_string(spec.mode);
  c["seed"] = spec.seed ? nlohmann::json(*spec.seed) : nlohmann::json(nullptr);
  c["r_override"] = spec.r_override ? nlohmann::json(*spec.r_override) : nlohmann::json(nullptr);
  c["trials"] = spec.trials;
  nlohmann::json suites = nlohmann::json::array();
  for (Suite s : spec.suites) suites.push_back(to_string(s));
  c["suites"] = std::move(suites);
  if (spec.generator) {
    c["input"] = {{"generate", *spec.generator}};
  } else {
    c["input"] = {{"matrix", spec.matrix_path->string()}, {"vector", spec.vector_path->string()}};
  }
  return c;
}

std::vector<std::uint64_t> seed_range(std::uint64_t first, std::size_t count) {
  std::vector<std::uint64_t> seeds(count);
  for (std::size_t i = 0; i < count; ++i) seeds[i] = first + i;
  return seeds;
}

}  // namespace

const char* to_string(Suite suite) {
  switch (suite) {
    case Suite::structural: return "structural";
    case Suite::theorem1: return "theorem1";
    case Suite::theorem2: return "theorem2";
    case Suite::lemmas: return "lemmas";
  }
  return "structural";
}

std::set<Suite> parse_suites(const std::string& text) {
  std::set<Suite> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "all") {
      out.insert({Suite::structural, Suite::theorem1, Suite::theorem2, Suite::lemmas});
    } else if (item == "structural") {
      out.insert(Suite::structural);
    } else if (item == "theorem1") {
      out.insert(Suite::theorem1);
    } else if (item == "theorem2") {
      out.insert(Suite::theorem2);
    } else if (item == "lemmas") {
      out.insert(Suite::lemmas);
    } else {
      throw ConfigError("unknown suite '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError("no suite selected");
  return out;
}

void RunSpec::validate() const {
  const bool files = matrix_path || vector_path;
  if (files && generator) throw ConfigError("--matrix/--vector and --generate are exclusive");
  if (!files && !generator) throw ConfigError("provide --matrix and --vector, or --generate");
  if (files && !(matrix_path && vector_path)) {
    throw ConfigError("--matrix and --vector must be given together");
  }
  const bool needs_seed = mode == Mode::randomized || suites.contains(Suite::theorem2) ||
                          suites.contains(Suite::lemmas);
  if (needs_seed && !seed) {
    throw ConfigError("randomized runs require --seed for reproducibility");
  }
  if (suites.contains(Suite::theorem2) && trials < kMinTheorem2Seeds) {
    throw ConfigError("the theorem2 suite needs at least " + std::to_string(kMinTheorem2Seeds) +
                      " trials");
  }
  solve_config().validate();
}

SolveConfig RunSpec::solve_config() const {
  SolveConfig cfg;
  cfg.k = k;
  cfg.epsilon = epsilon;
  cfg.mode = mode;
  cfg.seed = seed;
  cfg.r_override = r_override;
  return cfg;
}

Problem load_problem(const RunSpec& spec) {
  if (spec.generator) {
    SyntheticProblem p = generate(SyntheticSpec::parse(*spec.generator));
    return {std::move(p.a), std::move(p.b)};
  }
  auto [a, b] = ingest(*spec.matrix_path, *spec.vector_path);
  return {std::move(a), std::move(b)};
}

RunReport build_report(const RunSpec& spec, const Problem& problem) {
  const auto start = Clock::now();
  const Matrix& a = problem.a;
  const Vector& b = problem.b;

  RunReport rep;
  rep.config = config_echo(spec);
  rep.m = a.rows();
  rep.n = a.cols();

  auto t0 = Clock::now();
  const RankSplit split = RankSplit::compute(a, b, spec.k);
  rep.rank = split.svd.numerical_rank;
  rep.baseline_residual = residual_norm(a, pseudo_inverse_apply(split.svd, b), b);
  rep.truncated_residual = split.truncated_residual;
  rep.timings_ms["svd"] = elapsed_ms(t0);

  t0 = Clock::now();
  const SolveConfig cfg = spec.solve_config();
  const SolveResult main_run = solve(a, b, cfg);
  rep.timings_ms["solve"] = elapsed_ms(t0);
  rep.sparse_residual = residual_norm(a, main_run.solution.densify(), b);
  rep.nonzero_count = main_run.solution.nonzero_count();
  rep.budget_r = main_run.solution.budget_r;
  for (const auto& [i, value] : main_run.solution.nonzeros) {
    rep.support.push_back(i);
    rep.values.push_back(value);
  }

  if (spec.suites.contains(Suite::structural)) {
    t0 = Clock::now();
    rep.reports.push_back(structural_bound(a, b, spec.k, main_run.plan));
    rep.timings_ms["structural"] = elapsed_ms(t0);
  }
  if (spec.suites.contains(Suite::theorem1)) {
    t0 = Clock::now();
    SolveResult det = main_run;
    if (spec.mode != Mode::deterministic) {
      SolveConfig det_cfg = cfg;
      det_cfg.mode = Mode::deterministic;
      det = solve_deterministic(a, b, det_cfg);
    }
    rep.reports.push_back(theorem1_report(a, b, spec.k, spec.epsilon, det.solution, det.plan));
    rep.timings_ms["theorem1"] = elapsed_ms(t0);
  }
  if (spec.suites.contains(Suite::theorem2)) {
    t0 = Clock::now();
    rep.reports.push_back(theorem2_monte_carlo(a, b, spec.k, spec.epsilon,
                                               seed_range(*spec.seed, spec.trials),
                                               spec.r_override));
    rep.timings_ms["theorem2"] = elapsed_ms(t0);
  }
  if (spec.suites.contains(Suite::lemmas)) {
    t0 = Clock::now();
    const Index r = spec.r_override.value_or(
        concentration_budget(spec.k, spec.epsilon, kFailureProbability));
    const std::optional<double> eps =
        spec.r_override ? std::nullopt : std::optional<double>(spec.epsilon);
    for (auto& report :
         lemma_suite(split.v_k.transpose(), split.e, spec.k, r, spec.trials, *spec.seed, eps)) {
      rep.reports.push_back(std::move(report));
    }
    rep.timings_ms["lemmas"] = elapsed_ms(t0);
  }

  rep.ok = std::all_of(rep.reports.begin(), rep.reports.end(),
                       [](const BoundReport& r) { return r.passed(); });
  rep.timings_ms["total"] = elapsed_ms(start);
  return rep;
}

std::vector<FrontierRow> frontier(const RunSpec& spec, const Problem& problem,
                                  std::vector<std::string>* warnings) {
  std::vector<Index> rs = spec.frontier;
  std::sort(rs.begin(), rs.end());
  const auto dup = std::unique(rs.begin(), rs.end());
  if (dup != rs.end() && warnings) {
    warnings->push_back("frontier: dropped " + std::to_string(rs.end() - dup) +
                        " duplicate r value(s)");
  }
  rs.erase(dup, rs.end());

  const Index n = problem.a.cols();
  for (Index r : rs) {
    if (r < spec.k || r > n) {
      throw BudgetError("frontier r=" + std::to_string(r) + " must satisfy k <= r <= n=" +
                        std::to_string(n));
    }
  }

  std::vector<FrontierRow> rows;
  rows.reserve(rs.size());
  for (Index r : rs) {
    SolveConfig cfg = spec.solve_config();
    cfg.r_override = r;
    const SolveResult run = solve(problem.a, problem.b, cfg);
    FrontierRow row;
    row.r = r;
    row.residual = residual_norm(problem.a, run.solution.densify(), problem.b);
    const BoundReport s = structural_bound(problem.a, problem.b, spec.k, run.plan);
    if (s.status != BoundStatus::not_applicable) row.bound_rhs = s.rhs;
    rows.push_back(row);
  }
  return rows;
}

void write_frontier_csv(std::ostream& out, const std::vector<FrontierRow>& rows) {
  out << "r,residual,bound_rhs\n";
  for (const auto& row : rows) {
    out << row.r << ',' << format_real(row.residual) << ',';
    if (row.bound_rhs) out << format_real(*row.bound_rhs);
    out << '\n';
  }
}

int run(const RunSpec& spec, std::ostream& out, std::ostream& err) {
  try {
    spec.validate();
    const Problem problem = load_problem(spec);

    std::string payload;
    bool ok = true;
    if (!spec.frontier.empty()) {
      std::vector<std::string> warnings;
      const auto rows = frontier(spec, problem, &warnings);
      for (const auto& w : warnings) err << "warning: " << w << '\n';
      std::ostringstream csv;
      write_frontier_csv(csv, rows);
      payload = csv.str();
    } else {
      const RunReport report = build_report(spec, problem);
      ok = report.ok;
      payload = emit(report);
      for (const auto& r : report.reports) {
        if (!r.passed()) err << "invariant violated: " << r.name << '\n';
      }
    }

    if (spec.out_path) {
      std::ofstream file(*spec.out_path, std::ios::binary);
      if (!file) throw InputError("cannot write '" + spec.out_path->string() + "'");
      file << payload;
    } else {
      out << payload;
    }
    return ok ? kExitOk : kExitInvariant;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace sparse_lsq
