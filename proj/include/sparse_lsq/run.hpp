#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sparse_lsq/io.hpp"
#include "sparse_lsq/report.hpp"
#include "sparse_lsq/solver.hpp"

namespace sparse_lsq {

enum class Suite { structural, theorem1, theorem2, lemmas };

const char* to_string(Suite suite);
// "all" expands to every suite.
std::set<Suite> parse_suites(const std::string& text);

struct RunSpec {
  std::optional<std::filesystem::path> matrix_path;
  std::optional<std::filesystem::path> vector_path;
  std::optional<std::string> generator;  // KEY=VAL list for SyntheticSpec::parse
  Index k = 1;
  double epsilon = 0.25;
  Mode mode = Mode::deterministic;
  std::optional<std::uint64_t> seed;
  std::optional<Index> r_override;
  std::set<Suite> suites{Suite::structural};
  std::vector<Index> frontier;  // non-empty: emit the CSV frontier instead of a report
  std::size_t trials = 200;     // seeds for theorem2, trials for the lemma suite
  std::optional<std::filesystem::path> out_path;

  // Throws InputError for inconsistent combinations.
  void validate() const;
  SolveConfig solve_config() const;
};

enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitInput = 2,
  kExitInvariant = 3,
};

struct Problem {
  Matrix a;
  Vector b;
};

Problem load_problem(const RunSpec& spec);

// Builds the report for spec (no error mapping, no output).
RunReport build_report(const RunSpec& spec, const Problem& problem);

struct FrontierRow {
  Index r = 0;
  double residual = 0.0;
  std::optional<double> bound_rhs;  // structural bound rhs; empty when not applicable
};

// Sorted, deduplicated r values; duplicates are reported through `warnings`.
std::vector<FrontierRow> frontier(const RunSpec& spec, const Problem& problem,
                                  std::vector<std::string>* warnings = nullptr);
void write_frontier_csv(std::ostream& out, const std::vector<FrontierRow>& rows);

// Full CLI behaviour: loads inputs, runs, writes JSON (or CSV) to out_path or
// `out`, writes diagnostics to `err`, and returns the documented exit code.
int run(const RunSpec& spec, std::ostream& out, std::ostream& err);

}  // namespace sparse_lsq
