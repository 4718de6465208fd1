#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "sparse_lsq/linalg.hpp"
#include "sparse_lsq/sampling.hpp"

namespace sparse_lsq {

enum class Mode { deterministic, randomized };

const char* to_string(Mode mode);

struct SparseSolution {
  Index dim = 0;
  std::vector<std::pair<Index, double>> nonzeros;  // strictly increasing indices
  Index budget_r = 0;

  Vector densify() const;
  // Stored entries whose value is not exactly zero.
  Index nonzero_count() const;
  bool operator==(const SparseSolution&) const = default;
};

struct SolveConfig {
  Index k = 1;
  double epsilon = 0.25;  // in (0, 1/2)
  Mode mode = Mode::deterministic;
  std::optional<std::uint64_t> seed;
  std::optional<Index> r_override;

  void validate() const;
};

// Failure probability used by the randomized analysis. Fixed: changing it
// changes the 0.7 success probability of the randomized bound.
inline constexpr double kFailureProbability = 0.1;

// ceil(9k / eps^2)
Index deterministic_budget(Index k, double epsilon);
// ceil(36 k ln(20k) / eps^2)
Index randomized_budget(Index k, double epsilon);
// ceil(4 k ln(2k/delta) / eps^2)
Index concentration_budget(Index k, double epsilon, double delta);

struct SolveResult {
  SparseSolution solution;
  SamplingPlan plan;  // merged: one column per distinct index
};

SolveResult solve_deterministic(const Matrix& a, const Vector& b, const SolveConfig& cfg);
SolveResult solve_randomized(const Matrix& a, const Vector& b, const SolveConfig& cfg);
// Dispatches on cfg.mode.
SolveResult solve(const Matrix& a, const Vector& b, const SolveConfig& cfg);

// Embeds x_r (one entry per distinct plan column) into R^n, folding the plan's
// scales into the values so that A * densify(x) == (A Omega S) * x_r.
SparseSolution scatter(const Vector& x_r, const SamplingPlan& plan, Index n);

struct Baselines {
  Vector x_star;    // A^+ b
  Vector x_k_star;  // A_k^+ b
};

Baselines solve_baselines(const Matrix& a, const Vector& b, Index k);

// x_r = C^+ b for C = A Omega S, with the plan merged first.
Vector sampled_least_squares(const Matrix& a, const Vector& b, const SamplingPlan& plan);

}  // namespace sparse_lsq
