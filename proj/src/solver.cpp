#include "sparse_lsq/solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sparse_lsq/errors.hpp"

namespace sparse_lsq {

namespace {

// Budget formulas are exact rationals in the theory; shave rounding noise
// (e.g. 9 / 0.3^2 = 100.00000000000001) before taking the ceiling.
Index ceil_budget(double value) {
  return static_cast<Index>(std::ceil(value * (1.0 - 1e-12)));
}

void check_problem(const Matrix& a, const Vector& b) {
  require_finite(a, "A");
  require_finite(b, "b");
  if (a.rows() != b.size()) {
    throw DimensionError("A has " + std::to_string(a.rows()) + " rows but b has " +
                         std::to_string(b.size()) + " entries");
  }
}

void check_rank(const SvdFactorization& f, Index k) {
  if (k < 1 || k >= f.numerical_rank) {
    throw RankError("k=" + std::to_string(k) + " must satisfy 0 < k < rank(A)=" +
                    std::to_string(f.numerical_rank));
  }
}

SolveResult finish(const Matrix& a, const Vector& b, SamplingPlan plan, Index budget) {
  plan = plan.merged();
  const Vector x_r = sampled_least_squares(a, b, plan);
  SolveResult out;
  out.solution = scatter(x_r, plan, a.cols());
  out.solution.budget_r = budget;
  out.plan = std::move(plan);
  return out;
}

}  // namespace

const char* to_string(Mode mode) {
  return mode == Mode::deterministic ? "det" : "rand";
}

Vector SparseSolution::densify() const {
  Vector x = Vector::Zero(dim);
  for (const auto& [i, value] : nonzeros) x(i) = value;
  return x;
}

Index SparseSolution::nonzero_count() const {
  return static_cast<Index>(std::count_if(nonzeros.begin(), nonzeros.end(),
                                          [](const auto& nz) { return nz.second != 0.0; }));
}

void SolveConfig::validate() const {
  if (k < 1) throw ConfigError("k must be at least 1");
  if (!(epsilon > 0.0 && epsilon < 0.5)) {
    throw ConfigError("epsilon must lie in (0, 1/2), got " + std::to_string(epsilon));
  }
  if (r_override && *r_override < 1) throw BudgetError("r override must be positive");
  if (mode == Mode::randomized && !seed) {
    throw ConfigError("randomized mode requires an explicit seed");
  }
}

Index deterministic_budget(Index k, double epsilon) {
  return ceil_budget(9.0 * static_cast<double>(k) / (epsilon * epsilon));
}

Index randomized_budget(Index k, double epsilon) {
  const double kk = static_cast<double>(k);
  return ceil_budget(36.0 * kk * std::log(20.0 * kk) / (epsilon * epsilon));
}

Index concentration_budget(Index k, double epsilon, double delta) {
  const double kk = static_cast<double>(k);
  return ceil_budget(4.0 * kk * std::log(2.0 * kk / delta) / (epsilon * epsilon));
}

Vector sampled_least_squares(const Matrix& a, const Vector& b, const SamplingPlan& plan) {
  plan.validate();
  const SamplingPlan distinct = plan.has_repeats() ? plan.merged() : plan;
  return pseudo_inverse_apply(svd(distinct.apply(a)), b);
}

SparseSolution scatter(const Vector& x_r, const SamplingPlan& plan, Index n) {
  if (plan.source_dim != n) throw DimensionError("plan was built for a different column count");
  if (x_r.size() != plan.size()) {
    throw DimensionError("x_r has " + std::to_string(x_r.size()) + " entries but the plan has " +
                         std::to_string(plan.size()) + " columns");
  }
  if (plan.has_repeats()) throw PreconditionError("scatter needs a merged plan");

  SparseSolution s;
  s.dim = n;
  s.budget_r = plan.size();
  s.nonzeros.reserve(plan.selected.size());
  for (std::size_t t = 0; t < plan.selected.size(); ++t) {
    s.nonzeros.emplace_back(plan.selected[t], plan.scales[t] * x_r(static_cast<Index>(t)));
  }
  std::sort(s.nonzeros.begin(), s.nonzeros.end());
  return s;
}

SolveResult solve_deterministic(const Matrix& a, const Vector& b, const SolveConfig& cfg) {
  check_problem(a, b);
  SolveConfig c = cfg;
  c.mode = Mode::deterministic;
  c.validate();

  const SvdFactorization f = svd(a);
  check_rank(f, c.k);
  const Index r = c.r_override.value_or(deterministic_budget(c.k, c.epsilon));
  if (r > a.cols() || r <= c.k) {
    throw BudgetError("deterministic budget r=" + std::to_string(r) + " must satisfy k < r <= n=" +
                      std::to_string(a.cols()) + "; pass an r override");
  }

  const Matrix v_k = f.v.leftCols(c.k);
  const Matrix e = a - a * v_k * v_k.transpose();
  return finish(a, b, deterministic_sampling(v_k.transpose(), e, r), r);
}

SolveResult solve_randomized(const Matrix& a, const Vector& b, const SolveConfig& cfg) {
  check_problem(a, b);
  SolveConfig c = cfg;
  c.mode = Mode::randomized;
  c.validate();

  const SvdFactorization f = svd(a);
  check_rank(f, c.k);
  const Index r = c.r_override.value_or(randomized_budget(c.k, c.epsilon));

  Rng rng(*c.seed);
  const Matrix v_t = f.v.leftCols(c.k).transpose();
  return finish(a, b, random_sampling(v_t, r, rng), r);
}

SolveResult solve(const Matrix& a, const Vector& b, const SolveConfig& cfg) {
  return cfg.mode == Mode::deterministic ? solve_deterministic(a, b, cfg)
                                         : solve_randomized(a, b, cfg);
}

Baselines solve_baselines(const Matrix& a, const Vector& b, Index k) {
  check_problem(a, b);
  const SvdFactorization f = svd(a);
  check_rank(f, k);
  return {pseudo_inverse_apply(f, b), truncated_solution(f, k, b)};
}

}  // namespace sparse_lsq
