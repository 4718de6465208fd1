#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sparse_lsq/linalg.hpp"
#include "sparse_lsq/sampling.hpp"
#include "sparse_lsq/solver.hpp"

namespace sparse_lsq {

// asserted: a failure is a real violation.
// informational: measured outside the regime where the inequality is promised
// (e.g. r overridden below the theorem's budget).
// not_applicable: a precondition of the inequality does not hold.
enum class BoundStatus { asserted, informational, not_applicable };

const char* to_string(BoundStatus status);
BoundStatus bound_status_from_string(const std::string& s);

// An inequality chain lhs <= step_1 <= step_2 <= ... . Each step records
// whether dominance over the previous value is promised at these parameters.
struct ProofTrace {
  struct Step {
    std::string label;
    double value = 0.0;
    bool asserted = true;
    bool operator==(const Step&) const = default;
  };
  std::string name;
  std::vector<Step> steps;

  void add(std::string label, double value, bool asserted = true);
  // Label of the first asserted step smaller than its predecessor, if any.
  std::optional<std::string> first_violation(const Tolerance& tol = {}) const;
  bool dominance_holds(const Tolerance& tol = {}) const { return !first_violation(tol); }
  bool operator==(const ProofTrace&) const = default;
};

struct BoundReport {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // rhs - lhs
  bool holds = false;
  BoundStatus status = BoundStatus::asserted;
  std::map<std::string, double> terms;    // named pieces of lhs/rhs
  std::map<std::string, double> context;  // m, n, k, r, epsilon, ...
  std::optional<std::uint64_t> seed;
  std::vector<ProofTrace> traces;
  std::vector<BoundReport> details;  // per-seed / per-trial breakdowns
  std::string note;

  // Sets margin and holds from lhs/rhs.
  void settle(const Tolerance& tol = {});
  // False only for an asserted report whose inequality (or trace) failed.
  bool passed() const;
  bool operator==(const BoundReport&) const = default;
};

// SVD pieces of A shared by the evaluators.
struct RankSplit {
  SvdFactorization svd;
  Index k = 0;
  Matrix u_k;      // m x k
  Vector sigma_k;  // k
  Matrix v_k;      // n x k
  Matrix e;        // A - A_k
  Vector x_k_star;
  double truncated_residual = 0.0;  // ||A x_k* - b||

  static RankSplit compute(const Matrix& a, const Vector& b, Index k);
};

// sigma_k(M) > 1e-10 sigma_1(M) and M has at least k columns.
bool has_full_row_rank(const Matrix& m, Index k);

enum class NormKind { spectral, frobenius };
const char* to_string(NormKind kind);
double matrix_norm(const Matrix& a, NormKind kind);

// ||A x_r - b|| <= ||A x_k* - b|| + ||(A - A_k) Omega S (V_k^T Omega S)^+ Sigma_k^{-1} U_k^T b||
// with x_r rebuilt from the plan. not_applicable when V_k^T Omega S has rank < k.
BoundReport structural_bound(const Matrix& a, const Vector& b, Index k, const SamplingPlan& plan);

// ||B - C C^+ B|| <= ||B - H H^+ B|| + ||E Omega S (Z^T Omega S)^+ H^+ B|| for
// A = H Z^T + E and C = A Omega S. z must have orthonormal columns.
BoundReport generalized_bound(const Matrix& b_target, const Matrix& h, const Matrix& z,
                              const Matrix& e, const SamplingPlan& plan, NormKind norm);

// Deterministic bound with (1+eps) additive factor plus the four-step trace.
// Asserted when the run used r >= ceil(9k/eps^2); informational otherwise,
// in which case only the steps that do not depend on r are asserted.
BoundReport theorem1_report(const Matrix& a, const Vector& b, Index k, double epsilon,
                            const SparseSolution& solution, const SamplingPlan& plan);

// Aggregate of per-seed randomized bounds. Passes when the success rate is at
// least 0.7 - 2 sqrt(0.21 / seeds). Needs at least 50 seeds.
BoundReport theorem2_report(const Matrix& a, const Vector& b, Index k, double epsilon,
                            const std::vector<SolveResult>& runs,
                            const std::vector<std::uint64_t>& seeds);

// Solves once per seed (in parallel) and reports as above.
BoundReport theorem2_monte_carlo(const Matrix& a, const Vector& b, Index k, double epsilon,
                                 const std::vector<std::uint64_t>& seeds,
                                 std::optional<Index> r_override = std::nullopt);

inline constexpr std::size_t kMinTheorem2Seeds = 50;

// Monte Carlo check of the leverage-sampling guarantees: concentration,
// pseudo-inverse perturbation, Frobenius expectation, its Markov corollary and
// the matrix-multiplication bound. epsilon defaults to the smallest value the
// concentration hypothesis allows at this r: sqrt(4k ln(2k/delta) / r).
// Trial t uses Rng(seed, t).
std::vector<BoundReport> lemma_suite(const Matrix& v_t, const Matrix& e, Index k, Index r,
                                     std::size_t trials, std::uint64_t seed,
                                     std::optional<double> epsilon = std::nullopt);

// 2-sigma binomial slack for an observed rate at the given trial count.
double binomial_slack(double p, std::size_t trials);

}  // namespace sparse_lsq
