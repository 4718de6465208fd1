#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "sparse_lsq/bounds.hpp"
#include "sparse_lsq/errors.hpp"

using namespace sparse_lsq;

namespace {

SamplingPlan full_plan(Index n) {
  SamplingPlan p;
  p.source_dim = n;
  for (Index i = 0; i < n; ++i) {
    p.selected.push_back(i);
    p.scales.push_back(1.0);
  }
  return p;
}

SamplingPlan random_subset_plan(Index n, Index r, unsigned seed) {
  std::mt19937 gen(seed);
  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  std::shuffle(idx.begin(), idx.end(), gen);
  std::uniform_real_distribution<double> scale(0.5, 2.0);
  SamplingPlan p;
  p.source_dim = n;
  for (Index t = 0; t < r; ++t) {
    p.selected.push_back(idx[static_cast<std::size_t>(t)]);
    p.scales.push_back(scale(gen));
  }
  return p;
}

SolveConfig config(Index k, double eps, Mode mode, std::optional<Index> r,
                   std::optional<std::uint64_t> seed = std::nullopt) {
  SolveConfig c;
  c.k = k;
  c.epsilon = eps;
  c.mode = mode;
  c.r_override = r;
  c.seed = seed;
  return c;
}

const BoundReport& find(const std::vector<BoundReport>& reports, const std::string& name) {
  for (const auto& r : reports)
    if (r.name == name) return r;
  throw std::runtime_error("missing report " + name);
}

}  // namespace

TEST(ProofTrace, FirstViolation) {
  ProofTrace t;
  t.add("start", 1.0);
  t.add("up", 2.0);
  EXPECT_TRUE(t.dominance_holds());
  t.add("down", 1.5);
  EXPECT_EQ(t.first_violation(), "down");
  ProofTrace u;
  u.add("start", 1.0);
  u.add("unchecked", 0.5, false);
  EXPECT_TRUE(u.dominance_holds());
}

TEST(BoundReport, SettleAndPassed) {
  BoundReport r;
  r.lhs = 1.0;
  r.rhs = 1.0 - 1e-12;
  r.settle();
  EXPECT_TRUE(r.holds);  // inside rtol
  EXPECT_DOUBLE_EQ(r.margin, r.rhs - r.lhs);
  r.rhs = 0.9;
  r.settle();
  EXPECT_FALSE(r.holds);
  EXPECT_FALSE(r.passed());
  r.status = BoundStatus::informational;
  EXPECT_TRUE(r.passed());
  EXPECT_EQ(bound_status_from_string(to_string(BoundStatus::not_applicable)),
            BoundStatus::not_applicable);
}

TEST(StructuralBound, FullSamplingKillsSecondTerm) {
  const Matrix a = oracle::random_matrix(20, 15, 1);
  const Vector b = oracle::random_vector(20, 2);
  const BoundReport r = structural_bound(a, b, 3, full_plan(15));
  ASSERT_EQ(r.status, BoundStatus::asserted);
  EXPECT_NEAR(r.terms.at("sampling_term"), 0.0, 1e-10);
  EXPECT_NEAR(r.lhs, (a * oracle::normal_equations(a, b) - b).norm(), 1e-10);
  EXPECT_TRUE(r.holds);
}

TEST(StructuralBound, RightHandSideInTopSubspace) {
  const Matrix a = oracle::with_spectrum(12, 8, {5, 3, 2, 1, 0.5}, 3);
  const RankSplit split = RankSplit::compute(a, Vector::Ones(12), 2);
  const Vector b = split.u_k * Vector{{1.5, -0.7}};
  const BoundReport r = structural_bound(a, b, 2, full_plan(8));
  EXPECT_NEAR(r.lhs, 0.0, 1e-10);
  EXPECT_NEAR(r.terms.at("truncated_residual"), 0.0, 1e-10);
  EXPECT_TRUE(r.holds);
}

TEST(StructuralBound, RandomPlanHoldsWithMargin) {
  const Matrix a = oracle::random_matrix(20, 15, 4);
  const Vector b = oracle::random_vector(20, 5);
  for (unsigned seed = 0; seed < 10; ++seed) {
    const BoundReport r = structural_bound(a, b, 3, random_subset_plan(15, 10, 100 + seed));
    ASSERT_EQ(r.status, BoundStatus::asserted);
    EXPECT_TRUE(r.holds) << "seed " << seed;
    EXPECT_GT(r.margin, 0.0);
    EXPECT_NEAR(r.rhs, r.terms.at("truncated_residual") + r.terms.at("sampling_term"), 1e-12);
    // The second term is a vector, so its 2-norm and Frobenius forms agree.
    EXPECT_LE(r.terms.at("sampling_term_form_gap"), 1e-12 * std::max(1.0, r.terms.at("sampling_term")));
  }
}

TEST(StructuralBound, RankDeficientPlanIsNotApplicable) {
  const Matrix a = oracle::random_matrix(10, 8, 6);
  const BoundReport r = structural_bound(a, oracle::random_vector(10, 7), 3,
                                         SamplingPlan{8, {0, 1}, {1.0, 1.0}});
  EXPECT_EQ(r.status, BoundStatus::not_applicable);
  EXPECT_TRUE(r.passed());
}

TEST(StructuralBound, HoldsOnSolverPlans) {
  const Matrix a = oracle::with_spectrum(30, 20, {10, 6, 3, 1, 0.5, 0.2, 0.1}, 8);
  const Vector b = oracle::random_vector(30, 9);
  for (Index r : {5, 10, 20}) {
    const SolveResult det = solve(a, b, config(2, 0.3, Mode::deterministic, r));
    EXPECT_TRUE(structural_bound(a, b, 2, det.plan).passed());
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const SolveResult rnd = solve(a, b, config(2, 0.3, Mode::randomized, r, seed));
      EXPECT_TRUE(structural_bound(a, b, 2, rnd.plan).passed()) << "r " << r << " seed " << seed;
    }
  }
}

TEST(GeneralizedBound, ReducesToRankKApproximation) {
  const Matrix a = oracle::random_matrix(12, 9, 10);
  const RankSplit split = RankSplit::compute(a, Vector::Zero(12), 3);
  const Matrix h = split.u_k * split.sigma_k.asDiagonal();
  for (NormKind norm : {NormKind::spectral, NormKind::frobenius}) {
    const BoundReport r = generalized_bound(a, h, split.v_k, split.e, full_plan(9), norm);
    EXPECT_NEAR(r.terms.at("sampling_term"), 0.0, 1e-10);
    EXPECT_NEAR(r.terms.at("factor_residual"), matrix_norm(split.e, norm), 1e-10);
    EXPECT_TRUE(r.holds);
  }
}

TEST(GeneralizedBound, SingleColumnMatchesStructural) {
  const Matrix a = oracle::random_matrix(18, 12, 11);
  const Vector b = oracle::random_vector(18, 12);
  const RankSplit split = RankSplit::compute(a, b, 3);
  const Matrix h = split.u_k * split.sigma_k.asDiagonal();
  for (unsigned seed = 0; seed < 5; ++seed) {
    const SamplingPlan plan = random_subset_plan(12, 7, 200 + seed);
    const BoundReport s = structural_bound(a, b, 3, plan);
    for (NormKind norm : {NormKind::spectral, NormKind::frobenius}) {
      const BoundReport g = generalized_bound(b, h, split.v_k, split.e, plan, norm);
      auto close = [](double x, double y) { return std::abs(x - y) <= 1e-12 * std::max(1.0, std::abs(y)); };
      EXPECT_TRUE(close(g.lhs, s.lhs)) << g.lhs << " vs " << s.lhs;
      EXPECT_TRUE(close(g.terms.at("factor_residual"), s.terms.at("truncated_residual")));
      EXPECT_TRUE(close(g.terms.at("sampling_term"), s.terms.at("sampling_term")));
    }
  }
}

TEST(GeneralizedBound, RandomTargetsBothNorms) {
  for (unsigned seed = 0; seed < 10; ++seed) {
    const Matrix a = oracle::random_matrix(15, 11, 300 + seed);
    const Matrix target = oracle::random_matrix(15, 4, 400 + seed);
    const RankSplit split = RankSplit::compute(a, Vector::Zero(15), 2);
    const Matrix h = split.u_k * split.sigma_k.asDiagonal();
    const SamplingPlan plan = random_subset_plan(11, 5, 500 + seed);
    for (NormKind norm : {NormKind::spectral, NormKind::frobenius}) {
      const BoundReport r = generalized_bound(target, h, split.v_k, split.e, plan, norm);
      ASSERT_EQ(r.status, BoundStatus::asserted);
      EXPECT_TRUE(r.holds) << "seed " << seed << " " << to_string(norm);
    }
  }
}

TEST(GeneralizedBound, Preconditions) {
  const Matrix a = oracle::random_matrix(8, 6, 13);
  const RankSplit split = RankSplit::compute(a, Vector::Zero(8), 2);
  const Matrix h = split.u_k * split.sigma_k.asDiagonal();
  EXPECT_THROW(generalized_bound(a, h, 2.0 * split.v_k, split.e, full_plan(6), NormKind::spectral),
               PreconditionError);
  const BoundReport r =
      generalized_bound(a, h, split.v_k, split.e, SamplingPlan{6, {0}, {1.0}}, NormKind::frobenius);
  EXPECT_EQ(r.status, BoundStatus::not_applicable);
}

TEST(Theorem1, NearlyRankKResidualVanishes) {
  // k < rank(A) is required, so E = 0 is approached with a 1e-9 tail.
  const Matrix a = oracle::with_spectrum(40, 30, {4, 2, 1e-9}, 14);
  const Vector b = oracle::random_vector(40, 15);
  const SolveResult det = solve(a, b, config(2, 0.45, Mode::deterministic, 20));
  const BoundReport r = theorem1_report(a, b, 2, 0.45, det.solution, det.plan);
  EXPECT_LT(r.terms.at("additive_term"), 1e-7);
  EXPECT_LE(r.lhs, r.terms.at("truncated_residual") + 1e-7);
  EXPECT_TRUE(r.holds);
}

TEST(Theorem1, RightHandSideOrthogonalToRange) {
  const Matrix a = oracle::random_matrix(20, 8, 16);
  const RankSplit split = RankSplit::compute(a, Vector::Zero(20), 2);
  Vector b = oracle::random_vector(20, 17);
  b -= split.svd.u * (split.svd.u.transpose() * b);
  const SolveResult det = solve(a, b, config(2, 0.3, Mode::deterministic, 6));
  const BoundReport r = theorem1_report(a, b, 2, 0.3, det.solution, det.plan);
  EXPECT_NEAR(r.lhs, b.norm(), 1e-10);
  EXPECT_NEAR(r.terms.at("truncated_residual"), b.norm(), 1e-10);
  EXPECT_TRUE(r.holds);
}

TEST(Theorem1, DecayingSpectrumInstance) {
  const Matrix a = oracle::with_spectrum(30, 20, {10, 5, 2.5, 1.2, 0.6, 0.3, 0.15, 0.08}, 18);
  const Vector b = oracle::random_vector(30, 19);
  const SolveResult det = solve(a, b, config(2, 0.3, Mode::deterministic, 18));
  const BoundReport r = theorem1_report(a, b, 2, 0.3, det.solution, det.plan);
  EXPECT_EQ(r.status, BoundStatus::informational);  // 18 < ceil(9*2/0.09)
  EXPECT_TRUE(r.holds);
  ASSERT_EQ(r.traces.size(), 1u);
  const ProofTrace& t = r.traces[0];
  ASSERT_EQ(t.steps.size(), 5u);
  EXPECT_FALSE(t.steps.back().asserted);
  EXPECT_TRUE(t.dominance_holds());
  EXPECT_LE(r.terms.at("rhs_inverse_form"), r.terms.at("rhs_squared_inverse_form"));
}

TEST(Theorem1, TheoremRegimeIsAsserted) {
  const Matrix a = oracle::with_spectrum(40, 60, {6, 3, 1.5, 0.7, 0.3}, 20);
  const Vector b = oracle::random_vector(40, 21);
  const SolveResult det = solve(a, b, config(1, 0.45, Mode::deterministic, std::nullopt));
  ASSERT_EQ(det.solution.budget_r, 45);
  const BoundReport r = theorem1_report(a, b, 1, 0.45, det.solution, det.plan);
  EXPECT_EQ(r.status, BoundStatus::asserted);
  EXPECT_TRUE(r.passed());
  EXPECT_TRUE(r.traces.at(0).steps.back().asserted);
}

TEST(Theorem1, RejectsMismatchedSolution) {
  const Matrix a = oracle::random_matrix(10, 8, 22);
  const Vector b = oracle::random_vector(10, 23);
  SolveResult det = solve(a, b, config(2, 0.3, Mode::deterministic, 5));
  det.solution.nonzeros.push_back({det.plan.source_dim, 1.0});
  det.solution.dim += 1;
  EXPECT_THROW(theorem1_report(a, b, 2, 0.3, det.solution, det.plan), PreconditionError);
}

TEST(Theorem2, TooFewSeeds) {
  const Matrix a = oracle::random_matrix(10, 8, 24);
  const Vector b = oracle::random_vector(10, 25);
  std::vector<std::uint64_t> seeds(49);
  std::iota(seeds.begin(), seeds.end(), 0);
  EXPECT_THROW(theorem2_monte_carlo(a, b, 2, 0.3, seeds, 5), PreconditionError);
}

TEST(Theorem2, NearlyRankKAlwaysSucceeds) {
  const Matrix a = oracle::with_spectrum(20, 12, {3, 1e-9}, 26);
  const Vector b = oracle::random_vector(20, 27);
  std::vector<std::uint64_t> seeds(60);
  std::iota(seeds.begin(), seeds.end(), 1000);
  const BoundReport r = theorem2_monte_carlo(a, b, 1, 0.4, seeds);
  EXPECT_EQ(r.status, BoundStatus::asserted);
  EXPECT_DOUBLE_EQ(r.terms.at("success_rate"), 1.0);
}

TEST(Theorem2, DuplicateSeedsGiveIdenticalOutcomes) {
  const Matrix a = oracle::random_matrix(15, 10, 28);
  const Vector b = oracle::random_vector(15, 29);
  const std::vector<std::uint64_t> seeds(50, 42);
  const BoundReport r = theorem2_monte_carlo(a, b, 2, 0.4, seeds, 6);
  EXPECT_EQ(r.status, BoundStatus::informational);
  for (const auto& d : r.details) {
    EXPECT_EQ(d.lhs, r.details[0].lhs);
    EXPECT_EQ(d.holds, r.details[0].holds);
    EXPECT_EQ(d.seed, std::optional<std::uint64_t>(42));
  }
}

TEST(Theorem2, MonteCarloRateAtTheoremBudget) {
  const Matrix a = oracle::with_spectrum(30, 20, {10, 5, 2.5, 1.2, 0.6, 0.3, 0.15, 0.08}, 30);
  const Vector b = oracle::random_vector(30, 31);
  std::vector<std::uint64_t> seeds(200);
  std::iota(seeds.begin(), seeds.end(), 1);
  const BoundReport r = theorem2_monte_carlo(a, b, 2, 0.45, seeds);
  EXPECT_EQ(r.status, BoundStatus::asserted);
  EXPECT_GE(r.terms.at("success_rate"), 0.7 - 0.065);
  EXPECT_TRUE(r.passed());
  for (const auto& d : r.details) {
    ASSERT_EQ(d.traces.size(), 1u);
    // Only the unconditional steps are asserted.
    EXPECT_TRUE(d.traces[0].dominance_holds());
  }
}

TEST(LemmaSuite, OrthogonalSquareFactorConcentrates) {
  const Index n = 4;
  const Matrix v_t = oracle::random_orthonormal_rows(n, n, 32);
  const Matrix e = Matrix::Zero(3, n);
  const Index r = concentration_budget(n, 0.5, kFailureProbability);
  const auto reports = lemma_suite(v_t, e, n, r, 200, 7, 0.5);
  const BoundReport& conc = find(reports, "gram_concentration");
  EXPECT_EQ(conc.status, BoundStatus::asserted);
  EXPECT_TRUE(conc.holds);
  EXPECT_TRUE(find(reports, "pinv_transpose").holds);
}

TEST(LemmaSuite, ZeroResidualIsTrivial) {
  const Matrix v_t = oracle::random_orthonormal_rows(2, 10, 33);
  const auto reports = lemma_suite(v_t, Matrix::Zero(5, 10), 2, 30, 100, 8);
  for (const char* name : {"frobenius_expectation", "frobenius_markov", "matrix_product"}) {
    const BoundReport& r = find(reports, name);
    EXPECT_EQ(r.status, BoundStatus::asserted) << name;
    EXPECT_TRUE(r.holds) << name;
  }
  EXPECT_EQ(find(reports, "matrix_product").lhs, 0.0);
  EXPECT_EQ(find(reports, "frobenius_expectation").lhs, 0.0);
}

TEST(LemmaSuite, SvdSplitPassesAllFive) {
  const Matrix a = oracle::with_spectrum(25, 18, {5, 4, 2, 1, 0.8, 0.5, 0.3}, 34);
  const RankSplit split = RankSplit::compute(a, Vector::Zero(25), 2);
  const Index r = concentration_budget(2, 0.5, kFailureProbability);
  const auto reports = lemma_suite(split.v_k.transpose(), split.e, 2, r, 300, 9, 0.5);
  ASSERT_EQ(reports.size(), 5u);
  for (const auto& rep : reports) {
    EXPECT_EQ(rep.status, BoundStatus::asserted) << rep.name;
    EXPECT_TRUE(rep.passed()) << rep.name << " lhs " << rep.lhs << " rhs " << rep.rhs;
  }
}

TEST(LemmaSuite, NonOrthogonalResidualSkipsProductLemma) {
  const Matrix v_t = oracle::random_orthonormal_rows(2, 12, 35);
  const Matrix e = oracle::random_matrix(6, 12, 36);
  const auto reports = lemma_suite(v_t, e, 2, 150, 50, 10);
  EXPECT_EQ(find(reports, "matrix_product").status, BoundStatus::not_applicable);
}

TEST(LemmaSuite, SmallBudgetSkipsConcentration) {
  const Matrix v_t = oracle::random_orthonormal_rows(2, 12, 37);
  const auto reports = lemma_suite(v_t, Matrix::Zero(3, 12), 2, 12, 50, 11);
  EXPECT_EQ(find(reports, "gram_concentration").status, BoundStatus::not_applicable);
  EXPECT_EQ(find(reports, "pinv_transpose").status, BoundStatus::not_applicable);
}

TEST(LemmaSuite, ReproducibleForFixedSeed) {
  const Matrix v_t = oracle::random_orthonormal_rows(2, 12, 38);
  const Matrix e = oracle::random_matrix(6, 12, 39);
  EXPECT_EQ(lemma_suite(v_t, e, 2, 40, 64, 12), lemma_suite(v_t, e, 2, 40, 64, 12));
}

TEST(BinomialSlack, Values) {
  EXPECT_NEAR(binomial_slack(0.7, 200), 2.0 * std::sqrt(0.21 / 200.0), 1e-15);
  EXPECT_NEAR(0.7 - binomial_slack(0.7, 200), 0.6352, 1e-4);
}
