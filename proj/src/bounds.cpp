#include "sparse_lsq/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sparse_lsq/errors.hpp"
#include "sparse_lsq/parallel.hpp"

namespace sparse_lsq {

namespace {

constexpr double kRankRatio = 1e-10;

double rd(Index v) { return static_cast<double>(v); }

// ||x||_2 of an orthogonal-projection residual, B - Q Q^T B with Q spanning range(M).
Matrix projection_residual(const Matrix& m, const Matrix& target) {
  const SvdFactorization f = svd(m);
  return target - f.u * (f.u.transpose() * target);
}

struct SampledPieces {
  Matrix sampled_e;       // E Omega S
  Matrix sampled_v;       // V_k^T Omega S
  Matrix sampled_v_pinv;  // (V_k^T Omega S)^+
};

SampledPieces sample_pieces(const RankSplit& split, const SamplingPlan& plan) {
  SampledPieces p;
  p.sampled_e = plan.apply(split.e);
  p.sampled_v = plan.apply(split.v_k.transpose());
  p.sampled_v_pinv = pseudo_inverse(svd(p.sampled_v, 0.0));
  return p;
}

double sparse_residual(const Matrix& a, const Vector& b, const SamplingPlan& plan) {
  const SamplingPlan distinct = plan.merged();
  const Vector x_r = sampled_least_squares(a, b, distinct);
  return residual_norm(a, scatter(x_r, distinct, a.cols()).densify(), b);
}

void echo_context(BoundReport& r, Index m, Index n, Index k) {
  r.context["m"] = rd(m);
  r.context["n"] = rd(n);
  r.context["k"] = rd(k);
}

void check_solution_matches(const Matrix& a, const SparseSolution& s, const SamplingPlan& plan) {
  if (s.dim != a.cols() || plan.source_dim != a.cols()) {
    throw PreconditionError("solution or plan dimension does not match A");
  }
  for (const auto& [i, value] : s.nonzeros) {
    (void)value;
    if (std::find(plan.selected.begin(), plan.selected.end(), i) == plan.selected.end()) {
      throw PreconditionError("solution support is not contained in the plan");
    }
  }
}

// Trace of the randomized argument for one sampled plan. Only the first two
// steps are unconditional; the rest hold on the high-probability event.
ProofTrace randomized_trace(const RankSplit& split, const Vector& b, const SamplingPlan& plan,
                            Index r, double epsilon) {
  const SampledPieces p = sample_pieces(split, plan);
  const Vector coeffs = split.u_k.transpose() * b;
  const Vector scaled = coeffs.cwiseQuotient(split.sigma_k);
  const double sigma_k = split.sigma_k(split.k - 1);
  const double b_norm = b.norm();
  const double e_fro = split.e.norm();
  const double delta = kFailureProbability;
  const double eps = epsilon / 3.0;

  ProofTrace t;
  t.name = "randomized_chain";
  t.add("structural_term", (p.sampled_e * (p.sampled_v_pinv * scaled)).norm());
  t.add("submultiplicative", (p.sampled_e * p.sampled_v_pinv).norm() * b_norm / sigma_k);
  const double product_term = (p.sampled_e * p.sampled_v.transpose()).norm();
  const double perturbation_term =
      (p.sampled_e * (p.sampled_v_pinv - p.sampled_v.transpose())).norm();
  t.add("triangle", (product_term + perturbation_term) * b_norm / sigma_k);
  const double lemma_terms = e_fro * std::sqrt(rd(split.k) / (rd(r) * delta)) +
                             e_fro * eps / std::sqrt(delta * (1.0 - eps));
  t.add("sampling_lemmas", lemma_terms * b_norm / sigma_k, false);
  t.add("final", epsilon * e_fro * b_norm / sigma_k, false);
  return t;
}

}  // namespace

const char* to_string(BoundStatus status) {
  switch (status) {
    case BoundStatus::asserted: return "asserted";
    case BoundStatus::informational: return "informational";
    case BoundStatus::not_applicable: return "not_applicable";
  }
  return "asserted";
}

BoundStatus bound_status_from_string(const std::string& s) {
  if (s == "asserted") return BoundStatus::asserted;
  if (s == "informational") return BoundStatus::informational;
  if (s == "not_applicable") return BoundStatus::not_applicable;
  throw ParseError("report", 0, "unknown bound status '" + s + "'");
}

const char* to_string(NormKind kind) {
  return kind == NormKind::spectral ? "spectral" : "frobenius";
}

double matrix_norm(const Matrix& a, NormKind kind) {
  return kind == NormKind::spectral ? spectral_norm(a) : frobenius_norm(a);
}

void ProofTrace::add(std::string label, double value, bool asserted) {
  steps.push_back({std::move(label), value, asserted});
}

std::optional<std::string> ProofTrace::first_violation(const Tolerance& tol) const {
  for (std::size_t i = 1; i < steps.size(); ++i) {
    if (steps[i].asserted && !tol.below(steps[i - 1].value, steps[i].value)) {
      return steps[i].label;
    }
  }
  return std::nullopt;
}

void BoundReport::settle(const Tolerance& tol) {
  margin = rhs - lhs;
  holds = tol.below(lhs, rhs);
}

bool BoundReport::passed() const {
  if (status != BoundStatus::asserted) return true;
  if (!holds) return false;
  for (const auto& t : traces) {
    if (!t.dominance_holds()) return false;
  }
  return true;
}

RankSplit RankSplit::compute(const Matrix& a, const Vector& b, Index k) {
  if (a.rows() != b.size()) throw DimensionError("A and b row counts differ");
  require_finite(b, "b");
  RankSplit s;
  s.svd = sparse_lsq::svd(a);
  if (k < 1 || k >= s.svd.numerical_rank) {
    throw RankError("k=" + std::to_string(k) + " must satisfy 0 < k < rank(A)=" +
                    std::to_string(s.svd.numerical_rank));
  }
  s.k = k;
  s.u_k = s.svd.u.leftCols(k);
  s.sigma_k = s.svd.sigma.head(k);
  s.v_k = s.svd.v.leftCols(k);
  s.e = a - a * s.v_k * s.v_k.transpose();
  s.x_k_star = truncated_solution(s.svd, k, b);
  s.truncated_residual = residual_norm(a, s.x_k_star, b);
  return s;
}

bool has_full_row_rank(const Matrix& m, Index k) {
  if (m.cols() < k || m.rows() < k) return false;
  const SvdFactorization f = svd(m, 0.0);
  if (f.numerical_rank < k) return false;
  return f.sigma(k - 1) > kRankRatio * f.sigma(0);
}

double binomial_slack(double p, std::size_t trials) {
  return 2.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
}

BoundReport structural_bound(const Matrix& a, const Vector& b, Index k, const SamplingPlan& plan) {
  plan.validate();
  const RankSplit split = RankSplit::compute(a, b, k);

  BoundReport r;
  r.name = "structural";
  echo_context(r, a.rows(), a.cols(), k);
  r.context["r"] = rd(plan.size());

  const SampledPieces p = sample_pieces(split, plan);
  if (!has_full_row_rank(p.sampled_v, k)) {
    r.status = BoundStatus::not_applicable;
    r.note = "V_k^T Omega S has rank below k";
    return r;
  }

  const Vector scaled = (split.u_k.transpose() * b).cwiseQuotient(split.sigma_k);
  const Vector w = p.sampled_e * (p.sampled_v_pinv * scaled);
  const double term2 = spectral_norm(w);
  const double term2_fro = frobenius_norm(w);

  r.lhs = sparse_residual(a, b, plan);
  r.rhs = split.truncated_residual + term2;
  r.terms["truncated_residual"] = split.truncated_residual;
  r.terms["sampling_term"] = term2;
  r.terms["sampling_term_frobenius"] = term2_fro;
  r.terms["sampling_term_form_gap"] = std::abs(term2 - term2_fro);
  r.settle();
  return r;
}

BoundReport generalized_bound(const Matrix& b_target, const Matrix& h, const Matrix& z,
                              const Matrix& e, const SamplingPlan& plan, NormKind norm) {
  plan.validate();
  require_finite(b_target, "B");
  require_finite(h, "H");
  require_finite(z, "Z");
  require_finite(e, "E");
  const Index k = z.cols();
  if (h.cols() != k || h.rows() != e.rows() || z.rows() != e.cols() ||
      b_target.rows() != e.rows()) {
    throw DimensionError("generalized_bound: inconsistent H, Z, E, B shapes");
  }
  const double orth = (z.transpose() * z - Matrix::Identity(k, k)).cwiseAbs().maxCoeff();
  if (!(orth <= 1e-10)) throw PreconditionError("Z must have orthonormal columns");

  BoundReport r;
  r.name = std::string("generalized_") + to_string(norm);
  echo_context(r, e.rows(), e.cols(), k);
  r.context["r"] = rd(plan.size());
  r.context["omega"] = rd(b_target.cols());

  const Matrix sampled_z = plan.apply(z.transpose());
  if (!has_full_row_rank(sampled_z, k)) {
    r.status = BoundStatus::not_applicable;
    r.note = "Z^T Omega S has rank below k";
    return r;
  }

  const Matrix a = h * z.transpose() + e;
  const Matrix c = plan.apply(a);
  const Matrix h_pinv_b = pseudo_inverse(h) * b_target;
  const Matrix second =
      plan.apply(e) * (pseudo_inverse(svd(sampled_z, 0.0)) * h_pinv_b);

  r.lhs = matrix_norm(projection_residual(c, b_target), norm);
  const double first = matrix_norm(projection_residual(h, b_target), norm);
  const double term2 = matrix_norm(second, norm);
  r.rhs = first + term2;
  r.terms["factor_residual"] = first;
  r.terms["sampling_term"] = term2;
  r.settle();
  return r;
}

BoundReport theorem1_report(const Matrix& a, const Vector& b, Index k, double epsilon,
                            const SparseSolution& solution, const SamplingPlan& plan) {
  if (!(epsilon > 0.0 && epsilon < 0.5)) throw ConfigError("epsilon must lie in (0, 1/2)");
  plan.validate();
  check_solution_matches(a, solution, plan);
  const RankSplit split = RankSplit::compute(a, b, k);
  const Index r = solution.budget_r;
  if (r <= k) throw PreconditionError("theorem1_report needs a run with r > k");

  BoundReport rep;
  rep.name = "theorem1";
  echo_context(rep, a.rows(), a.cols(), k);
  rep.context["r"] = rd(r);
  rep.context["epsilon"] = epsilon;

  const Index needed = deterministic_budget(k, epsilon);
  const bool theorem_regime = r >= needed;
  rep.status = theorem_regime ? BoundStatus::asserted : BoundStatus::informational;
  if (!theorem_regime) {
    rep.note = "r=" + std::to_string(r) + " is below ceil(9k/eps^2)=" + std::to_string(needed);
  }

  const double sigma_k = split.sigma_k(k - 1);
  const double e_fro = split.e.norm();
  const double b_norm = b.norm();
  const double additive = b_norm * e_fro / sigma_k;
  const double shrink = 1.0 - std::sqrt(rd(k) / rd(r));

  rep.lhs = residual_norm(a, solution.densify(), b);
  rep.rhs = split.truncated_residual + (1.0 + epsilon) * additive;
  rep.terms["truncated_residual"] = split.truncated_residual;
  rep.terms["additive_term"] = (1.0 + epsilon) * additive;
  rep.terms["rhs_squared_inverse_form"] = split.truncated_residual + additive / (shrink * shrink);
  rep.terms["rhs_inverse_form"] = split.truncated_residual + additive / shrink;
  rep.settle();

  const SampledPieces p = sample_pieces(split, plan);
  if (!has_full_row_rank(p.sampled_v, k)) {
    rep.status = BoundStatus::not_applicable;
    rep.note = "V_k^T Omega S has rank below k";
    return rep;
  }
  const Vector scaled = (split.u_k.transpose() * b).cwiseQuotient(split.sigma_k);

  ProofTrace t;
  t.name = "deterministic_chain";
  t.add("structural_term", (p.sampled_e * (p.sampled_v_pinv * scaled)).norm());
  t.add("a", (p.sampled_e * p.sampled_v_pinv).norm() * scaled.norm());
  t.add("b", p.sampled_e.norm() * spectral_norm(p.sampled_v_pinv) * b_norm / sigma_k);
  t.add("c", e_fro * b_norm / (sigma_k * shrink * shrink));
  t.add("d", (1.0 + epsilon) * e_fro * b_norm / sigma_k, theorem_regime);
  rep.traces.push_back(std::move(t));
  return rep;
}

BoundReport theorem2_report(const Matrix& a, const Vector& b, Index k, double epsilon,
                            const std::vector<SolveResult>& runs,
                            const std::vector<std::uint64_t>& seeds) {
  if (seeds.size() < kMinTheorem2Seeds) {
    throw PreconditionError("theorem2_report needs at least " +
                            std::to_string(kMinTheorem2Seeds) + " seeds, got " +
                            std::to_string(seeds.size()));
  }
  if (runs.size() != seeds.size()) throw DimensionError("one run per seed is required");
  if (!(epsilon > 0.0 && epsilon < 0.5)) throw ConfigError("epsilon must lie in (0, 1/2)");
  const RankSplit split = RankSplit::compute(a, b, k);

  const double sigma_k = split.sigma_k(k - 1);
  const double additive = epsilon * b.norm() * split.e.norm() / sigma_k;
  const double rhs = split.truncated_residual + additive;
  const Index needed = randomized_budget(k, epsilon);

  BoundReport agg;
  agg.name = "theorem2";
  echo_context(agg, a.rows(), a.cols(), k);
  agg.context["epsilon"] = epsilon;
  agg.context["seeds"] = rd(static_cast<Index>(seeds.size()));

  bool theorem_regime = true;
  std::size_t successes = 0;
  agg.details.resize(runs.size());
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const SolveResult& run = runs[i];
    check_solution_matches(a, run.solution, run.plan);
    theorem_regime = theorem_regime && run.solution.budget_r >= needed;

    BoundReport& per = agg.details[i];
    per.name = "theorem2_seed";
    per.seed = seeds[i];
    per.context["r"] = rd(run.solution.budget_r);
    per.lhs = residual_norm(a, run.solution.densify(), b);
    per.rhs = rhs;
    per.terms["truncated_residual"] = split.truncated_residual;
    per.terms["additive_term"] = additive;
    per.settle();
    per.status = BoundStatus::informational;
    if (has_full_row_rank(run.plan.apply(split.v_k.transpose()), k)) {
      per.traces.push_back(
          randomized_trace(split, b, run.plan, run.solution.budget_r, epsilon));
    }
    if (per.holds) ++successes;
  }

  const double n_trials = static_cast<double>(runs.size());
  agg.lhs = 0.7 - binomial_slack(0.7, runs.size());
  agg.rhs = static_cast<double>(successes) / n_trials;
  agg.terms["success_rate"] = agg.rhs;
  agg.terms["required_rate"] = agg.lhs;
  agg.terms["required_budget"] = rd(needed);
  agg.settle();
  agg.status = theorem_regime ? BoundStatus::asserted : BoundStatus::informational;
  if (!theorem_regime) {
    agg.note = "some runs used r below ceil(36k ln(20k)/eps^2)=" + std::to_string(needed);
  }
  return agg;
}

BoundReport theorem2_monte_carlo(const Matrix& a, const Vector& b, Index k, double epsilon,
                                 const std::vector<std::uint64_t>& seeds,
                                 std::optional<Index> r_override) {
  std::vector<SolveResult> runs(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t i) {
    SolveConfig cfg;
    cfg.k = k;
    cfg.epsilon = epsilon;
    cfg.mode = Mode::randomized;
    cfg.seed = seeds[i];
    cfg.r_override = r_override;
    runs[i] = solve_randomized(a, b, cfg);
  });
  return theorem2_report(a, b, k, epsilon, runs, seeds);
}

std::vector<BoundReport> lemma_suite(const Matrix& v_t, const Matrix& e, Index k, Index r,
                                     std::size_t trials, std::uint64_t seed,
                                     std::optional<double> epsilon) {
  require_orthonormal_rows(v_t);
  require_finite(e, "E");
  if (v_t.rows() != k) throw DimensionError("V^T must have k rows");
  if (e.cols() != v_t.cols()) throw DimensionError("E and V^T column counts differ");
  if (r < 1) throw BudgetError("lemma suite needs r >= 1");
  if (trials < 2) throw PreconditionError("lemma suite needs at least two trials");

  const double delta = kFailureProbability;
  const double kk = rd(k);
  const double needed_log = 4.0 * kk * std::log(2.0 * kk / delta);
  const double eps = epsilon.value_or(std::sqrt(needed_log / rd(r)));
  const bool concentration_applies =
      eps > 0.0 && eps < 1.0 && rd(r) * (1.0 + 1e-12) >= needed_log / (eps * eps);
  const double e_fro_sq = e.squaredNorm();
  const double ev_norm = (e * v_t.transpose()).norm();
  const bool orthogonal_residual = ev_norm <= 1e-8 * std::max(1.0, std::sqrt(e_fro_sq));

  struct Trial {
    double deviation = 0.0;    // ||M M^T - I||_2
    double pinv_gap = 0.0;     // ||M^+ - M^T||_2
    double sampled_fro_sq = 0.0;
    double product_fro_sq = 0.0;
    bool full_rank = false;
  };
  std::vector<Trial> out(trials);
  parallel_for(trials, [&](std::size_t t) {
    Rng rng(seed, t);
    const SamplingPlan plan = random_sampling(v_t, r, rng);
    const Matrix m = plan.apply(v_t);
    const Matrix se = plan.apply(e);
    Trial& tr = out[t];
    Eigen::SelfAdjointEigenSolver<Matrix> eig(m * m.transpose() - Matrix::Identity(k, k),
                                              Eigen::EigenvaluesOnly);
    tr.deviation = eig.eigenvalues().cwiseAbs().maxCoeff();
    tr.sampled_fro_sq = se.squaredNorm();
    tr.product_fro_sq = (se * m.transpose()).squaredNorm();
    tr.full_rank = has_full_row_rank(m, k);
    if (tr.full_rank) tr.pinv_gap = spectral_norm(pseudo_inverse(m) - m.transpose());
  });

  auto base = [&](const std::string& name) {
    BoundReport rep;
    rep.name = name;
    rep.context["k"] = kk;
    rep.context["n"] = rd(v_t.cols());
    rep.context["r"] = rd(r);
    rep.context["trials"] = static_cast<double>(trials);
    rep.context["delta"] = delta;
    rep.context["epsilon"] = eps;
    rep.seed = seed;
    return rep;
  };
  const double n_trials = static_cast<double>(trials);
  std::vector<BoundReport> reports;

  // Concentration of V^T Omega S S^T Omega^T V around I.
  BoundReport conc = base("gram_concentration");
  std::size_t conc_hits = 0;
  for (const Trial& tr : out) conc_hits += tr.deviation <= eps ? 1 : 0;
  conc.lhs = (1.0 - delta) - binomial_slack(1.0 - delta, trials);
  conc.rhs = static_cast<double>(conc_hits) / n_trials;
  conc.terms["success_rate"] = conc.rhs;
  conc.settle();
  if (!concentration_applies) {
    conc.status = BoundStatus::not_applicable;
    conc.note = "r is below 4k ln(2k/delta)/eps^2 for eps < 1";
  }
  reports.push_back(conc);

  // Pseudo-inverse vs transpose, on every trial inside the concentration event.
  BoundReport pinv = base("pinv_transpose");
  double worst = 0.0;
  std::size_t in_event = 0;
  for (const Trial& tr : out) {
    if (tr.deviation <= eps && tr.full_rank) {
      worst = std::max(worst, tr.pinv_gap);
      ++in_event;
    }
  }
  pinv.lhs = worst;
  pinv.rhs = concentration_applies ? eps / std::sqrt(1.0 - eps) : 0.0;
  pinv.terms["trials_in_event"] = static_cast<double>(in_event);
  pinv.settle();
  if (!concentration_applies) {
    pinv.status = BoundStatus::not_applicable;
    pinv.note = conc.note;
  }
  reports.push_back(pinv);

  // E ||E Omega S||_F^2 = ||E||_F^2.
  BoundReport fro = base("frobenius_expectation");
  double mean = 0.0;
  for (const Trial& tr : out) mean += tr.sampled_fro_sq;
  mean /= n_trials;
  double var = 0.0;
  for (const Trial& tr : out) var += (tr.sampled_fro_sq - mean) * (tr.sampled_fro_sq - mean);
  var /= (n_trials - 1.0);
  const double std_err = std::sqrt(var / n_trials);
  fro.lhs = std::abs(mean - e_fro_sq);
  fro.rhs = std::max(2.0 * std_err, 0.05 * e_fro_sq);
  fro.terms["sample_mean"] = mean;
  fro.terms["target"] = e_fro_sq;
  fro.terms["standard_error"] = std_err;
  fro.settle();
  reports.push_back(fro);

  // Markov: ||E Omega S||_F^2 <= ||E||_F^2 / delta with probability 1 - delta.
  BoundReport markov = base("frobenius_markov");
  std::size_t markov_hits = 0;
  for (const Trial& tr : out) {
    markov_hits += tr.sampled_fro_sq <= e_fro_sq / delta * (1.0 + 1e-12) ? 1 : 0;
  }
  markov.lhs = (1.0 - delta) - binomial_slack(1.0 - delta, trials);
  markov.rhs = static_cast<double>(markov_hits) / n_trials;
  markov.terms["success_rate"] = markov.rhs;
  markov.settle();
  reports.push_back(markov);

  // E ||E Omega S S^T Omega^T V||_F^2 <= (k/r) ||E||_F^2 when E V = 0.
  BoundReport product = base("matrix_product");
  double product_mean = 0.0;
  std::size_t product_hits = 0;
  const double markov_cap = kk / (delta * rd(r)) * e_fro_sq;
  for (const Trial& tr : out) {
    product_mean += tr.product_fro_sq;
    product_hits += tr.product_fro_sq <= markov_cap * (1.0 + 1e-12) ? 1 : 0;
  }
  product_mean /= n_trials;
  const double product_rate = static_cast<double>(product_hits) / n_trials;
  const double product_required = (1.0 - delta) - binomial_slack(1.0 - delta, trials);
  product.lhs = product_mean;
  product.rhs = 3.0 * kk / rd(r) * e_fro_sq;
  product.terms["expected_bound"] = kk / rd(r) * e_fro_sq;
  product.terms["success_rate"] = product_rate;
  product.terms["required_rate"] = product_required;
  product.terms["ev_norm"] = ev_norm;
  product.settle();
  product.holds = product.holds && product_rate >= product_required;
  if (!orthogonal_residual) {
    product.status = BoundStatus::not_applicable;
    product.note = "E V is not zero";
  }
  reports.push_back(product);
  return reports;
}

}  // namespace sparse_lsq
