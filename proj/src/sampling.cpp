#include "sparse_lsq/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_map>

#include "sparse_lsq/errors.hpp"

namespace sparse_lsq {

namespace {

struct Spectrum {
  Vector values;   // ascending
  Matrix vectors;  // columns are eigenvectors
};

Spectrum symmetric_eigen(const Matrix& b) {
  if (b.rows() != b.cols()) throw DimensionError("barrier matrix must be square");
  const double asymmetry = b.size() ? (b - b.transpose()).cwiseAbs().maxCoeff() : 0.0;
  const double scale = b.size() ? std::max(1.0, b.cwiseAbs().maxCoeff()) : 1.0;
  if (!(asymmetry <= 1e-12 * scale)) throw PreconditionError("barrier matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(b);
  if (solver.info() != Eigen::Success) throw IterationFailure("symmetric eigensolver failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

double phi_from_eigenvalues(double shift, const Vector& lambda) {
  if (lambda.size() > 0 && shift >= lambda.minCoeff()) {
    throw BarrierViolation("barrier " + std::to_string(shift) +
                           " is not below lambda_min " + std::to_string(lambda.minCoeff()));
  }
  return (lambda.array() - shift).inverse().sum();
}

}  // namespace

bool SamplingPlan::has_repeats() const {
  std::vector<Index> sorted = selected;
  std::sort(sorted.begin(), sorted.end());
  return std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end();
}

void SamplingPlan::validate() const {
  if (selected.empty()) throw PreconditionError("sampling plan selects no columns");
  if (selected.size() != scales.size()) {
    throw PreconditionError("sampling plan has mismatched index and scale counts");
  }
  for (std::size_t t = 0; t < selected.size(); ++t) {
    if (selected[t] < 0 || selected[t] >= source_dim) {
      throw DimensionError("sampling plan index " + std::to_string(selected[t]) +
                           " outside [0, " + std::to_string(source_dim) + ")");
    }
    if (!(scales[t] > 0.0) || !std::isfinite(scales[t])) {
      throw PreconditionError("sampling plan scale must be positive and finite");
    }
  }
}

Matrix SamplingPlan::apply(const Matrix& x) const {
  if (x.cols() != source_dim) {
    throw DimensionError("plan expects " + std::to_string(source_dim) + " columns, got " +
                         std::to_string(x.cols()));
  }
  Matrix out(x.rows(), size());
  for (Index t = 0; t < size(); ++t) {
    const auto s = static_cast<std::size_t>(t);
    out.col(t) = scales[s] * x.col(selected[s]);
  }
  return out;
}

Matrix SamplingPlan::omega() const {
  Matrix o = Matrix::Zero(source_dim, size());
  for (Index t = 0; t < size(); ++t) o(selected[static_cast<std::size_t>(t)], t) = 1.0;
  return o;
}

Matrix SamplingPlan::scale_matrix() const {
  Vector d(size());
  for (Index t = 0; t < size(); ++t) d(t) = scales[static_cast<std::size_t>(t)];
  return d.asDiagonal();
}

SamplingPlan SamplingPlan::merged() const {
  SamplingPlan out;
  out.source_dim = source_dim;
  std::unordered_map<Index, std::size_t> slot;
  std::vector<double> sum_sq;
  for (std::size_t t = 0; t < selected.size(); ++t) {
    auto [it, inserted] = slot.try_emplace(selected[t], out.selected.size());
    if (inserted) {
      out.selected.push_back(selected[t]);
      sum_sq.push_back(0.0);
    }
    sum_sq[it->second] += scales[t] * scales[t];
  }
  out.scales.reserve(sum_sq.size());
  for (double s : sum_sq) out.scales.push_back(std::sqrt(s));
  return out;
}

BarrierState BarrierState::at_step(Matrix b_matrix, int step, Index r, Index k) {
  BarrierState s;
  s.b_matrix = std::move(b_matrix);
  s.step = step;
  s.shift = static_cast<double>(step) - std::sqrt(static_cast<double>(r * k));
  return s;
}

double phi(double shift, const Matrix& b_matrix) {
  return phi_from_eigenvalues(shift, symmetric_eigen(b_matrix).values);
}

double lower_barrier(const Vector& v, const BarrierState& state) {
  const Spectrum spec = symmetric_eigen(state.b_matrix);
  if (v.size() != spec.values.size()) throw DimensionError("lower_barrier: vector size mismatch");
  const double shift = state.shift;
  const double next = shift + 1.0;
  const double phi_next = phi_from_eigenvalues(next, spec.values);
  const double phi_here = phi_from_eigenvalues(shift, spec.values);
  const double denom = phi_next - phi_here;
  if (!(denom > 0.0)) throw DivisionDegeneracy("phi(l', B) - phi(l, B) is not positive");

  const Vector y = spec.vectors.transpose() * v;
  const Vector inv = (spec.values.array() - next).inverse();
  const double quad2 = (y.array().square() * inv.array().square()).sum();
  const double quad1 = (y.array().square() * inv.array()).sum();
  return quad2 / denom - quad1;
}

double upper_function(const Vector& e, double residual_fnorm_sq, Index k, Index r) {
  if (r <= k) throw BudgetError("upper_function requires r > k");
  if (!(residual_fnorm_sq > 0.0)) {
    throw PreconditionError("upper_function requires a positive residual norm");
  }
  const double factor = 1.0 - std::sqrt(static_cast<double>(k) / static_cast<double>(r));
  return e.squaredNorm() / residual_fnorm_sq * factor;
}

void require_orthonormal_rows(const Matrix& v_t) {
  const Index k = v_t.rows();
  if (k == 0) throw PreconditionError("orthonormal basis has no rows");
  const double err = (v_t * v_t.transpose() - Matrix::Identity(k, k)).cwiseAbs().maxCoeff();
  if (!(err <= 1e-10)) {
    throw PreconditionError("rows of V^T are not orthonormal (max deviation " +
                            std::to_string(err) + ")");
  }
}

SamplingPlan deterministic_sampling(const Matrix& v_t, const Matrix& e, Index r,
                                    DeterministicTrace* trace) {
  require_finite(v_t, "V^T");
  require_finite(e, "E");
  require_orthonormal_rows(v_t);
  const Index k = v_t.rows();
  const Index n = v_t.cols();
  if (e.cols() != n) throw DimensionError("E and V^T must have the same number of columns");
  if (r <= k || r > n) {
    throw BudgetError("deterministic sampling needs k < r <= n (k=" + std::to_string(k) +
                      ", r=" + std::to_string(r) + ", n=" + std::to_string(n) + ")");
  }

  const double ratio = std::sqrt(static_cast<double>(k) / static_cast<double>(r));
  const double e_fro_sq = e.squaredNorm();
  Vector upper = Vector::Zero(n);
  if (e_fro_sq > 0.0) upper = e.colwise().squaredNorm().transpose() * ((1.0 - ratio) / e_fro_sq);

  Matrix b = Matrix::Zero(k, k);
  Vector weight = Vector::Zero(n);
  std::vector<Index> first_seen;
  const double root_rk = std::sqrt(static_cast<double>(r * k));

  for (Index step = 0; step < r; ++step) {
    const double shift = static_cast<double>(step) - root_rk;
    const double next = shift + 1.0;
    const Spectrum spec = symmetric_eigen(b);
    const double lambda_min = spec.values.minCoeff();
    if (!(lambda_min > shift)) {
      throw BarrierViolation("barrier crossed the spectrum at step " + std::to_string(step));
    }
    const double denom = phi_from_eigenvalues(next, spec.values) -
                         phi_from_eigenvalues(shift, spec.values);
    if (!(denom > 0.0)) throw DivisionDegeneracy("phi(l', B) - phi(l, B) is not positive");

    const Matrix y = spec.vectors.transpose() * v_t;
    const Vector inv = (spec.values.array() - next).inverse();
    const Vector inv_sq = inv.array().square();
    const Vector quad2 = (y.array().square().colwise() * inv_sq.array()).colwise().sum();
    const Vector quad1 = (y.array().square().colwise() * inv.array()).colwise().sum();
    const Vector lower = quad2 / denom - quad1;

    Index best = -1;
    double best_gap = -std::numeric_limits<double>::infinity();
    for (Index i = 0; i < n; ++i) {
      const double gap = lower(i) - upper(i);
      if (lower(i) > 0.0 && gap >= 0.0 && gap > best_gap) {
        best = i;
        best_gap = gap;
      }
    }
    if (best < 0) {
      double max_gap = -std::numeric_limits<double>::infinity();
      for (Index i = 0; i < n; ++i) max_gap = std::max(max_gap, lower(i) - upper(i));
      throw InfeasibleStep(static_cast<int>(step), max_gap);
    }

    const double t = 1.0 / lower(best);
    b.noalias() += t * v_t.col(best) * v_t.col(best).transpose();
    b = 0.5 * (b + b.transpose()).eval();
    if (weight(best) == 0.0) first_seen.push_back(best);
    weight(best) += t;

    if (trace) {
      trace->shifts.push_back(shift);
      trace->min_eigenvalue.push_back(lambda_min);
      trace->gaps.push_back(best_gap);
    }
  }

  const double final_min = symmetric_eigen(b).values.minCoeff();
  const double final_shift = static_cast<double>(r) - root_rk;
  if (!(final_min > final_shift)) {
    throw BarrierViolation("barrier crossed the spectrum after the last step");
  }
  if (trace) trace->final_min_eigenvalue = final_min;

  // lambda_min(B_r) > r - sqrt(rk); scaling by (1 - sqrt(k/r)) / r turns that
  // into (1 - sqrt(k/r))^2 and the Frobenius budget into ||E||_F^2.
  const double rescale = (1.0 - ratio) / static_cast<double>(r);
  SamplingPlan plan;
  plan.source_dim = n;
  for (Index i : first_seen) {
    plan.selected.push_back(i);
    plan.scales.push_back(std::sqrt(weight(i) * rescale));
  }
  return plan;
}

std::vector<double> leverage_probabilities(const Matrix& v_t) {
  require_finite(v_t, "V^T");
  require_orthonormal_rows(v_t);
  const double k = static_cast<double>(v_t.rows());
  std::vector<double> p(static_cast<std::size_t>(v_t.cols()));
  for (Index i = 0; i < v_t.cols(); ++i) p[static_cast<std::size_t>(i)] = v_t.col(i).squaredNorm() / k;
  return p;
}

SamplingPlan random_sampling(const Matrix& v_t, Index r, Rng& rng) {
  if (r < 1) throw BudgetError("random sampling needs r >= 1");
  const std::vector<double> p = leverage_probabilities(v_t);

  std::vector<double> cdf(p.size());
  double running = 0.0;
  Index last_positive = -1;
  for (std::size_t i = 0; i < p.size(); ++i) {
    running += p[i];
    cdf[i] = running;
    if (p[i] > 0.0) last_positive = static_cast<Index>(i);
  }
  if (last_positive < 0) throw PreconditionError("all leverage probabilities are zero");

  SamplingPlan plan;
  plan.source_dim = v_t.cols();
  plan.selected.reserve(static_cast<std::size_t>(r));
  plan.scales.reserve(static_cast<std::size_t>(r));
  const double rr = static_cast<double>(r);
  for (Index t = 0; t < r; ++t) {
    const double u = rng.uniform() * running;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    Index i = it == cdf.end() ? last_positive : static_cast<Index>(it - cdf.begin());
    if (i > last_positive) i = last_positive;
    plan.selected.push_back(i);
    plan.scales.push_back(1.0 / std::sqrt(p[static_cast<std::size_t>(i)] * rr));
  }
  return plan;
}

}  // namespace sparse_lsq
