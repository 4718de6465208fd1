#pragma once

#include <vector>

#include "sparse_lsq/linalg.hpp"
#include "sparse_lsq/random.hpp"

namespace sparse_lsq {

// The (Omega, S) pair: column selected[t] of the source, scaled by scales[t],
// becomes column t of the sampled matrix.
struct SamplingPlan {
  Index source_dim = 0;
  std::vector<Index> selected;
  std::vector<double> scales;

  Index size() const { return static_cast<Index>(selected.size()); }
  bool has_repeats() const;

  // X * Omega * S without materialising Omega or S.
  Matrix apply(const Matrix& x) const;
  // Dense n x r Omega and r x r S, mainly for checking apply().
  Matrix omega() const;
  Matrix scale_matrix() const;

  // Collapses repeated indices into one column with scale sqrt(sum s^2), in
  // order of first appearance. X*Omega*S*S^T*Omega^T*X^T is unchanged.
  SamplingPlan merged() const;

  void validate() const;
  bool operator==(const SamplingPlan&) const = default;
};

// Running state of the dual-set barrier method.
struct BarrierState {
  Matrix b_matrix;  // symmetric k x k
  int step = 0;
  double shift = 0.0;

  // State at `step` with shift = step - sqrt(r k).
  static BarrierState at_step(Matrix b_matrix, int step, Index r, Index k);
};

// phi(l, B) = sum_i 1 / (lambda_i(B) - l). Requires l < lambda_min(B).
double phi(double shift, const Matrix& b_matrix);

// Lower barrier function L(v, B, l) with l' = l + 1.
double lower_barrier(const Vector& v, const BarrierState& state);

// U(e) = (e^T e / residual_fnorm_sq) * (1 - sqrt(k/r)).
double upper_function(const Vector& e, double residual_fnorm_sq, Index k, Index r);

struct DeterministicTrace {
  std::vector<double> shifts;          // l_tau per step
  std::vector<double> min_eigenvalue;  // lambda_min(B) seen at the start of each step
  std::vector<double> gaps;            // chosen L - U per step
  double final_min_eigenvalue = 0.0;   // lambda_min(B) after the last step
};

// Dual-set spectral/Frobenius sparsification. v_t is k x n with orthonormal
// rows, e is m x n, and k < r <= n. Runs r barrier steps, merges repeated
// picks, and rescales so that
//   sigma_k(v_t * Omega * S) >= 1 - sqrt(k/r)   and   ||e * Omega * S||_F <= ||e||_F.
SamplingPlan deterministic_sampling(const Matrix& v_t, const Matrix& e, Index r,
                                    DeterministicTrace* trace = nullptr);

// p_i = ||v_i||^2 / k for the columns v_i of v_t.
std::vector<double> leverage_probabilities(const Matrix& v_t);

// r i.i.d. draws from the leverage distribution by inverse CDF; each draw i
// gets scale 1 / sqrt(p_i r). Repeats are kept.
SamplingPlan random_sampling(const Matrix& v_t, Index r, Rng& rng);

// Throws PreconditionError unless v_t * v_t^T = I to 1e-10 entrywise.
void require_orthonormal_rows(const Matrix& v_t);

}  // namespace sparse_lsq
