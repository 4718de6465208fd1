#pragma once

#include <Eigen/Dense>

namespace sparse_lsq {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Hybrid comparison used across the library: |lhs - rhs| <= atol + rtol*|rhs|.
struct Tolerance {
  double atol = 1e-10;
  double rtol = 1e-8;

  bool close(double lhs, double rhs) const;
  // lhs <= rhs up to the same slack.
  bool below(double lhs, double rhs) const;
};

// Thin SVD  A = u * diag(sigma) * v^T  keeping only the numerically nonzero
// singular values. Columns are ordered by non-increasing sigma; equal values
// keep the column order produced by the Jacobi sweeps.
struct SvdFactorization {
  Matrix u;      // m x rank
  Vector sigma;  // rank, strictly positive, non-increasing
  Matrix v;      // n x rank
  Index numerical_rank = 0;
  double rank_tolerance = 0.0;  // relative to sigma(0)

  Index rows() const { return u.rows(); }
  Index cols() const { return v.rows(); }
  Matrix reconstruct() const;
};

// Relative rank tolerance applied when the caller does not pick one:
// a singular value is kept when sigma > 1e-12 * max(m, n) * sigma_max.
double default_rank_tolerance(Index rows, Index cols);

void require_finite(const Matrix& a, const char* what);
void require_finite(const Vector& x, const char* what);

// One-sided (Hestenes) Jacobi SVD. Negative rank_tolerance selects the default.
// Throws IterationFailure when the sweeps do not converge.
SvdFactorization svd(const Matrix& a, double rank_tolerance = -1.0);

// V * diag(1/sigma) * U^T * b, the minimum-norm least-squares solution.
Vector pseudo_inverse_apply(const SvdFactorization& f, const Vector& b);

// Dense Moore-Penrose pseudo-inverse, n x m.
Matrix pseudo_inverse(const SvdFactorization& f);
Matrix pseudo_inverse(const Matrix& a);

// Leading k singular triples. Requires 1 <= k < numerical_rank.
SvdFactorization truncate(const SvdFactorization& f, Index k);

// x_k = V_k Sigma_k^{-1} U_k^T b.
Vector truncated_solution(const SvdFactorization& f, Index k, const Vector& b);

double frobenius_norm(const Matrix& a);
double spectral_norm(const Matrix& a);

// ||A x - b||_2
double residual_norm(const Matrix& a, const Vector& x, const Vector& b);

}  // namespace sparse_lsq
