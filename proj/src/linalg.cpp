#include "sparse_lsq/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "sparse_lsq/errors.hpp"

namespace sparse_lsq {

namespace {

constexpr int kMaxSweeps = 80;

// Orthogonalises the columns of w in place by plane rotations, accumulating
// the rotations into j (w_in * j == w_out).
void jacobi_sweeps(Matrix& w, Matrix& j) {
  const Index n = w.cols();
  j.setIdentity(n, n);
  if (n < 2) return;

  const double tol = 8.0 * std::numeric_limits<double>::epsilon();
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (Index p = 0; p + 1 < n; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const double alpha = w.col(p).squaredNorm();
        const double beta = w.col(q).squaredNorm();
        const double gamma = w.col(p).dot(w.col(q));
        if (alpha == 0.0 || beta == 0.0) continue;
        if (std::abs(gamma) <= tol * std::sqrt(alpha) * std::sqrt(beta)) continue;

        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::hypot(1.0, t);
        const double s = c * t;

        for (Index i = 0; i < w.rows(); ++i) {
          const double wp = w(i, p);
          const double wq = w(i, q);
          w(i, p) = c * wp - s * wq;
          w(i, q) = s * wp + c * wq;
        }
        for (Index i = 0; i < n; ++i) {
          const double jp = j(i, p);
          const double jq = j(i, q);
          j(i, p) = c * jp - s * jq;
          j(i, q) = s * jp + c * jq;
        }
      }
    }
    if (!rotated) return;
  }
  throw IterationFailure("Jacobi SVD did not converge within " + std::to_string(kMaxSweeps) +
                         " sweeps");
}

void require_k_in_range(const SvdFactorization& f, Index k) {
  if (k < 1 || k >= f.numerical_rank) {
    throw RankError("rank parameter k=" + std::to_string(k) + " must satisfy 0 < k < rank=" +
                    std::to_string(f.numerical_rank));
  }
}

}  // namespace

bool Tolerance::close(double lhs, double rhs) const {
  return std::abs(lhs - rhs) <= atol + rtol * std::abs(rhs);
}

bool Tolerance::below(double lhs, double rhs) const {
  return lhs <= rhs + atol + rtol * std::abs(rhs);
}

Matrix SvdFactorization::reconstruct() const {
  return u * sigma.asDiagonal() * v.transpose();
}

double default_rank_tolerance(Index rows, Index cols) {
  return 1e-12 * static_cast<double>(std::max(rows, cols));
}

void require_finite(const Matrix& a, const char* what) {
  if (!a.allFinite()) throw NonFiniteError(std::string(what) + " contains a non-finite entry");
}

void require_finite(const Vector& x, const char* what) {
  if (!x.allFinite()) throw NonFiniteError(std::string(what) + " contains a non-finite entry");
}

SvdFactorization svd(const Matrix& a, double rank_tolerance) {
  require_finite(a, "matrix");
  if (a.rows() == 0 || a.cols() == 0) throw DimensionError("svd of an empty matrix");
  if (rank_tolerance < 0.0) rank_tolerance = default_rank_tolerance(a.rows(), a.cols());

  // Work on whichever orientation has fewer columns.
  const bool wide = a.rows() < a.cols();
  Matrix w = wide ? Matrix(a.transpose()) : a;
  Matrix j;
  jacobi_sweeps(w, j);

  const Index p = w.cols();
  Vector norms(p);
  for (Index c = 0; c < p; ++c) norms(c) = w.col(c).norm();

  std::vector<Index> order(static_cast<std::size_t>(p));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index lhs, Index rhs) { return norms(lhs) > norms(rhs); });

  const double largest = p > 0 ? norms(order.front()) : 0.0;
  const double cutoff = rank_tolerance * largest;
  Index rank = 0;
  while (rank < p && norms(order[static_cast<std::size_t>(rank)]) > cutoff &&
         norms(order[static_cast<std::size_t>(rank)]) > 0.0) {
    ++rank;
  }

  SvdFactorization f;
  f.numerical_rank = rank;
  f.rank_tolerance = rank_tolerance;
  f.sigma.resize(rank);
  Matrix normalized(w.rows(), rank);
  Matrix rotation(j.rows(), rank);
  for (Index c = 0; c < rank; ++c) {
    const Index src = order[static_cast<std::size_t>(c)];
    f.sigma(c) = norms(src);
    normalized.col(c) = w.col(src) / norms(src);
    rotation.col(c) = j.col(src);
  }
  if (wide) {
    f.u = std::move(rotation);
    f.v = std::move(normalized);
  } else {
    f.u = std::move(normalized);
    f.v = std::move(rotation);
  }
  return f;
}

Vector pseudo_inverse_apply(const SvdFactorization& f, const Vector& b) {
  if (b.size() != f.rows()) {
    throw DimensionError("right-hand side has " + std::to_string(b.size()) +
                         " entries, expected " + std::to_string(f.rows()));
  }
  require_finite(b, "right-hand side");
  const Vector coeffs = (f.u.transpose() * b).cwiseQuotient(f.sigma);
  return f.v * coeffs;
}

Matrix pseudo_inverse(const SvdFactorization& f) {
  return f.v * f.sigma.cwiseInverse().asDiagonal() * f.u.transpose();
}

Matrix pseudo_inverse(const Matrix& a) { return pseudo_inverse(svd(a)); }

SvdFactorization truncate(const SvdFactorization& f, Index k) {
  require_k_in_range(f, k);
  SvdFactorization t;
  t.u = f.u.leftCols(k);
  t.sigma = f.sigma.head(k);
  t.v = f.v.leftCols(k);
  t.numerical_rank = k;
  t.rank_tolerance = f.rank_tolerance;
  return t;
}

Vector truncated_solution(const SvdFactorization& f, Index k, const Vector& b) {
  return pseudo_inverse_apply(truncate(f, k), b);
}

double frobenius_norm(const Matrix& a) {
  require_finite(a, "matrix");
  return a.norm();
}

double spectral_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  const SvdFactorization f = svd(a, 0.0);
  return f.numerical_rank > 0 ? f.sigma(0) : 0.0;
}

double residual_norm(const Matrix& a, const Vector& x, const Vector& b) {
  if (a.cols() != x.size() || a.rows() != b.size()) {
    throw DimensionError("residual_norm: A is " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + ", x has " + std::to_string(x.size()) +
                         ", b has " + std::to_string(b.size()));
  }
  return (a * x - b).norm();
}

}  // namespace sparse_lsq
