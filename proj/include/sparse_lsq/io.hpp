#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "sparse_lsq/linalg.hpp"
#include "sparse_lsq/random.hpp"

namespace sparse_lsq {

// Matrix Market (array or coordinate, real/integer/pattern, general or
// symmetric/skew-symmetric) when the first line starts with %%MatrixMarket,
// headerless CSV otherwise. Coordinate duplicates are summed.
Matrix read_matrix(std::istream& in, const std::string& source = "<stream>");
Matrix read_matrix_file(const std::filesystem::path& path);

// One real per line; blank lines and lines starting with '%' or '#' are skipped.
Vector read_vector(std::istream& in, const std::string& source = "<stream>");
Vector read_vector_file(const std::filesystem::path& path);

// Reads both files and checks that rows(A) == size(b).
std::pair<Matrix, Vector> ingest(const std::filesystem::path& matrix_path,
                                 const std::filesystem::path& vector_path);

void write_matrix_market(std::ostream& out, const Matrix& a);
void write_vector(std::ostream& out, const Vector& x);

// Shortest round-trip decimal form ('.' separator, no grouping).
std::string format_real(double value);

struct SyntheticSpec {
  Index m = 30;
  Index n = 20;
  Index k_true = 3;             // nonzeros in x_true
  double gamma = 0.5;           // sigma_i = gamma^(i-1)
  std::vector<double> spectrum; // overrides gamma when non-empty
  double noise = 0.0;           // eta
  std::uint64_t seed = 0;

  void validate() const;
  // Parses "m=30,n=20,gamma=0.5,eta=0.01,k_true=3,seed=7,spectrum=4:2:1".
  static SyntheticSpec parse(const std::string& text);
};

struct SyntheticProblem {
  Matrix a;
  Vector b;
  Vector x_true;
  Vector spectrum;  // singular values used to build a
};

// A = U diag(sigma) V^T with Haar-random orthonormal U, V drawn from the seed;
// b = A x_true + eta * N(0, I) with x_true supported on k_true random columns.
SyntheticProblem generate(const SyntheticSpec& spec);

// Haar-distributed rows x cols matrix with orthonormal columns (rows >= cols).
Matrix haar_orthonormal(Index rows, Index cols, Rng& rng);

}  // namespace sparse_lsq
