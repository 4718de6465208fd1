#include "sparse_lsq/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string_view>

#include "sparse_lsq/errors.hpp"

namespace sparse_lsq {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_real(std::string_view token, const std::string& source, std::size_t line) {
  token = trim(token);
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  if (token.empty()) throw ParseError(source, line, "empty numeric field");
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size()) {
    throw ParseError(source, line, "cannot parse '" + std::string(token) + "' as a real number");
  }
  if (!std::isfinite(value)) {
    throw NonFiniteError(source + ":" + std::to_string(line) + ": non-finite entry '" +
                         std::string(token) + "'");
  }
  return value;
}

long parse_count(std::string_view token, const std::string& source, std::size_t line) {
  token = trim(token);
  long value = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size()) {
    throw ParseError(source, line, "cannot parse '" + std::string(token) + "' as an integer");
  }
  return value;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// Reads the next line that is neither blank nor a '%' comment.
bool next_data_line(std::istream& in, std::string& line, std::size_t& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t.front() == '%') continue;
    return true;
  }
  return false;
}

Matrix read_matrix_market(std::istream& in, const std::string& header, const std::string& source) {
  const auto fields = split_ws(header);
  if (fields.size() < 5 || lower(fields[1]) != "matrix") {
    throw ParseError(source, 1, "malformed MatrixMarket banner");
  }
  const std::string layout = lower(fields[2]);
  const std::string field = lower(fields[3]);
  const std::string symmetry = lower(fields[4]);
  if (layout != "array" && layout != "coordinate") {
    throw ParseError(source, 1, "unsupported MatrixMarket layout '" + layout + "'");
  }
  if (field != "real" && field != "integer" && field != "double" && field != "pattern") {
    throw ParseError(source, 1, "unsupported MatrixMarket field '" + field + "'");
  }
  if (symmetry != "general" && symmetry != "symmetric" && symmetry != "skew-symmetric") {
    throw ParseError(source, 1, "unsupported MatrixMarket symmetry '" + symmetry + "'");
  }
  if (layout == "array" && field == "pattern") {
    throw ParseError(source, 1, "pattern field is only valid for coordinate layout");
  }
  const bool mirrored = symmetry != "general";
  const double mirror_sign = symmetry == "skew-symmetric" ? -1.0 : 1.0;

  std::string line;
  std::size_t line_no = 1;
  if (!next_data_line(in, line, line_no)) throw ParseError(source, line_no, "missing size line");
  const auto size_fields = split_ws(line);
  const std::size_t expected_size_fields = layout == "array" ? 2 : 3;
  if (size_fields.size() != expected_size_fields) {
    throw ParseError(source, line_no, "size line needs " + std::to_string(expected_size_fields) +
                                          " integers");
  }
  const long rows = parse_count(size_fields[0], source, line_no);
  const long cols = parse_count(size_fields[1], source, line_no);
  if (rows <= 0 || cols <= 0) throw ParseError(source, line_no, "matrix dimensions must be positive");
  if (mirrored && rows != cols) throw ParseError(source, line_no, "symmetric matrix must be square");

  Matrix a = Matrix::Zero(rows, cols);
  if (layout == "array") {
    // Column-major; symmetric storage lists the lower triangle only.
    for (long j = 0; j < cols; ++j) {
      for (long i = mirrored ? j : 0; i < rows; ++i) {
        if (symmetry == "skew-symmetric" && i == j) continue;
        if (!next_data_line(in, line, line_no)) {
          throw ParseError(source, line_no, "array data ended early");
        }
        const auto vals = split_ws(line);
        if (vals.size() != 1) throw ParseError(source, line_no, "expected one value per line");
        const double v = parse_real(vals[0], source, line_no);
        a(i, j) = v;
        if (mirrored && i != j) a(j, i) = mirror_sign * v;
      }
    }
  } else {
    const long nnz = parse_count(size_fields[2], source, line_no);
    if (nnz < 0) throw ParseError(source, line_no, "negative entry count");
    const std::size_t per_line = field == "pattern" ? 2 : 3;
    for (long e = 0; e < nnz; ++e) {
      if (!next_data_line(in, line, line_no)) {
        throw ParseError(source, line_no, "coordinate data ended early");
      }
      const auto vals = split_ws(line);
      if (vals.size() != per_line) {
        throw ParseError(source, line_no, "expected " + std::to_string(per_line) + " fields");
      }
      const long i = parse_count(vals[0], source, line_no) - 1;
      const long j = parse_count(vals[1], source, line_no) - 1;
      if (i < 0 || i >= rows || j < 0 || j >= cols) {
        throw ParseError(source, line_no, "entry index out of range");
      }
      const double v = field == "pattern" ? 1.0 : parse_real(vals[2], source, line_no);
      a(i, j) += v;
      if (mirrored && i != j) a(j, i) += mirror_sign * v;
    }
  }
  if (next_data_line(in, line, line_no)) {
    throw ParseError(source, line_no, "unexpected trailing data");
  }
  return a;
}

Matrix read_csv(std::istream& in, const std::string& first_line, const std::string& source) {
  std::vector<std::vector<double>> rows;
  std::string line = first_line;
  std::size_t line_no = 1;
  bool have = true;
  while (have) {
    const auto t = trim(line);
    if (!t.empty()) {
      std::vector<double> row;
      std::size_t start = 0;
      while (true) {
        const auto comma = t.find(',', start);
        row.push_back(parse_real(t.substr(start, comma - start), source, line_no));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
      }
      if (!rows.empty() && row.size() != rows.front().size()) {
        throw ParseError(source, line_no,
                         "row has " + std::to_string(row.size()) + " fields, expected " +
                             std::to_string(rows.front().size()));
      }
      rows.push_back(std::move(row));
    }
    have = static_cast<bool>(std::getline(in, line));
    ++line_no;
  }
  if (rows.empty()) throw ParseError(source, line_no, "no data rows");
  Matrix a(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      a(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    }
  }
  return a;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  return in;
}

}  // namespace

Matrix read_matrix(std::istream& in, const std::string& source) {
  std::string first;
  if (!std::getline(in, first)) throw ParseError(source, 1, "empty matrix file");
  if (first.rfind("%%MatrixMarket", 0) == 0) return read_matrix_market(in, first, source);
  return read_csv(in, first, source);
}

Matrix read_matrix_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_matrix(in, path.string());
}

Vector read_vector(std::istream& in, const std::string& source) {
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t.front() == '%' || t.front() == '#') continue;
    values.push_back(parse_real(t, source, line_no));
  }
  if (values.empty()) throw ParseError(source, line_no, "vector file has no entries");
  return Eigen::Map<Vector>(values.data(), static_cast<Index>(values.size()));
}

Vector read_vector_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_vector(in, path.string());
}

std::pair<Matrix, Vector> ingest(const std::filesystem::path& matrix_path,
                                 const std::filesystem::path& vector_path) {
  Matrix a = read_matrix_file(matrix_path);
  Vector b = read_vector_file(vector_path);
  if (a.rows() != b.size()) {
    throw DimensionError("matrix '" + matrix_path.string() + "' has " + std::to_string(a.rows()) +
                         " rows but vector '" + vector_path.string() + "' has " +
                         std::to_string(b.size()) + " entries");
  }
  return {std::move(a), std::move(b)};
}

std::string format_real(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  (void)ec;
  return std::string(buf, ptr);
}

void write_matrix_market(std::ostream& out, const Matrix& a) {
  out << "%%MatrixMarket matrix array real general\n" << a.rows() << ' ' << a.cols() << '\n';
  for (Index j = 0; j < a.cols(); ++j) {
    for (Index i = 0; i < a.rows(); ++i) out << format_real(a(i, j)) << '\n';
  }
}

void write_vector(std::ostream& out, const Vector& x) {
  for (Index i = 0; i < x.size(); ++i) out << format_real(x(i)) << '\n';
}

void SyntheticSpec::validate() const {
  if (m < 2 || n < 2) throw ConfigError("synthetic m and n must be at least 2");
  if (k_true < 0 || k_true > n) throw ConfigError("k_true must lie in [0, n]");
  if (spectrum.empty() && !(gamma > 0.0 && gamma <= 1.0)) {
    throw ConfigError("gamma must lie in (0, 1]");
  }
  if (static_cast<Index>(spectrum.size()) > std::min(m, n)) {
    throw ConfigError("explicit spectrum is longer than min(m, n)");
  }
  for (double s : spectrum) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw ConfigError("spectrum entries must be >= 0");
  }
  if (!(noise >= 0.0) || !std::isfinite(noise)) throw ConfigError("noise level must be >= 0");
}

SyntheticSpec SyntheticSpec::parse(const std::string& text) {
  SyntheticSpec spec;
  std::stringstream ss(text);
  std::string item;
  const std::string source = "--generate";
  while (std::getline(ss, item, ',')) {
    const auto t = trim(item);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) throw ParseError(source, 1, "expected KEY=VAL, got '" + std::string(t) + "'");
    const std::string key = lower(trim(t.substr(0, eq)));
    const auto val = trim(t.substr(eq + 1));
    if (key == "m") {
      spec.m = parse_count(val, source, 1);
    } else if (key == "n") {
      spec.n = parse_count(val, source, 1);
    } else if (key == "k_true" || key == "k") {
      spec.k_true = parse_count(val, source, 1);
    } else if (key == "gamma") {
      spec.gamma = parse_real(val, source, 1);
    } else if (key == "eta" || key == "noise") {
      spec.noise = parse_real(val, source, 1);
    } else if (key == "seed") {
      std::uint64_t seed = 0;
      const auto [ptr, ec] = std::from_chars(val.data(), val.data() + val.size(), seed);
      if (ec != std::errc{} || ptr != val.data() + val.size()) {
        throw ParseError(source, 1, "bad seed '" + std::string(val) + "'");
      }
      spec.seed = seed;
    } else if (key == "spectrum") {
      spec.spectrum.clear();
      std::size_t start = 0;
      while (true) {
        const auto colon = val.find(':', start);
        spec.spectrum.push_back(parse_real(val.substr(start, colon - start), source, 1));
        if (colon == std::string_view::npos) break;
        start = colon + 1;
      }
    } else {
      throw ParseError(source, 1, "unknown generator key '" + key + "'");
    }
  }
  spec.validate();
  return spec;
}

Matrix haar_orthonormal(Index rows, Index cols, Rng& rng) {
  Matrix g(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) g(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(rows, cols);
  const Matrix& r = qr.matrixQR();
  for (Index j = 0; j < cols; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

SyntheticProblem generate(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const Index p = std::min(spec.m, spec.n);

  SyntheticProblem out;
  out.spectrum = Vector::Zero(p);
  if (spec.spectrum.empty()) {
    for (Index i = 0; i < p; ++i) out.spectrum(i) = std::pow(spec.gamma, static_cast<double>(i));
  } else {
    for (std::size_t i = 0; i < spec.spectrum.size(); ++i) {
      out.spectrum(static_cast<Index>(i)) = spec.spectrum[i];
    }
  }

  const Matrix u = haar_orthonormal(spec.m, p, rng);
  const Matrix v = haar_orthonormal(spec.n, p, rng);
  out.a = u * out.spectrum.asDiagonal() * v.transpose();

  std::vector<Index> columns(static_cast<std::size_t>(spec.n));
  std::iota(columns.begin(), columns.end(), Index{0});
  out.x_true = Vector::Zero(spec.n);
  for (Index i = 0; i < spec.k_true; ++i) {
    const auto remaining = static_cast<double>(spec.n - i);
    const auto pick = i + std::min(static_cast<Index>(rng.uniform() * remaining), spec.n - i - 1);
    std::swap(columns[static_cast<std::size_t>(i)], columns[static_cast<std::size_t>(pick)]);
    out.x_true(columns[static_cast<std::size_t>(i)]) = rng.normal();
  }

  out.b = out.a * out.x_true;
  if (spec.noise > 0.0) {
    for (Index i = 0; i < spec.m; ++i) out.b(i) += spec.noise * rng.normal();
  }
  return out;
}

}  // namespace sparse_lsq
