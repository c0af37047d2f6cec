#include "rnncert/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rnncert {

namespace {

std::string shape_str(std::size_t r, std::size_t c) {
  std::ostringstream os;
  os << r << "x" << c;
  return os.str();
}

void require_same_size(const Vector& a, const Vector& b, const char* op) {
  if (a.size() != b.size()) {
    throw ShapeError(std::string(op) + ": length " + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()));
  }
}

}  // namespace

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ShapeError("Matrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  Matrix m(rows.size(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) throw ShapeError("Matrix: ragged rows");
    std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
  }
  return m;
}

bool Matrix::is_zero() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return v == 0.0; });
}

double parse_norm(const std::string& text) {
  if (text == "inf" || text == "Inf" || text == "INF" || text == "infinity") return kInfNorm;
  double p = 0.0;
  try {
    std::size_t used = 0;
    p = std::stod(text, &used);
    if (used != text.size()) throw InvalidNorm("invalid norm order '" + text + "'");
  } catch (const std::logic_error&) {
    throw InvalidNorm("invalid norm order '" + text + "'");
  }
  if (!(p >= 1.0)) throw InvalidNorm("norm order must be >= 1, got '" + text + "'");
  return p;
}

std::string format_norm(double p) {
  if (std::isinf(p)) return "inf";
  std::ostringstream os;
  os << p;
  return os.str();
}

double dual_exponent(double p) {
  if (std::isnan(p) || p < 1.0) throw InvalidNorm("norm order must be >= 1");
  if (std::isinf(p)) return 1.0;
  if (p == 1.0) return kInfNorm;
  return p / (p - 1.0);
}

double lp_norm(std::span<const double> v, double p) {
  if (std::isnan(p) || p < 1.0) throw InvalidNorm("norm order must be >= 1");
  if (std::isinf(p)) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }
  if (p == 1.0) {
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return s;
  }
  if (p == 2.0) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
  }
  // Scale by the max magnitude so large p does not overflow.
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  if (m == 0.0) return 0.0;
  double s = 0.0;
  for (double x : v) s += std::pow(std::abs(x) / m, p);
  return m * std::pow(s, 1.0 / p);
}

double dual_norm(std::span<const double> w, double q) { return lp_norm(w, q); }

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ShapeError("dot: length " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Vector matvec(const Matrix& a, const Vector& x) {
  if (a.cols() != x.size()) {
    throw ShapeError("matvec: " + shape_str(a.rows(), a.cols()) + " times length " +
                     std::to_string(x.size()));
  }
  Vector y(a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r) y[r] = dot(a.row(r), x.span());
  return y;
}

Vector matvec_transposed(const Matrix& a, const Vector& x) {
  if (a.rows() != x.size()) {
    throw ShapeError("matvec_transposed: " + shape_str(a.rows(), a.cols()) +
                     " against length " + std::to_string(x.size()));
  }
  Vector y(a.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const double xr = x[r];
    if (xr == 0.0) continue;
    auto row = a.row(r);
    for (std::size_t c = 0; c < a.cols(); ++c) y[c] += xr * row[c];
  }
  return y;
}

Vector hadamard(const Vector& a, const Vector& b) {
  require_same_size(a, b, "hadamard");
  Vector y(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) y[i] = a[i] * b[i];
  return y;
}

Vector affine(const Matrix& a, const Vector& x, const Vector& b) {
  Vector y = matvec(a, x);
  require_same_size(y, b, "affine");
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += b[i];
  return y;
}

Vector add(const Vector& a, const Vector& b) {
  require_same_size(a, b, "add");
  Vector y(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) y[i] = a[i] + b[i];
  return y;
}

Vector subtract(const Vector& a, const Vector& b) {
  require_same_size(a, b, "subtract");
  Vector y(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) y[i] = a[i] - b[i];
  return y;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: " + shape_str(a.rows(), a.cols()) + " times " +
                     shape_str(b.rows(), b.cols()));
  }
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto out = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto brow = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) out[j] += aik * brow[j];
    }
  }
  return c;
}

void add_in_place(Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError("add_in_place: " + shape_str(a.rows(), a.cols()) + " vs " +
                     shape_str(b.rows(), b.cols()));
  }
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto dst = a.row(r);
    auto src = b.row(r);
    for (std::size_t c = 0; c < a.cols(); ++c) dst[c] += src[c];
  }
}

void add_in_place(Vector& a, const Vector& b) {
  require_same_size(a, b, "add_in_place");
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
}

bool all_finite(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace rnncert
