#pragma once

// Small dense linear algebra and lp-norm helpers. Everything is double
// precision, row-major, and sized for desk-scale recurrent models.

#include <cstddef>
#include <initializer_list>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rnncert {

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidNorm : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t len, double fill = 0.0) : data_(len, fill) {}
  Vector(std::initializer_list<double> values) : data_(values) {}
  explicit Vector(std::vector<double> values) : data_(std::move(values)) {}

  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> span() { return data_; }
  std::span<const double> span() const { return data_; }
  const std::vector<double>& values() const { return data_; }

  auto begin() { return data_.begin(); }
  auto end() { return data_.end(); }
  auto begin() const { return data_.begin(); }
  auto end() const { return data_.end(); }

  bool operator==(const Vector&) const = default;

 private:
  std::vector<double> data_;
};

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  /// Builds from nested rows; all rows must have equal length.
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  const std::vector<double>& values() const { return data_; }

  bool is_zero() const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Norm order p in [1, inf]. Infinity is represented by +inf.
inline constexpr double kInfNorm = std::numeric_limits<double>::infinity();

/// Parses "1", "2", "inf" (also any real >= 1).
double parse_norm(const std::string& text);
std::string format_norm(double p);

/// Hoelder conjugate q with 1/p + 1/q = 1.
double dual_exponent(double p);

/// ||w||_q. Equals max of w.delta over the unit ball of the conjugate norm.
double dual_norm(std::span<const double> w, double q);
inline double dual_norm(const Vector& w, double q) { return dual_norm(w.span(), q); }

double lp_norm(std::span<const double> v, double p);
inline double lp_norm(const Vector& v, double p) { return lp_norm(v.span(), p); }

double dot(std::span<const double> a, std::span<const double> b);

Vector matvec(const Matrix& a, const Vector& x);
/// x^T A, i.e. A^T x.
Vector matvec_transposed(const Matrix& a, const Vector& x);
Vector hadamard(const Vector& a, const Vector& b);
/// A x + b.
Vector affine(const Matrix& a, const Vector& x, const Vector& b);
Vector add(const Vector& a, const Vector& b);
Vector subtract(const Vector& a, const Vector& b);

Matrix matmul(const Matrix& a, const Matrix& b);
/// a += b
void add_in_place(Matrix& a, const Matrix& b);
void add_in_place(Vector& a, const Vector& b);

bool all_finite(std::span<const double> values);

}  // namespace rnncert
