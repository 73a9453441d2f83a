#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace dig {

using Vector = std::vector<double>;

/// Square, row-major, dense matrix of doubles. Sizes here are tiny (patch
/// counts), so value semantics and copies are the norm.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> diag);

  std::size_t size() const noexcept { return n_; }
  bool empty() const noexcept { return n_ == 0; }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * n_ + j]; }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  std::span<const double> values() const noexcept { return data_; }

  Vector diag() const;
  Matrix transposed() const;

  Matrix& operator+=(const Matrix& rhs);
  Matrix& operator-=(const Matrix& rhs);
  Matrix& operator*=(double s);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix lhs, const Matrix& rhs);
Matrix operator-(Matrix lhs, const Matrix& rhs);
Matrix operator*(Matrix lhs, double s);
Matrix operator*(double s, Matrix rhs);
Matrix operator*(const Matrix& lhs, const Matrix& rhs);
Vector operator*(const Matrix& lhs, std::span<const double> x);

/// Maximum absolute row sum.
double norm_inf(const Matrix& a);
/// Maximum absolute column sum.
double norm_1(const Matrix& a);
double max_abs(const Matrix& a);
double min_entry(const Matrix& a);
bool all_finite(const Matrix& a);

double norm_inf(std::span<const double> x);
double sum(std::span<const double> x);
/// Divides `x` by its coordinate sum; returns the sum.
double normalize_sum(std::span<double> x);
double max_abs_diff(std::span<const double> a, std::span<const double> b);

/// Solves a * x = b (b holds several right-hand sides as columns) by LU with
/// partial pivoting. Throws NumericalError("SingularMatrix") on exact singularity.
Matrix solve(const Matrix& a, const Matrix& b);
double determinant(const Matrix& a);

/// Removes row `r` and column `c`.
Matrix minor_matrix(const Matrix& a, std::size_t r, std::size_t c);

/// True when every off-diagonal entry is >= -tol.
bool is_metzler(const Matrix& a, double tol = 0.0);

/// Strong connectivity of the directed graph with an edge j -> i whenever
/// a(i, j) > threshold (i != j). A 1x1 matrix is trivially connected.
bool strongly_connected(const Matrix& a, double threshold = 1e-14);

}  // namespace dig
