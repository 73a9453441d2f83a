#include "dig/linalg.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dig/errors.hpp"
#include "dig/kernels.hpp"

namespace dig {

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) : n_(rows.size()) {
  data_.reserve(n_ * n_);
  for (const auto& row : rows) {
    if (row.size() != n_) throw std::invalid_argument("Matrix: rows must form a square matrix");
    data_.insert(data_.end(), row.begin(), row.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> diag) {
  Matrix m(diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

Vector Matrix::diag() const {
  Vector d(n_);
  for (std::size_t i = 0; i < n_; ++i) d[i] = (*this)(i, i);
  return d;
}

Matrix Matrix::transposed() const {
  Matrix t(n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Matrix& Matrix::operator+=(const Matrix& rhs) {
  assert(rhs.n_ == n_);
  kernels::axpy(data_.size(), 1.0, rhs.data(), data());
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& rhs) {
  assert(rhs.n_ == n_);
  kernels::axpy(data_.size(), -1.0, rhs.data(), data());
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Matrix operator+(Matrix lhs, const Matrix& rhs) { return lhs += rhs; }
Matrix operator-(Matrix lhs, const Matrix& rhs) { return lhs -= rhs; }
Matrix operator*(Matrix lhs, double s) { return lhs *= s; }
Matrix operator*(double s, Matrix rhs) { return rhs *= s; }

Matrix operator*(const Matrix& lhs, const Matrix& rhs) {
  assert(lhs.size() == rhs.size());
  Matrix out(lhs.size());
  kernels::gemm(lhs.size(), lhs.data(), rhs.data(), out.data());
  return out;
}

Vector operator*(const Matrix& lhs, std::span<const double> x) {
  assert(x.size() == lhs.size());
  Vector y(lhs.size());
  kernels::gemv(lhs.size(), lhs.data(), x.data(), y.data());
  return y;
}

double norm_inf(const Matrix& a) {
  double best = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) row += std::abs(a(i, j));
    best = std::max(best, row);
  }
  return best;
}

double norm_1(const Matrix& a) {
  double best = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    double col = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) col += std::abs(a(i, j));
    best = std::max(best, col);
  }
  return best;
}

double max_abs(const Matrix& a) {
  double best = 0.0;
  for (double v : a.values()) best = std::max(best, std::abs(v));
  return best;
}

double min_entry(const Matrix& a) {
  double best = std::numeric_limits<double>::infinity();
  for (double v : a.values()) best = std::min(best, v);
  return best;
}

bool all_finite(const Matrix& a) {
  return std::all_of(a.values().begin(), a.values().end(), [](double v) { return std::isfinite(v); });
}

double norm_inf(std::span<const double> x) {
  double best = 0.0;
  for (double v : x) best = std::max(best, std::abs(v));
  return best;
}

double sum(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s;
}

double normalize_sum(std::span<double> x) {
  const double s = sum(x);
  for (double& v : x) v /= s;
  return s;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double best = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) best = std::max(best, std::abs(a[i] - b[i]));
  return best;
}

namespace {

struct LuFactors {
  Matrix lu;
  std::vector<std::size_t> perm;
  int sign = 1;
  bool singular = false;
};

LuFactors lu_decompose(const Matrix& a) {
  const std::size_t n = a.size();
  LuFactors f{a, std::vector<std::size_t>(n), 1, false};
  for (std::size_t i = 0; i < n; ++i) f.perm[i] = i;
  Matrix& lu = f.lu;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pivot = k;
    double best = std::abs(lu(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(lu(i, k)) > best) {
        best = std::abs(lu(i, k));
        pivot = i;
      }
    }
    if (best == 0.0) {
      f.singular = true;
      continue;
    }
    if (pivot != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu(k, j), lu(pivot, j));
      std::swap(f.perm[k], f.perm[pivot]);
      f.sign = -f.sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double factor = lu(i, k) / lu(k, k);
      lu(i, k) = factor;
      for (std::size_t j = k + 1; j < n; ++j) lu(i, j) -= factor * lu(k, j);
    }
  }
  return f;
}

}  // namespace

Matrix solve(const Matrix& a, const Matrix& b) {
  const std::size_t n = a.size();
  const LuFactors f = lu_decompose(a);
  if (f.singular) throw NumericalError("SingularMatrix", "linear solve with a singular matrix");
  Matrix x(n);
  for (std::size_t col = 0; col < n; ++col) {
    Vector y(n);
    for (std::size_t i = 0; i < n; ++i) {
      double s = b(f.perm[i], col);
      for (std::size_t k = 0; k < i; ++k) s -= f.lu(i, k) * y[k];
      y[i] = s;
    }
    for (std::size_t ii = n; ii-- > 0;) {
      double s = y[ii];
      for (std::size_t k = ii + 1; k < n; ++k) s -= f.lu(ii, k) * x(k, col);
      x(ii, col) = s / f.lu(ii, ii);
    }
  }
  return x;
}

double determinant(const Matrix& a) {
  if (a.empty()) return 1.0;
  const LuFactors f = lu_decompose(a);
  if (f.singular) return 0.0;
  double det = f.sign;
  for (std::size_t i = 0; i < a.size(); ++i) det *= f.lu(i, i);
  return det;
}

Matrix minor_matrix(const Matrix& a, std::size_t r, std::size_t c) {
  const std::size_t n = a.size();
  Matrix m(n - 1);
  for (std::size_t i = 0, mi = 0; i < n; ++i) {
    if (i == r) continue;
    for (std::size_t j = 0, mj = 0; j < n; ++j) {
      if (j == c) continue;
      m(mi, mj++) = a(i, j);
    }
    ++mi;
  }
  return m;
}

bool is_metzler(const Matrix& a, double tol) {
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j)
      if (i != j && a(i, j) < -tol) return false;
  return true;
}

namespace {

// Nodes reachable from node 0 following edges j -> i (forward) or i -> j.
std::vector<bool> reachable(const Matrix& a, double threshold, bool forward) {
  const std::size_t n = a.size();
  std::vector<bool> seen(n, false);
  std::vector<std::size_t> stack{0};
  seen[0] = true;
  while (!stack.empty()) {
    const std::size_t j = stack.back();
    stack.pop_back();
    for (std::size_t i = 0; i < n; ++i) {
      if (i == j || seen[i]) continue;
      const double w = forward ? a(i, j) : a(j, i);
      if (w > threshold) {
        seen[i] = true;
        stack.push_back(i);
      }
    }
  }
  return seen;
}

}  // namespace

bool strongly_connected(const Matrix& a, double threshold) {
  if (a.size() <= 1) return true;
  const auto fwd = reachable(a, threshold, true);
  const auto bwd = reachable(a, threshold, false);
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!fwd[i] || !bwd[i]) return false;
  return true;
}

}  // namespace dig
