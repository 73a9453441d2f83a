#include "dig/spectral.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "dig/errors.hpp"
#include "dig/kernels.hpp"
#include "dig/model.hpp"

namespace dig {
namespace {

// Pade approximants of degree 3..13 and the norm bounds under which each is
// accurate to double precision (Higham 2005).
constexpr std::array<double, 4> kTheta{1.495585217958292e-2, 2.539398330063230e-1, 9.504178996162932e-1,
                                       2.097847961257068e0};
constexpr double kTheta13 = 5.371920351148152;

constexpr std::array<double, 4> kB3{120.0, 60.0, 12.0, 1.0};
constexpr std::array<double, 6> kB5{30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
constexpr std::array<double, 8> kB7{17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0};
constexpr std::array<double, 10> kB9{17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
                                     2162160.0,     110880.0,     3960.0,       90.0,        1.0};
constexpr std::array<double, 14> kB13{64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                      1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                      670442572800.0,      33522128640.0,       1323241920.0,
                                      40840800.0,          960960.0,            16380.0,
                                      182.0,               1.0};

Matrix add_scaled(Matrix acc, double s, const Matrix& m) {
  kernels::axpy(acc.size() * acc.size(), s, m.data(), acc.data());
  return acc;
}

template <std::size_t N>
Matrix pade_low(const Matrix& a, const std::array<double, N>& b) {
  const std::size_t n = a.size();
  const Matrix a2 = a * a;
  Matrix u_inner = Matrix::identity(n) * b[1];
  Matrix v = Matrix::identity(n) * b[0];
  Matrix power = Matrix::identity(n);
  for (std::size_t k = 2; k < N; k += 2) {
    power = power * a2;
    u_inner = add_scaled(std::move(u_inner), b[k + 1], power);
    v = add_scaled(std::move(v), b[k], power);
  }
  const Matrix u = a * u_inner;
  return solve(v - u, v + u);
}

Matrix pade13(const Matrix& a) {
  const std::size_t n = a.size();
  const auto& b = kB13;
  const Matrix id = Matrix::identity(n);
  const Matrix a2 = a * a;
  const Matrix a4 = a2 * a2;
  const Matrix a6 = a4 * a2;
  Matrix inner_u = add_scaled(add_scaled(a6 * b[13], b[11], a4), b[9], a2);
  Matrix u = a6 * inner_u;
  u = add_scaled(add_scaled(add_scaled(add_scaled(std::move(u), b[7], a6), b[5], a4), b[3], a2), b[1], id);
  u = a * u;
  Matrix inner_v = add_scaled(add_scaled(a6 * b[12], b[10], a4), b[8], a2);
  Matrix v = a6 * inner_v;
  v = add_scaled(add_scaled(add_scaled(add_scaled(std::move(v), b[6], a6), b[4], a4), b[2], a2), b[0], id);
  return solve(v - u, v + u);
}

double normalize_max(Matrix& m) {
  const double c = max_abs(m);
  if (c > 0.0 && std::isfinite(c)) m *= 1.0 / c;
  return c;
}

Eigen::MatrixXd to_eigen(const Matrix& a) {
  const auto n = static_cast<Eigen::Index>(a.size());
  Eigen::MatrixXd e(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) e(i, j) = a(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  return e;
}

double residual_of(const Matrix& a, const Vector& v, double root) {
  const Vector av = a * v;
  double r = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) r = std::max(r, std::abs(av[i] - root * v[i]));
  return r;
}

// Eigenpair with the largest real part, eigenvector made positive-sum and
// normalized; entries are taken in absolute value to remove rounding signs.
PerronPair dense_dominant(const Matrix& a) {
  if (!all_finite(a)) throw NumericalError("NonFiniteMatrix", "eigenproblem with non-finite entries");
  Eigen::EigenSolver<Eigen::MatrixXd> solver(to_eigen(a), true);
  if (solver.info() != Eigen::Success) throw NumericalError("NoConvergence", "dense eigensolver failed");
  const auto& values = solver.eigenvalues();
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < values.size(); ++i)
    if (values[i].real() > values[best].real()) best = i;
  PerronPair out;
  out.root = values[best].real();
  out.vector.resize(a.size());
  const Eigen::MatrixXcd vectors = solver.eigenvectors();
  const auto col = vectors.col(best);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += col[static_cast<Eigen::Index>(i)].real();
  for (std::size_t i = 0; i < a.size(); ++i) out.vector[i] = std::abs(col[static_cast<Eigen::Index>(i)].real());
  if (s == 0.0 || sum(out.vector) == 0.0) throw NumericalError("NoConvergence", "degenerate dominant eigenvector");
  normalize_sum(out.vector);
  out.residual = residual_of(a, out.vector, out.root);
  out.dense_fallback = true;
  return out;
}

// Collatz-Wielandt bounds min_i (w pi)_i / pi_i <= root <= max_i (w pi)_i / pi_i.
std::pair<double, double> cw_bounds(const Matrix& w, const Vector& pi) {
  const Vector z = w * pi;
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (std::size_t i = 0; i < pi.size(); ++i) {
    const double r = z[i] / pi[i];
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  return {lo, hi};
}

// Power iteration on (w + cI)^(2^e), c near the root: the shift removes
// eigenvalues of the same modulus as the root (nearly imprimitive matrices),
// each epoch of 64 steps doubles the power, and stopping on the bounds above
// certifies the root using non-negative arithmetic only.
PerronPair power_iteration(const Matrix& x, double tol) {
  const std::size_t n = x.size();
  Matrix w = x;
  const double scale = normalize_max(w);
  Vector pi(n, 1.0 / static_cast<double>(n));
  bool converged = false;
  int it = 0;
  int epoch = 0;
  Matrix step;
  while (it < kPerronMaxIterations && !converged) {
    const auto [lo, hi] = cw_bounds(w, pi);
    if (!(hi > 0.0) || !std::isfinite(hi)) break;
    step = w;
    for (std::size_t i = 0; i < n; ++i) step(i, i) += 0.5 * (lo + hi);
    normalize_max(step);
    for (int e = 0; e < std::min(epoch, 60); ++e) {
      step = step * step;
      normalize_max(step);
    }
    ++epoch;
    for (int k = 0; k < 64 && it < kPerronMaxIterations; ++k, ++it) {
      Vector y = step * pi;
      const double s = sum(y);
      if (!(s > 0.0) || !std::isfinite(s)) break;
      for (double& v : y) v /= s;
      if (std::any_of(y.begin(), y.end(), [](double v) { return !(v > 0.0); })) break;
      pi = std::move(y);
      const auto [l, h] = cw_bounds(w, pi);
      if (h - l <= tol * h) {
        converged = true;
        ++it;
        break;
      }
    }
  }
  const bool positive = std::all_of(pi.begin(), pi.end(), [](double v) { return v > 0.0; });
  if (!converged || !positive) return dense_dominant(x);
  PerronPair out;
  const Vector wp = w * pi;
  out.root = sum(wp) * scale;
  out.vector = std::move(pi);
  out.residual = residual_of(x, out.vector, out.root);
  out.iterations = it;
  return out;
}

}  // namespace

namespace {

// Uniformization: a + sI >= 0, so the Taylor series and the squarings only
// ever add and multiply non-negative numbers and each entry keeps its relative
// accuracy, however small it is next to the largest one.
ScaledMatrix expm_metzler(Matrix a) {
  const std::size_t n = a.size();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s = std::max(s, -a(i, i));
  for (std::size_t i = 0; i < n; ++i) a(i, i) += s;
  const double norm = norm_1(a);
  const int squarings = norm > 0.5 ? static_cast<int>(std::ceil(std::log2(norm / 0.5))) : 0;
  a *= std::ldexp(1.0, -squarings);

  ScaledMatrix out;
  out.matrix = Matrix::identity(n);
  Matrix term = Matrix::identity(n);
  for (int j = 1; j <= 100; ++j) {
    term = term * a;
    term *= 1.0 / j;
    bool done = true;
    for (std::size_t k = 0; k < n * n; ++k) {
      out.matrix.data()[k] += term.data()[k];
      if (term.data()[k] > 1e-17 * out.matrix.data()[k]) done = false;
    }
    if (done) break;
  }
  out.log_scale = std::log(normalize_max(out.matrix));
  for (int k = 0; k < squarings; ++k) {
    out.matrix = out.matrix * out.matrix;
    out.log_scale = 2.0 * out.log_scale + std::log(normalize_max(out.matrix));
  }
  out.log_scale -= s;
  return out;
}

}  // namespace

ScaledMatrix expm_scaled(const Matrix& m, double t) {
  if (!all_finite(m) || !std::isfinite(t)) throw ValidationError("NonFiniteInput", "expm of a non-finite matrix");
  const std::size_t n = m.size();
  Matrix a = m * t;
  if (is_metzler(a)) {
    ScaledMatrix out = expm_metzler(std::move(a));
    if (!all_finite(out.matrix) || !std::isfinite(out.log_scale))
      throw NumericalError("Overflow", "matrix exponential is not representable");
    return out;
  }
  double shift = 0.0;
  for (std::size_t i = 0; i < n; ++i) shift += a(i, i);
  shift /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) a(i, i) -= shift;

  const double norm = norm_1(a);
  ScaledMatrix out;
  int squarings = 0;
  if (norm <= kTheta[0]) {
    out.matrix = pade_low(a, kB3);
  } else if (norm <= kTheta[1]) {
    out.matrix = pade_low(a, kB5);
  } else if (norm <= kTheta[2]) {
    out.matrix = pade_low(a, kB7);
  } else if (norm <= kTheta[3]) {
    out.matrix = pade_low(a, kB9);
  } else {
    squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm / kTheta13))));
    a *= std::ldexp(1.0, -squarings);
    out.matrix = pade13(a);
  }
  out.log_scale = std::log(normalize_max(out.matrix));
  for (int k = 0; k < squarings; ++k) {
    out.matrix = out.matrix * out.matrix;
    out.log_scale = 2.0 * out.log_scale + std::log(normalize_max(out.matrix));
  }
  out.log_scale += shift;
  if (!all_finite(out.matrix) || !std::isfinite(out.log_scale))
    throw NumericalError("Overflow", "matrix exponential is not representable");
  return out;
}

Matrix expm(const Matrix& m, double t) {
  ScaledMatrix s = expm_scaled(m, t);
  if (s.log_scale > std::log(std::numeric_limits<double>::max()))
    throw NumericalError("Overflow", "matrix exponential overflows double precision");
  s.matrix *= std::exp(s.log_scale);
  if (!all_finite(s.matrix)) throw NumericalError("Overflow", "matrix exponential overflows double precision");
  return s.matrix;
}

ScaledMatrix multiply(const ScaledMatrix& a, const ScaledMatrix& b) {
  ScaledMatrix out{a.matrix * b.matrix, a.log_scale + b.log_scale};
  const double c = normalize_max(out.matrix);
  if (!(c > 0.0)) throw NumericalError("Underflow", "product of scaled matrices vanished");
  out.log_scale += std::log(c);
  return out;
}

PerronPair perron_positive(const Matrix& x, double tol) {
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j)
      if (!(x(i, j) > 0.0))
        throw NumericalError("NotPositive", "entry (" + std::to_string(i) + ", " + std::to_string(j) +
                                                ") is not strictly positive");
  return power_iteration(x, tol);
}

PerronPair perron_nonnegative(const Matrix& x, double tol) {
  if (min_entry(x) < 0.0) throw NumericalError("NotPositive", "matrix has negative entries");
  return power_iteration(x, tol);
}

PerronPair perron_frobenius_metzler(const Matrix& a, double tol) {
  if (!is_metzler(a)) throw ValidationError("NotMetzler", "matrix has negative off-diagonal entries");
  if (!strongly_connected(a, kEdgeThreshold)) throw NumericalError("Reducible", "Metzler matrix is reducible");
  PerronPair out = dense_dominant(a);
  out.dense_fallback = false;
  const double scale = std::max(1.0, norm_inf(a));
  if (out.residual > std::max(tol, 1e-13) * scale * 1e3)
    throw NumericalError("NoConvergence", "Perron-Frobenius residual too large");
  return out;
}

Vector kernel_vector(const Matrix& l) {
  const std::size_t n = l.size();
  if (!strongly_connected(l, kEdgeThreshold)) throw NumericalError("Reducible", "migration matrix is reducible");
  Vector delta(n);
  const double sign = (n - 1) % 2 == 0 ? 1.0 : -1.0;
  for (std::size_t i = 0; i < n; ++i) delta[i] = sign * determinant(minor_matrix(l, i, i));
  normalize_sum(delta);
  for (double v : delta)
    if (!(v > 0.0)) throw NumericalError("Reducible", "kernel vector is not strictly positive");
  return delta;
}

double spectral_abscissa(const Matrix& a) {
  if (!all_finite(a)) throw NumericalError("NonFiniteMatrix", "eigenproblem with non-finite entries");
  Eigen::EigenSolver<Eigen::MatrixXd> solver(to_eigen(a), false);
  if (solver.info() != Eigen::Success) throw NumericalError("NoConvergence", "dense eigensolver failed");
  return solver.eigenvalues().real().maxCoeff();
}

double spectral_radius(const Matrix& a) {
  if (!all_finite(a)) throw NumericalError("NonFiniteMatrix", "eigenproblem with non-finite entries");
  Eigen::EigenSolver<Eigen::MatrixXd> solver(to_eigen(a), false);
  if (solver.info() != Eigen::Success) throw NumericalError("NoConvergence", "dense eigensolver failed");
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

double metzler_abscissa(const Matrix& a) {
  if (strongly_connected(a, kEdgeThreshold)) return perron_frobenius_metzler(a).root;
  return spectral_abscissa(a);
}

}  // namespace dig
