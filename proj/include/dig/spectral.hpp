#pragma once

#include "dig/linalg.hpp"

namespace dig {

struct PerronPair {
  double root = 0.0;
  Vector vector;          // strictly positive, sums to 1
  double residual = 0.0;  // ||A v - root v||_inf
  int iterations = 0;
  bool dense_fallback = false;
};

/// e^{tM} as (matrix, log_scale) with e^{tM} = e^{log_scale} * matrix and
/// max |matrix| = 1 (or the zero matrix's scale 0). Entries that would
/// overflow a plain exponential stay representable.
struct ScaledMatrix {
  Matrix matrix;
  double log_scale = 0.0;
};

/// Metzler input (the only kind a patch model produces) is exponentiated by
/// uniformization, which is accurate entry by entry; anything else by Pade(13)
/// scaling and squaring. Throws NumericalError("Overflow") when the
/// unscaled result is not representable, ValidationError("NonFiniteInput").
Matrix expm(const Matrix& m, double t = 1.0);
ScaledMatrix expm_scaled(const Matrix& m, double t = 1.0);

/// Product a * b renormalized so the largest entry is 1.
ScaledMatrix multiply(const ScaledMatrix& a, const ScaledMatrix& b);

inline constexpr double kPerronTolerance = 1e-12;
inline constexpr int kPerronMaxIterations = 100000;

/// Perron root and vector of an entrywise positive matrix by power
/// iteration (with periodic squaring to speed up slow contraction); falls
/// back to a dense eigensolver when the iteration does not settle.
/// Throws NumericalError("NotPositive") naming the first entry <= 0.
PerronPair perron_positive(const Matrix& x, double tol = kPerronTolerance);

/// Same for a nonnegative primitive matrix (zeros allowed); used when a
/// positive matrix has entries that underflowed.
PerronPair perron_nonnegative(const Matrix& x, double tol = kPerronTolerance);

/// Perron-Frobenius root (spectral abscissa) and vector of an irreducible
/// Metzler matrix. Throws ValidationError("NotMetzler") or
/// NumericalError("Reducible").
PerronPair perron_frobenius_metzler(const Matrix& a, double tol = kPerronTolerance);

/// Positive kernel vector of an irreducible migration matrix (columns summing
/// to zero), from the diagonal cofactors, normalized to sum 1.
Vector kernel_vector(const Matrix& l);

/// max Re(lambda) over the spectrum (dense eigensolver); defined for any
/// real matrix, reducible or not.
double spectral_abscissa(const Matrix& a);

/// Largest eigenvalue modulus (dense eigensolver).
double spectral_radius(const Matrix& a);

/// lambda_max of a Metzler matrix: the Perron-Frobenius root when
/// irreducible, the dense spectral abscissa otherwise.
double metzler_abscissa(const Matrix& a);

}  // namespace dig
