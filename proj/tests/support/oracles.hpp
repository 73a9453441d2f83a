#pragma once

// Independent reference computations for the tests. Everything here uses
// Eigen directly and its own integrators; none of it calls the library's
// numerical routines.

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <vector>

#include "dig/model.hpp"

namespace oracle {

/// Piecewise-constant model data in plain form.
struct RawModel {
  int n = 2;
  std::vector<double> breaks;         // starts of the pieces, breaks[0] = 0
  std::vector<Eigen::VectorXd> r;     // growth rates per piece
  std::vector<Eigen::MatrixXd> l;     // migration matrices per piece

  double length(std::size_t k) const { return (k + 1 < breaks.size() ? breaks[k + 1] : 1.0) - breaks[k]; }
  Eigen::MatrixXd system(std::size_t k, double m) const;
};

/// Random model with `pieces` segments: rates in [-2, 2], every off-diagonal
/// migration entry in [0.1, 2] (irreducible everywhere). With constant_l the
/// same L is used on every piece.
RawModel random_model(std::mt19937_64& rng, int n, int pieces, bool constant_l);

dig::PatchModel to_model(const RawModel& raw);
dig::Matrix to_dig(const Eigen::MatrixXd& a);
Eigen::MatrixXd to_eigen(const dig::Matrix& a);

/// Matrix exponential from Eigen's unsupported MatrixFunctions module.
Eigen::MatrixXd expm(const Eigen::MatrixXd& a);

/// Largest real part of the eigenvalues.
double abscissa(const Eigen::MatrixXd& a);

/// lambda_max of a 2x2 matrix from its characteristic polynomial.
double lambda_max_2x2(double a, double b, double c, double d);

/// Positive kernel vector of an irreducible migration matrix, summing to 1.
Eigen::VectorXd kernel(const Eigen::MatrixXd& l);

/// Average of max_i r_i(tau) over the period.
double chi(const RawModel& raw);
/// Average of r_i over the period.
Eigen::VectorXd mean_growth(const RawModel& raw);
/// lambda_max of the period average of R + mL.
double lambda_T0(const RawModel& raw, double m);

/// Growth rate by classical RK4 on x' = A(t/T) x over `periods` periods with
/// renormalization every step; the slope of ln ||x||_1 over the second half.
double long_horizon_lambda(const RawModel& raw, double m, double T, int periods = 2000);

}  // namespace oracle
