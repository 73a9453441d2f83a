#include "oracles.hpp"

#include <unsupported/Eigen/MatrixFunctions>
#include <algorithm>
#include <cmath>

namespace oracle {

Eigen::MatrixXd RawModel::system(std::size_t k, double m) const {
  Eigen::MatrixXd a = m * l[k];
  a.diagonal() += r[k];
  return a;
}

RawModel random_model(std::mt19937_64& rng, int n, int pieces, bool constant_l) {
  std::uniform_real_distribution<double> rate(-2.0, 2.0);
  std::uniform_real_distribution<double> flow(0.1, 2.0);
  std::uniform_real_distribution<double> cut(0.05, 0.95);
  RawModel raw;
  raw.n = n;
  raw.breaks = {0.0};
  for (int k = 1; k < pieces; ++k) raw.breaks.push_back(cut(rng));
  std::sort(raw.breaks.begin(), raw.breaks.end());
  raw.breaks.erase(std::unique(raw.breaks.begin(), raw.breaks.end()), raw.breaks.end());
  auto random_l = [&] {
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j) l(i, j) = flow(rng);
    for (int j = 0; j < n; ++j) l(j, j) = -(l.col(j).sum());
    return l;
  };
  const Eigen::MatrixXd shared = random_l();
  for (std::size_t k = 0; k < raw.breaks.size(); ++k) {
    Eigen::VectorXd r(n);
    for (int i = 0; i < n; ++i) r[i] = rate(rng);
    raw.r.push_back(r);
    raw.l.push_back(constant_l ? shared : random_l());
  }
  return raw;
}

dig::Matrix to_dig(const Eigen::MatrixXd& a) {
  dig::Matrix out(static_cast<std::size_t>(a.rows()));
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = a(i, j);
  return out;
}

Eigen::MatrixXd to_eigen(const dig::Matrix& a) {
  const auto n = static_cast<Eigen::Index>(a.size());
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) out(i, j) = a(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  return out;
}

dig::PatchModel to_model(const RawModel& raw) {
  std::vector<dig::Matrix> growth, migration;
  for (std::size_t k = 0; k < raw.breaks.size(); ++k) {
    growth.push_back(to_dig(raw.r[k].asDiagonal().toDenseMatrix()));
    migration.push_back(to_dig(raw.l[k]));
  }
  return dig::PatchModel("random", dig::PeriodicMatrixFunction::piecewise_constant(raw.breaks, growth),
                         dig::PeriodicMatrixFunction::piecewise_constant(raw.breaks, migration));
}

Eigen::MatrixXd expm(const Eigen::MatrixXd& a) { return a.exp(); }

double abscissa(const Eigen::MatrixXd& a) { return a.eigenvalues().real().maxCoeff(); }

double lambda_max_2x2(double a, double b, double c, double d) {
  const double tr = a + d;
  const double det = a * d - b * c;
  return 0.5 * tr + std::sqrt(0.25 * tr * tr - det);
}

Eigen::VectorXd kernel(const Eigen::MatrixXd& l) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(l);
  Eigen::VectorXd v = lu.kernel().col(0);
  return v / v.sum();
}

double chi(const RawModel& raw) {
  double c = 0.0;
  for (std::size_t k = 0; k < raw.breaks.size(); ++k) c += raw.length(k) * raw.r[k].maxCoeff();
  return c;
}

Eigen::VectorXd mean_growth(const RawModel& raw) {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(raw.n);
  for (std::size_t k = 0; k < raw.breaks.size(); ++k) r += raw.length(k) * raw.r[k];
  return r;
}

double lambda_T0(const RawModel& raw, double m) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(raw.n, raw.n);
  for (std::size_t k = 0; k < raw.breaks.size(); ++k) a += raw.length(k) * raw.system(k, m);
  return abscissa(a);
}

double long_horizon_lambda(const RawModel& raw, double m, double T, int periods) {
  Eigen::VectorXd x = Eigen::VectorXd::Constant(raw.n, 1.0 / raw.n);
  double log_mass = 0.0;
  double log_half = 0.0;
  std::vector<int> steps;
  std::vector<Eigen::MatrixXd> systems;
  for (std::size_t k = 0; k < raw.breaks.size(); ++k) {
    systems.push_back(raw.system(k, m));
    const double span = raw.length(k) * T;
    const double stiff = systems.back().cwiseAbs().rowwise().sum().maxCoeff();
    steps.push_back(std::max(20, static_cast<int>(std::ceil(span * stiff / 0.05))));
  }
  for (int p = 0; p < periods; ++p) {
    if (p == periods / 2) log_half = log_mass;
    for (std::size_t k = 0; k < systems.size(); ++k) {
      const Eigen::MatrixXd& a = systems[k];
      const double h = raw.length(k) * T / steps[k];
      for (int s = 0; s < steps[k]; ++s) {
        const Eigen::VectorXd k1 = a * x;
        const Eigen::VectorXd k2 = a * (x + 0.5 * h * k1);
        const Eigen::VectorXd k3 = a * (x + 0.5 * h * k2);
        const Eigen::VectorXd k4 = a * (x + h * k3);
        x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        const double mass = x.sum();
        log_mass += std::log(mass);
        x /= mass;
      }
    }
  }
  return (log_mass - log_half) / ((periods - periods / 2) * T);
}

}  // namespace oracle
