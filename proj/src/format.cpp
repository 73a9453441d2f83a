#include "dig/format.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ostream>

namespace dig {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

nlohmann::json json_number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return std::strtod(format_number(v).c_str(), nullptr);
}

nlohmann::json json_vector(const Vector& v) {
  nlohmann::json out = nlohmann::json::array();
  for (double x : v) out.push_back(json_number(x));
  return out;
}

void write_sweep_csv(const SweepGrid& grid, std::ostream& out) {
  out << "m,T,lambda,status\n";
  for (std::size_t i = 0; i < grid.m_values.size(); ++i)
    for (std::size_t j = 0; j < grid.T_values.size(); ++j)
      out << format_number(grid.m_values[i]) << ',' << format_number(grid.T_values[j]) << ','
          << format_number(grid.at(i, j)) << ',' << to_string(grid.status[grid.index(i, j)]) << '\n';
}

void write_curve_csv(const CriticalCurve& curve, std::ostream& out) {
  out << "branch,m,T,nu,lambda_residual\n";
  for (std::size_t b = 0; b < curve.branches.size(); ++b)
    for (const CurveVertex& v : curve.branches[b])
      out << b << ',' << format_number(v.m) << ',' << format_number(v.T) << ',' << format_number(v.nu()) << ','
          << format_number(v.lambda) << '\n';
}

}  // namespace dig
