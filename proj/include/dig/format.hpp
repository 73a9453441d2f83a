#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "dig/explorer.hpp"
#include "dig/linalg.hpp"

namespace dig {

/// 15 significant digits ("%.15g"); "nan"/"inf" spelled out.
std::string format_number(double v);

/// A JSON number rounded to 15 significant digits, or null when not finite.
nlohmann::json json_number(double v);
nlohmann::json json_vector(const Vector& v);

/// CSV: m,T,lambda,status
void write_sweep_csv(const SweepGrid& grid, std::ostream& out);
/// CSV: branch,m,T,nu,lambda_residual
void write_curve_csv(const CriticalCurve& curve, std::ostream& out);

}  // namespace dig
