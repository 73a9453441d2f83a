#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "dig/model.hpp"

namespace dig {

struct CatalogEntry {
  std::string name;
  std::string parameters;  // e.g. "eps=0.5"; empty when the model takes none
  std::string description;
};

/// All built-in model families.
const std::vector<CatalogEntry>& catalog();

/// Builds a catalog model from a spec such as "ab1", "pm1(0.25)" or
/// "three_patch_reducible(1,-0.8)". Omitted parameters take their defaults.
/// Throws ValidationError("UnknownModel") for names outside the catalog and
/// ValidationError("InvalidParameters") for malformed argument lists.
PatchModel builtin(std::string_view spec);

/// True when `spec` names a catalog family (arguments are not checked).
bool is_builtin(std::string_view spec);

/// Parses an exact decimal or rational literal ("-3/2", "0.1", "5") to the
/// nearest double.
double exact(std::string_view literal);

}  // namespace dig
