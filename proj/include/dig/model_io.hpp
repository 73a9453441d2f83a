#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "dig/model.hpp"

namespace dig {

inline constexpr int kModelSchemaVersion = 1;

/// Serializes a piecewise-constant model to the versioned JSON document
/// {version, name, n, growth: {breaks, diagonals}, migration: {breaks, matrices}}.
/// Throws ValidationError("UnsupportedModel") for sampled (smooth) models.
std::string to_json(const PatchModel& model);

/// Parses a model document. Throws ParseError (with line for syntax errors,
/// with the offending field for schema violations), ValidationError
/// ("SchemaVersionMismatch") and ValidationError("SchemaError").
PatchModel from_json(std::string_view text);

PatchModel load(const std::filesystem::path& path);
void save(const PatchModel& model, const std::filesystem::path& path);

/// A built-in spec ("ab1", "pm1(0.3)") or a path to a model file.
PatchModel resolve_model(const std::string& spec_or_path);

/// Structural equality: same dimension, breaks and segment values.
bool structurally_equal(const PatchModel& a, const PatchModel& b);

}  // namespace dig
