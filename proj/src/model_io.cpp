#include "dig/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dig/builtins.hpp"
#include "dig/errors.hpp"

namespace dig {

using nlohmann::json;

namespace {

std::size_t line_of(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

const json& field(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) throw ParseError(path, 0, "'" + path + "' must be an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(path + "." + key, 0, "missing field '" + path + "." + key + "'");
  return *it;
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ParseError(path, 0, "'" + path + "' must be a number");
  return v.get<double>();
}

std::vector<double> numbers(const json& v, const std::string& path) {
  if (!v.is_array()) throw ParseError(path, 0, "'" + path + "' must be an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

Matrix square(const json& v, std::size_t n, const std::string& path) {
  if (!v.is_array() || v.size() != n) throw ParseError(path, 0, "'" + path + "' must have n rows");
  Matrix m(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string row_path = path + "[" + std::to_string(i) + "]";
    const std::vector<double> row = numbers(v[i], row_path);
    if (row.size() != n) throw ParseError(row_path, 0, "'" + row_path + "' must have n entries");
    for (std::size_t j = 0; j < n; ++j) m(i, j) = row[j];
  }
  return m;
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.size(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.size(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

bool same_function(const PeriodicMatrixFunction& a, const PeriodicMatrixFunction& b) {
  if (a.kind() != b.kind() || a.dimension() != b.dimension() || a.breaks() != b.breaks()) return false;
  if (a.kind() != FunctionKind::PiecewiseConstant) return false;
  for (std::size_t k = 0; k < a.segment_count(); ++k)
    if (!(a.segment_value(k) == b.segment_value(k))) return false;
  return true;
}

}  // namespace

std::string to_json(const PatchModel& model) {
  if (!model.piecewise_constant())
    throw ValidationError("UnsupportedModel", "only piecewise-constant models can be serialized");
  json growth_diagonals = json::array();
  for (std::size_t k = 0; k < model.growth().segment_count(); ++k)
    growth_diagonals.push_back(model.growth().segment_value(k).diag());
  json matrices = json::array();
  for (std::size_t k = 0; k < model.migration().segment_count(); ++k)
    matrices.push_back(matrix_json(model.migration().segment_value(k)));
  json doc;
  doc["version"] = kModelSchemaVersion;
  doc["name"] = model.name();
  doc["n"] = model.patches();
  doc["growth"] = {{"breaks", model.growth().breaks()}, {"diagonals", growth_diagonals}};
  doc["migration"] = {{"breaks", model.migration().breaks()}, {"matrices", matrices}};
  return doc.dump(2) + "\n";
}

PatchModel from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError("", line_of(text, e.byte == 0 ? 0 : e.byte - 1), std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("", 1, "model document must be a JSON object");
  const double version = number(field(doc, "version", "$"), "$.version");
  if (version != kModelSchemaVersion)
    throw ValidationError("SchemaVersionMismatch", "unsupported model schema version " + field(doc, "version", "$").dump());
  const double n_value = number(field(doc, "n", "$"), "$.n");
  if (n_value != static_cast<double>(static_cast<long long>(n_value)) || n_value < 0)
    throw ParseError("$.n", 0, "'$.n' must be a non-negative integer");
  if (n_value < 2) throw ValidationError("SchemaError", "n >= 2 required");
  const auto n = static_cast<std::size_t>(n_value);

  const json& growth = field(doc, "growth", "$");
  const json& migration = field(doc, "migration", "$");
  const std::vector<double> growth_breaks = numbers(field(growth, "breaks", "$.growth"), "$.growth.breaks");
  const json& diagonals = field(growth, "diagonals", "$.growth");
  if (!diagonals.is_array()) throw ParseError("$.growth.diagonals", 0, "'$.growth.diagonals' must be an array");
  std::vector<Matrix> growth_values;
  for (std::size_t k = 0; k < diagonals.size(); ++k) {
    const std::string path = "$.growth.diagonals[" + std::to_string(k) + "]";
    const std::vector<double> d = numbers(diagonals[k], path);
    if (d.size() != n) throw ParseError(path, 0, "'" + path + "' must have n entries");
    growth_values.push_back(Matrix::diagonal(d));
  }
  const std::vector<double> migration_breaks = numbers(field(migration, "breaks", "$.migration"), "$.migration.breaks");
  const json& matrices = field(migration, "matrices", "$.migration");
  if (!matrices.is_array()) throw ParseError("$.migration.matrices", 0, "'$.migration.matrices' must be an array");
  std::vector<Matrix> migration_values;
  for (std::size_t k = 0; k < matrices.size(); ++k)
    migration_values.push_back(square(matrices[k], n, "$.migration.matrices[" + std::to_string(k) + "]"));

  std::string name = "model";
  if (const auto it = doc.find("name"); it != doc.end()) {
    if (!it->is_string()) throw ParseError("$.name", 0, "'$.name' must be a string");
    name = it->get<std::string>();
  }
  return PatchModel(name, PeriodicMatrixFunction::piecewise_constant(growth_breaks, std::move(growth_values)),
                    PeriodicMatrixFunction::piecewise_constant(migration_breaks, std::move(migration_values)));
}

PatchModel load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("FileNotFound", "cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_json(buffer.str());
}

void save(const PatchModel& model, const std::filesystem::path& path) {
  const std::string text = to_json(model);
  std::ofstream out(path);
  if (!out) throw ValidationError("FileNotWritable", "cannot write '" + path.string() + "'");
  out << text;
}

PatchModel resolve_model(const std::string& spec_or_path) {
  if (is_builtin(spec_or_path)) return builtin(spec_or_path);
  if (std::filesystem::exists(spec_or_path)) return load(spec_or_path);
  throw ValidationError("UnknownModel", "'" + spec_or_path + "' is neither a built-in model nor a readable file");
}

bool structurally_equal(const PatchModel& a, const PatchModel& b) {
  return a.patches() == b.patches() && same_function(a.growth(), b.growth()) &&
         same_function(a.migration(), b.migration());
}

}  // namespace dig
