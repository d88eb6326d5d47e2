#include "etd_cli/problem_file.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "etd_cli/json_writer.hpp"

namespace etd::cli {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& what) { throw ProblemFormatError(what); }

const json& require(const json& doc, const char* field) {
  const auto it = doc.find(field);
  if (it == doc.end()) fail(std::string("missing field '") + field + "'");
  return *it;
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where + " must be a number");
  return j.get<double>();
}

Index count(const json& doc, const char* field) {
  const json& j = require(doc, field);
  if (!j.is_number_integer() || j.get<std::int64_t>() < 1) {
    fail(std::string("'") + field + "' must be a positive integer");
  }
  return j.get<Index>();
}

const json& array_of(const json& j, std::size_t len, const std::string& where) {
  if (!j.is_array()) fail(where + " must be an array");
  if (len != 0 && j.size() != len) {
    fail(where + " must have " + std::to_string(len) + " entries, got " + std::to_string(j.size()));
  }
  return j;
}

Vector vector_field(const json& doc, const char* field, Index len) {
  const json& j = array_of(require(doc, field), static_cast<std::size_t>(len), field);
  Vector v(len);
  for (Index i = 0; i < len; ++i) v(i) = number(j[i], std::string(field) + "[" + std::to_string(i) + "]");
  return v;
}

// rows x cols; cols == 0 means "take it from the first row".
Matrix matrix_field(const json& doc, const char* field, Index rows, Index cols) {
  const json& j = array_of(require(doc, field), static_cast<std::size_t>(rows), field);
  if (cols == 0) {
    if (!j[0].is_array() || j[0].empty()) fail(std::string(field) + "[0] must be a non-empty array");
    cols = static_cast<Index>(j[0].size());
  }
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const std::string where = std::string(field) + "[" + std::to_string(i) + "]";
    const json& row = array_of(j[i], static_cast<std::size_t>(cols), where);
    for (Index k = 0; k < cols; ++k) m(i, k) = number(row[k], where + "[" + std::to_string(k) + "]");
  }
  return m;
}

// Tensor stored as [state][action][next] into one N x N matrix per action.
std::vector<Matrix> tensor_field(const json& doc, const char* field, Index n, Index k) {
  const json& j = array_of(require(doc, field), static_cast<std::size_t>(n), field);
  std::vector<Matrix> out(k, Matrix(n, n));
  for (Index s = 0; s < n; ++s) {
    const std::string ws = std::string(field) + "[" + std::to_string(s) + "]";
    const json& per_action = array_of(j[s], static_cast<std::size_t>(k), ws);
    for (Index a = 0; a < k; ++a) {
      const std::string wa = ws + "[" + std::to_string(a) + "]";
      const json& row = array_of(per_action[a], static_cast<std::size_t>(n), wa);
      for (Index t = 0; t < n; ++t) out[a](s, t) = number(row[t], wa + "[" + std::to_string(t) + "]");
    }
  }
  return out;
}

}  // namespace

Scenario parse_problem(const std::string& text, const std::string& fallback_name) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) fail("problem document must be a JSON object");

  const json& version = require(doc, "schema_version");
  if (!version.is_number_integer() || version.get<int>() != kSchemaVersion) {
    fail("unsupported schema_version (expected " + std::to_string(kSchemaVersion) + ")");
  }

  const Index n = count(doc, "states");
  const Index k = count(doc, "actions");

  Scenario sc;
  sc.name = doc.value("name", fallback_name);
  sc.description = doc.value("description", std::string("problem file"));
  sc.provenance = doc.value("provenance", std::string("user supplied"));
  try {
    sc.task.mdp = FiniteMdp(tensor_field(doc, "p", n, k), tensor_field(doc, "r", n, k));
  } catch (const DimensionError& e) {
    fail(e.what());
  }
  sc.task.target = Policy{matrix_field(doc, "target", n, k)};
  sc.task.behavior = Policy{matrix_field(doc, "behavior", n, k)};
  sc.task.gamma = vector_field(doc, "gamma", n);
  sc.task.lambda = vector_field(doc, "lambda", n);
  sc.task.interest = vector_field(doc, "interest", n);
  sc.task.features = FeatureMap{matrix_field(doc, "phi", n, 0)};

  const Index n_features = sc.task.num_features();
  sc.default_alpha = doc.contains("alpha") ? number(doc["alpha"], "alpha") : 0.001;
  sc.default_theta0 =
      doc.contains("theta0") ? vector_field(doc, "theta0", n_features) : Vector::Zero(n_features);
  sc.horizon = doc.value("horizon", std::int64_t{10000});
  sc.runs = doc.value("runs", 10);
  sc.start_state = doc.value("start_state", Index{0});
  if (sc.horizon < 0) fail("'horizon' must be non-negative");
  if (sc.start_state < 0 || sc.start_state >= n) fail("'start_state' out of range");
  return sc;
}

Scenario load_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string stem = path.substr(path.find_last_of('/') + 1);
  if (const auto dot = stem.rfind('.'); dot != std::string::npos && dot > 0) stem.resize(dot);
  return parse_problem(buf.str(), stem);
}

Scenario resolve_input(const std::string& input) {
  const auto names = scenario_names();
  if (std::find(names.begin(), names.end(), input) != names.end()) return build_scenario(input);
  return load_problem_file(input);
}

std::string serialize_problem(const Scenario& sc) {
  const TaskSpec& task = sc.task;
  const Index n = task.num_states();
  const Index k = task.num_actions();
  auto tensor = [&](JsonWriter& w, bool rewards) {
    w.begin_array();
    for (Index s = 0; s < n; ++s) {
      w.begin_array();
      for (Index a = 0; a < k; ++a) {
        const Matrix& m = rewards ? task.mdp.reward(a) : task.mdp.transition(a);
        w.value(Vector(m.row(s).transpose()));
      }
      w.end_array();
    }
    w.end_array();
  };

  JsonWriter w;
  w.begin_object();
  w.field("schema_version", kSchemaVersion);
  w.field("name", sc.name);
  w.field("description", sc.description);
  w.field("provenance", sc.provenance);
  w.field("states", static_cast<std::int64_t>(n));
  w.field("actions", static_cast<std::int64_t>(k));
  w.key("p");
  tensor(w, false);
  w.key("r");
  tensor(w, true);
  w.field("target", task.target.probs);
  w.field("behavior", task.behavior.probs);
  w.field("gamma", task.gamma);
  w.field("lambda", task.lambda);
  w.field("interest", task.interest);
  w.field("phi", task.features.phi);
  w.field("alpha", sc.default_alpha);
  w.field("theta0", sc.default_theta0);
  w.field("horizon", sc.horizon);
  w.field("runs", sc.runs);
  w.field("start_state", static_cast<std::int64_t>(sc.start_state));
  w.end_object();
  return w.str();
}

}  // namespace etd::cli
