#include "adapt/config.hpp"

#include <cmath>
#include <initializer_list>
#include <vector>

#include <json.hpp>

#include "adapt/errors.hpp"
#include "adapt/io.hpp"

namespace adapt {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& origin, const std::string& message) {
  throw ValidationError(origin + ": " + message);
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& origin, const std::string& prefix) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* name : allowed) {
      if (it.key() == name) {
        known = true;
        break;
      }
    }
    if (!known) fail(origin, "unknown key '" + prefix + it.key() + "'");
  }
}

double need_number(const json& obj, const std::string& key, const std::string& path,
                   const std::string& origin) {
  if (!obj.contains(key)) fail(origin, "'" + path + "' is required");
  const json& v = obj.at(key);
  if (!v.is_number()) fail(origin, "'" + path + "' must be a number");
  return v.get<double>();
}

double number_or(const json& obj, const std::string& key, double fallback,
                 const std::string& path, const std::string& origin) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) fail(origin, "'" + path + "' must be a number");
  return v.get<double>();
}

int int_or(const json& obj, const std::string& key, int fallback,
           const std::string& path, const std::string& origin) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) fail(origin, "'" + path + "' must be an integer");
  return v.get<int>();
}

std::string need_string(const json& obj, const std::string& key,
                        const std::string& path, const std::string& origin) {
  if (!obj.contains(key)) fail(origin, "'" + path + "' is required");
  const json& v = obj.at(key);
  if (!v.is_string()) fail(origin, "'" + path + "' must be a string");
  return v.get<std::string>();
}

// Override values are parsed as JSON scalars when possible, so "0.3" becomes
// a number and "ticvf" a string.
json override_value(const std::string& text) {
  const json v = json::parse(text, nullptr, false);
  if (!v.is_discarded() && !v.is_object() && !v.is_array()) return v;
  return json(text);
}

void apply_override(json& root, const std::string& assignment,
                    const std::string& origin) {
  const size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    fail(origin, "override must look like section.key=value, got '" + assignment + "'");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);

  std::vector<std::string> parts;
  size_t start = 0;
  while (true) {
    const size_t dot = path.find('.', start);
    if (dot == std::string::npos) {
      parts.push_back(path.substr(start));
      break;
    }
    parts.push_back(path.substr(start, dot - start));
    start = dot + 1;
  }
  for (const auto& part : parts) {
    if (part.empty()) fail(origin, "override path '" + path + "' has an empty segment");
  }

  json* node = &root;
  for (size_t i = 0; i + 1 < parts.size(); ++i) {
    json& next = (*node)[parts[i]];
    if (next.is_null()) next = json::object();
    if (!next.is_object()) {
      fail(origin, "override path '" + path + "' crosses a non-object value");
    }
    node = &next;
  }
  (*node)[parts.back()] = override_value(value);
}

Model parse_model(const json& m, const std::string& origin) {
  if (!m.is_object()) fail(origin, "'model' must be an object");
  std::string kind_name = "coupled-ramp";
  if (m.contains("kind")) {
    if (!m.at("kind").is_string()) fail(origin, "'model.kind' must be a string");
    kind_name = m.at("kind").get<std::string>();
  }
  ModelKind kind;
  try {
    kind = model_kind_from_name(kind_name);
  } catch (const ValidationError&) {
    fail(origin, "'model.kind' must be standard, coupled-ramp or coupled-sigmoid, "
                 "got '" + kind_name + "'");
  }

  switch (kind) {
    case ModelKind::Standard:
      check_keys(m, {"kind", "A", "B"}, origin, "model.");
      break;
    case ModelKind::CoupledRamp:
      check_keys(m, {"kind", "k", "p_max", "e_sat"}, origin, "model.");
      break;
    case ModelKind::CoupledSigmoid:
      check_keys(m, {"kind", "k", "p_max", "a", "b", "c"}, origin, "model.");
      break;
  }

  std::map<std::string, double> params;
  if (kind == ModelKind::Standard) {
    params["A"] = number_or(m, "A", 0.9, "model.A", origin);
    params["B"] = number_or(m, "B", 0.05, "model.B", origin);
  } else {
    params["k"] = number_or(m, "k", 20.0, "model.k", origin);
    params["p_max"] = number_or(m, "p_max", 0.2, "model.p_max", origin);
    if (kind == ModelKind::CoupledRamp) {
      params["e_sat"] = number_or(m, "e_sat", 7.5, "model.e_sat", origin);
    } else {
      params["a"] = need_number(m, "a", "model.a", origin);
      params["b"] = need_number(m, "b", "model.b", origin);
      params["c"] = need_number(m, "c", "model.c", origin);
    }
  }

  try {
    return make_model(kind, params);
  } catch (const ValidationError& e) {
    fail(origin, std::string("model: ") + e.what());
  }
}

Protocol parse_protocol(const json& p, const std::string& origin) {
  if (!p.is_object()) fail(origin, "'protocol' must be an object");
  std::string kind_name = "ticvf";
  if (p.contains("kind")) {
    if (!p.at("kind").is_string()) fail(origin, "'protocol.kind' must be a string");
    kind_name = p.at("kind").get<std::string>();
  }
  ProtocolKind kind;
  try {
    kind = protocol_kind_from_name(kind_name);
  } catch (const ValidationError&) {
    fail(origin, "'protocol.kind' must be ticvf, vmr or washout, got '" +
                 kind_name + "'");
  }

  const int n_trials = int_or(p, "n_trials", 100, "protocol.n_trials", origin);
  const double x0 = number_or(p, "x0", 0.0, "protocol.x0", origin);

  try {
    switch (kind) {
      case ProtocolKind::Ticvf: {
        check_keys(p, {"kind", "e_clamp", "n_trials", "x0"}, origin, "protocol.");
        const double e_clamp =
            number_or(p, "e_clamp", 15.0, "protocol.e_clamp", origin);
        return Protocol::ticvf(e_clamp, n_trials, x0);
      }
      case ProtocolKind::Vmr: {
        check_keys(p, {"kind", "target", "n_trials", "x0"}, origin, "protocol.");
        const double target = need_number(p, "target", "protocol.target", origin);
        return Protocol::vmr(target, n_trials, x0);
      }
      case ProtocolKind::Washout:
        check_keys(p, {"kind", "n_trials", "x0"}, origin, "protocol.");
        return Protocol::washout(n_trials, x0);
    }
  } catch (const ValidationError& e) {
    fail(origin, std::string("protocol: ") + e.what());
  }
  fail(origin, "unreachable protocol kind");
}

AnalysisOptions parse_analysis(const json& a, const std::string& origin) {
  if (!a.is_object()) fail(origin, "'analysis' must be an object");
  check_keys(a, {"conv_tol", "n_max", "asymptote_tol"}, origin, "analysis.");
  AnalysisOptions options;
  options.conv_tol = number_or(a, "conv_tol", options.conv_tol,
                               "analysis.conv_tol", origin);
  options.n_max = int_or(a, "n_max", options.n_max, "analysis.n_max", origin);
  options.asymptote_tol = number_or(a, "asymptote_tol", options.asymptote_tol,
                                    "analysis.asymptote_tol", origin);
  if (!(options.conv_tol > 0.0) || !std::isfinite(options.conv_tol)) {
    fail(origin, "'analysis.conv_tol' must be positive and finite");
  }
  if (options.n_max < 1) fail(origin, "'analysis.n_max' must be at least 1");
  if (!(options.asymptote_tol > 0.0) || !std::isfinite(options.asymptote_tol)) {
    fail(origin, "'analysis.asymptote_tol' must be positive and finite");
  }
  return options;
}

}  // namespace

RunConfig::RunConfig()
    : model(CoupledModelParams(20.0, RateFunction::ramp())),
      protocol(Protocol::ticvf(15.0, 100)) {}

StandardSsmParams default_standard_params() { return StandardSsmParams(0.9, 0.05); }

RunConfig parse_run_config(const std::string& json_text,
                           std::span<const std::string> overrides,
                           const std::string& origin) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(origin + ": " + e.what());
  }
  if (!root.is_object()) fail(origin, "top level must be a JSON object");

  for (const auto& assignment : overrides) apply_override(root, assignment, origin);

  check_keys(root, {"model", "protocol", "analysis"}, origin, "");

  RunConfig config;
  if (root.contains("model")) {
    config.model = parse_model(root.at("model"), origin);
    config.model_specified = true;
  }
  if (root.contains("protocol")) {
    config.protocol = parse_protocol(root.at("protocol"), origin);
  }
  if (root.contains("analysis")) {
    config.analysis = parse_analysis(root.at("analysis"), origin);
  }
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path,
                          std::span<const std::string> overrides) {
  return parse_run_config(read_file(path), overrides, path.string());
}

StandardSsmParams standard_params_from_config(const RunConfig& config) {
  if (!config.model_specified) return default_standard_params();
  if (const auto* p = std::get_if<StandardSsmParams>(&config.model)) return *p;
  throw ValidationError("falsification needs the standard model; config specifies " +
                        model_kind_name(config.model));
}

FitSpec parse_fit_problem(const std::string& json_text,
                          const std::filesystem::path& base_dir,
                          const std::string& origin) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(origin + ": " + e.what());
  }
  if (!root.is_object()) fail(origin, "top level must be a JSON object");
  check_keys(root, {"model", "free", "fixed", "observed", "explicit_starts", "options"},
             origin, "");

  FitSpec spec;
  FitProblem& problem = spec.problem;

  if (!root.contains("model") || !root.at("model").is_object()) {
    fail(origin, "'model' object is required");
  }
  const json& model = root.at("model");
  check_keys(model, {"kind"}, origin, "model.");
  const std::string kind_name = need_string(model, "kind", "model.kind", origin);
  try {
    problem.kind = model_kind_from_name(kind_name);
  } catch (const ValidationError&) {
    fail(origin, "'model.kind' must be standard, coupled-ramp or coupled-sigmoid, "
                 "got '" + kind_name + "'");
  }

  if (!root.contains("free") || !root.at("free").is_array()) {
    fail(origin, "'free' array is required");
  }
  for (size_t i = 0; i < root.at("free").size(); ++i) {
    const json& entry = root.at("free").at(i);
    const std::string path = "free[" + std::to_string(i) + "]";
    if (!entry.is_object()) fail(origin, "'" + path + "' must be an object");
    check_keys(entry, {"name", "lower", "upper"}, origin, path + ".");
    FreeParam param;
    param.name = need_string(entry, "name", path + ".name", origin);
    param.lower = need_number(entry, "lower", path + ".lower", origin);
    param.upper = need_number(entry, "upper", path + ".upper", origin);
    problem.free.push_back(std::move(param));
  }

  if (root.contains("fixed")) {
    const json& fixed = root.at("fixed");
    if (!fixed.is_object()) fail(origin, "'fixed' must be an object");
    for (auto it = fixed.begin(); it != fixed.end(); ++it) {
      if (!it.value().is_number()) {
        fail(origin, "'fixed." + it.key() + "' must be a number");
      }
      problem.fixed[it.key()] = it.value().get<double>();
    }
  }

  if (!root.contains("observed") || !root.at("observed").is_array() ||
      root.at("observed").empty()) {
    fail(origin, "'observed' must be a non-empty array");
  }
  for (size_t i = 0; i < root.at("observed").size(); ++i) {
    const json& entry = root.at("observed").at(i);
    const std::string path = "observed[" + std::to_string(i) + "]";
    if (!entry.is_object()) fail(origin, "'" + path + "' must be an object");
    check_keys(entry, {"csv", "protocol"}, origin, path + ".");
    const std::string csv = need_string(entry, "csv", path + ".csv", origin);
    if (!entry.contains("protocol") || !entry.at("protocol").is_object()) {
      fail(origin, "'" + path + ".protocol' object is required");
    }
    const json& proto = entry.at("protocol");
    const std::string kind_text =
        need_string(proto, "kind", path + ".protocol.kind", origin);
    ProtocolKind kind;
    try {
      kind = protocol_kind_from_name(kind_text);
    } catch (const ValidationError&) {
      fail(origin, "'" + path + ".protocol.kind' must be ticvf, vmr or washout, "
                   "got '" + kind_text + "'");
    }
    double magnitude = 0.0;
    switch (kind) {
      case ProtocolKind::Ticvf:
        check_keys(proto, {"kind", "e_clamp"}, origin, path + ".protocol.");
        magnitude = need_number(proto, "e_clamp", path + ".protocol.e_clamp", origin);
        break;
      case ProtocolKind::Vmr:
        check_keys(proto, {"kind", "target"}, origin, path + ".protocol.");
        magnitude = need_number(proto, "target", path + ".protocol.target", origin);
        break;
      case ProtocolKind::Washout:
        check_keys(proto, {"kind"}, origin, path + ".protocol.");
        break;
    }
    std::filesystem::path csv_path(csv);
    if (csv_path.is_relative()) csv_path = base_dir / csv_path;
    problem.observed.push_back(load_trajectory_csv(csv_path, kind, magnitude));
  }

  if (root.contains("explicit_starts")) {
    const json& starts = root.at("explicit_starts");
    if (!starts.is_array()) fail(origin, "'explicit_starts' must be an array");
    for (size_t i = 0; i < starts.size(); ++i) {
      const json& point = starts.at(i);
      const std::string path = "explicit_starts[" + std::to_string(i) + "]";
      if (!point.is_array()) fail(origin, "'" + path + "' must be an array of numbers");
      std::vector<double> coords;
      for (size_t j = 0; j < point.size(); ++j) {
        if (!point.at(j).is_number()) {
          fail(origin, "'" + path + "[" + std::to_string(j) + "]' must be a number");
        }
        coords.push_back(point.at(j).get<double>());
      }
      problem.explicit_starts.push_back(std::move(coords));
    }
  }

  if (root.contains("options")) {
    const json& options = root.at("options");
    if (!options.is_object()) fail(origin, "'options' must be an object");
    check_keys(options, {"max_evals"}, origin, "options.");
    spec.max_evals_per_start = int_or(options, "max_evals", spec.max_evals_per_start,
                                      "options.max_evals", origin);
    if (spec.max_evals_per_start < 100) {
      fail(origin, "'options.max_evals' must be at least 100");
    }
  }

  try {
    problem.validate();
  } catch (const ValidationError& e) {
    fail(origin, e.what());
  }
  return spec;
}

FitSpec load_fit_problem(const std::filesystem::path& path) {
  return parse_fit_problem(read_file(path), path.parent_path(), path.string());
}

}  // namespace adapt
