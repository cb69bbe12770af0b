#include "adapt/io.hpp"

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "adapt/errors.hpp"

namespace adapt {

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw NumericError("number formatting failed");
  return std::string(buf, ptr);
}

std::string format_double_pointed(double value) {
  std::string text = format_double(value);
  if (text.find_first_of(".eE") == std::string::npos &&
      text.find_first_of("0123456789") != std::string::npos) {
    text += ".0";
  }
  return text;
}

double parse_double(std::string_view text, const std::string& what) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw ValidationError("cannot parse " + what + " from '" + std::string(text) + "'");
  }
  return value;
}

int parse_int(std::string_view text, const std::string& what) {
  int value = 0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw ValidationError("cannot parse " + what + " from '" + std::string(text) + "'");
  }
  return value;
}

void atomic_write_file(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot open for writing: " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ignore;
      std::filesystem::remove(tmp, ignore);
      throw NumericError("write failed: " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignore;
    std::filesystem::remove(tmp, ignore);
    throw ValidationError("cannot move " + tmp.string() + " to " + path.string() +
                          ": " + ec.message());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw ValidationError("error reading file: " + path.string());
  return buf.str();
}

KvNode& KvNode::child(const std::string& key) {
  entries_.emplace_back(key, std::make_unique<KvNode>());
  return *std::get<std::unique_ptr<KvNode>>(entries_.back().second);
}

void KvNode::set(const std::string& key, const std::string& value) {
  entries_.emplace_back(key, value);
}

void KvNode::set(const std::string& key, const char* value) {
  entries_.emplace_back(key, std::string(value));
}

void KvNode::set(const std::string& key, double value) {
  set(key, format_double(value));
}

void KvNode::set(const std::string& key, bool value) {
  set(key, value ? "true" : "false");
}

void KvNode::set(const std::string& key, int value) { set(key, std::to_string(value)); }

void KvNode::set(const std::string& key, long value) { set(key, std::to_string(value)); }

std::string KvNode::render() const {
  std::string out;
  render_into(out, 0);
  return out;
}

void KvNode::render_into(std::string& out, int depth) const {
  const std::string indent(static_cast<size_t>(depth) * 2, ' ');
  for (const auto& [key, value] : entries_) {
    if (std::holds_alternative<std::string>(value)) {
      out += indent;
      out += key;
      out += ": ";
      out += std::get<std::string>(value);
      out += '\n';
    } else {
      out += indent;
      out += key;
      out += ":\n";
      std::get<std::unique_ptr<KvNode>>(value)->render_into(out, depth + 1);
    }
  }
}

void add_model_kv(KvNode& node, const Model& model) {
  node.set("kind", model_kind_name(model));
  if (const auto* p = std::get_if<StandardSsmParams>(&model)) {
    node.set("A", p->retention);
    node.set("B", p->error_gain);
    return;
  }
  const auto& p = std::get<CoupledModelParams>(model);
  node.set("k", p.k);
  node.set("p_max", p.rate.p_max());
  if (p.rate.kind() == RateFunction::Kind::PiecewiseLinearRamp) {
    node.set("e_sat", p.rate.saturation_error());
  } else {
    node.set("a", p.rate.sigmoid_a());
    node.set("b", p.rate.sigmoid_b());
    node.set("c", p.rate.sigmoid_c());
  }
}

void add_protocol_kv(KvNode& node, const Protocol& protocol) {
  node.set("kind", protocol_kind_name(protocol.kind));
  switch (protocol.kind) {
    case ProtocolKind::Ticvf:
      node.set("e_clamp", protocol.magnitude);
      break;
    case ProtocolKind::Vmr:
      node.set("target", protocol.magnitude);
      break;
    case ProtocolKind::Washout:
      break;
  }
  node.set("n_trials", protocol.n_trials);
  node.set("x0", protocol.x0);
}

namespace {

const char* stop_reason_name(StopReason stop) {
  switch (stop) {
    case StopReason::TrialCountReached: return "trial-count-reached";
    case StopReason::Converged: return "converged";
    case StopReason::TrialLimit: return "trial-limit";
  }
  return "unknown";
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  size_t start = 0;
  while (true) {
    const size_t pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(text.substr(start));
      break;
    }
    parts.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
  return parts;
}

// Splits into lines, tolerating a trailing newline and CRLF endings.
std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  for (std::string_view line : split(text, '\n')) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
  }
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

}  // namespace

std::string trajectory_to_csv(const Trajectory& traj) {
  std::string out = "trial,x,error,p\n";
  for (const auto& r : traj.records) {
    out += std::to_string(r.trial);
    out += ',';
    out += format_double_pointed(r.x);
    out += ',';
    out += format_double_pointed(r.e);
    out += ',';
    out += format_double_pointed(r.p);
    out += '\n';
  }
  return out;
}

std::string trajectory_to_kv(const Trajectory& traj) {
  KvNode root;
  if (traj.model) add_model_kv(root.child("model"), *traj.model);
  add_protocol_kv(root.child("protocol"), traj.protocol);
  root.set("stop", stop_reason_name(traj.stop));
  root.set("n_trials", traj.n_trials());
  KvNode& records = root.child("records");
  for (const auto& r : traj.records) {
    KvNode& row = records.child(std::to_string(r.trial));
    row.set("x", r.x);
    row.set("error", r.e);
    row.set("p", r.p);
  }
  return root.render();
}

Trajectory parse_trajectory_csv(std::string_view text, ProtocolKind kind,
                                double magnitude, const std::string& origin) {
  const std::vector<std::string_view> lines = split_lines(text);
  if (lines.empty()) throw ValidationError(origin + ": empty trajectory table");
  if (lines[0] != "trial,x,error,p") {
    throw ValidationError(origin + ": expected header 'trial,x,error,p', got '" +
                          std::string(lines[0]) + "'");
  }
  if (lines.size() < 3) {
    throw ValidationError(origin + ": trajectory needs at least 2 rows");
  }

  Trajectory traj;
  for (size_t i = 1; i < lines.size(); ++i) {
    const std::vector<std::string_view> fields = split(lines[i], ',');
    if (fields.size() != 4) {
      throw ValidationError(origin + ": row " + std::to_string(i) +
                            " has " + std::to_string(fields.size()) +
                            " fields, expected 4");
    }
    TrialRecord r;
    r.trial = parse_int(fields[0], origin + " trial");
    r.x = parse_double(fields[1], origin + " x");
    r.e = parse_double(fields[2], origin + " error");
    r.p = parse_double(fields[3], origin + " p");
    if (r.trial != static_cast<int>(i) - 1) {
      throw ValidationError(origin + ": trial indices must run 0,1,2,... without gaps");
    }
    traj.records.push_back(r);
  }

  const int n_trials = static_cast<int>(traj.records.size()) - 1;
  const double x0 = traj.records.front().x;
  switch (kind) {
    case ProtocolKind::Ticvf:
      traj.protocol = Protocol::ticvf(magnitude, n_trials, x0);
      break;
    case ProtocolKind::Vmr:
      traj.protocol = Protocol::vmr(magnitude, n_trials, x0);
      break;
    case ProtocolKind::Washout:
      traj.protocol = Protocol::washout(n_trials, x0);
      break;
  }
  traj.stop = StopReason::TrialCountReached;
  return traj;
}

Trajectory load_trajectory_csv(const std::filesystem::path& path, ProtocolKind kind,
                               double magnitude) {
  return parse_trajectory_csv(read_file(path), kind, magnitude, path.string());
}

std::string family_to_csv(const GeneralLinearFamily& family) {
  std::string out = "k_ref,";
  out += format_double_pointed(family.k_ref);
  out += "\ne,f,g\n";
  for (size_t i = 0; i < family.errors.size(); ++i) {
    out += format_double_pointed(family.errors[i]);
    out += ',';
    out += format_double_pointed(family.f[i]);
    out += ',';
    out += format_double_pointed(family.g[i]);
    out += '\n';
  }
  return out;
}

GeneralLinearFamily parse_family_csv(std::string_view text, const std::string& origin) {
  const std::vector<std::string_view> lines = split_lines(text);
  if (lines.size() < 3) {
    throw ValidationError(origin + ": family file needs a k_ref line, a header and rows");
  }
  const std::vector<std::string_view> head = split(lines[0], ',');
  if (head.size() != 2 || head[0] != "k_ref") {
    throw ValidationError(origin + ": first line must be 'k_ref,<value>'");
  }
  GeneralLinearFamily family;
  family.k_ref = parse_double(head[1], origin + " k_ref");
  if (lines[1] != "e,f,g") {
    throw ValidationError(origin + ": expected header 'e,f,g', got '" +
                          std::string(lines[1]) + "'");
  }
  for (size_t i = 2; i < lines.size(); ++i) {
    const std::vector<std::string_view> fields = split(lines[i], ',');
    if (fields.size() != 3) {
      throw ValidationError(origin + ": row " + std::to_string(i) +
                            " has " + std::to_string(fields.size()) +
                            " fields, expected 3");
    }
    family.errors.push_back(parse_double(fields[0], origin + " e"));
    family.f.push_back(parse_double(fields[1], origin + " f"));
    family.g.push_back(parse_double(fields[2], origin + " g"));
  }
  family.validate();
  return family;
}

GeneralLinearFamily load_family_csv(const std::filesystem::path& path) {
  return parse_family_csv(read_file(path), path.string());
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::string out = "error,asymptote,slope,converged\n";
  for (const auto& row : rows) {
    out += format_double_pointed(row.error);
    out += ',';
    out += format_double_pointed(row.features.asymptote);
    out += ',';
    out += format_double_pointed(row.features.initial_slope);
    out += ',';
    out += row.features.converged ? "true" : "false";
    out += '\n';
  }
  return out;
}

std::string sweep_to_kv(const std::vector<SweepRow>& rows) {
  KvNode root;
  KvNode& list = root.child("sweep");
  for (size_t i = 0; i < rows.size(); ++i) {
    KvNode& row = list.child(std::to_string(i));
    row.set("error", rows[i].error);
    row.set("asymptote", rows[i].features.asymptote);
    row.set("slope", rows[i].features.initial_slope);
    row.set("converged", rows[i].features.converged);
  }
  return root.render();
}

namespace {

void add_feature_check(KvNode& node, const std::string& key, const FeatureCheck& check) {
  KvNode& c = node.child(key);
  c.set("assessed", check.assessed);
  c.set("violated", check.violated);
  if (!check.note.empty()) c.set("note", check.note);
}

}  // namespace

std::string falsification_to_kv(const FalsificationReport& report) {
  KvNode root;
  root.set("model", "standard");
  root.set("e_sat", report.e_sat);
  KvNode& entries = root.child("entries");
  for (size_t i = 0; i < report.entries.size(); ++i) {
    const FalsificationEntry& e = report.entries[i];
    KvNode& row = entries.child(std::to_string(i));
    row.set("error", e.error);
    row.set("asymptote_closed_form", e.asymptote_closed_form);
    row.set("asymptote_empirical", e.asymptote_empirical);
    row.set("initial_slope", e.initial_slope);
  }
  KvNode& features = root.child("features");
  add_feature_check(features, "constant_asymptote", report.feature1_constant_asymptote);
  add_feature_check(features, "slope_scales_below_sat",
                    report.feature2_slope_scales_below_sat);
  add_feature_check(features, "constant_slope_above_sat",
                    report.feature3_constant_slope_above_sat);
  root.set("max_asymptote_ratio_deviation", report.max_asymptote_ratio_deviation);
  root.set("max_slope_ratio_deviation", report.max_slope_ratio_deviation);
  const bool falsified = (report.feature1_constant_asymptote.assessed &&
                          report.feature1_constant_asymptote.violated) ||
                         (report.feature2_slope_scales_below_sat.assessed &&
                          report.feature2_slope_scales_below_sat.violated) ||
                         (report.feature3_constant_slope_above_sat.assessed &&
                          report.feature3_constant_slope_above_sat.violated);
  root.set("falsified", falsified);
  return root.render();
}

std::string uniqueness_points_to_csv(const UniquenessVerdict& verdict) {
  std::string out =
      "e,f,g,residual,empirical_asymptote,iteration_converged,"
      "asymptote_matches,relation_holds\n";
  for (const auto& p : verdict.points) {
    out += format_double_pointed(p.e);
    out += ',';
    out += format_double_pointed(p.f);
    out += ',';
    out += format_double_pointed(p.g);
    out += ',';
    out += format_double_pointed(p.residual);
    out += ',';
    out += format_double_pointed(p.empirical_asymptote);
    out += ',';
    out += p.iteration_converged ? "true" : "false";
    out += ',';
    out += p.asymptote_matches ? "true" : "false";
    out += ',';
    out += p.relation_holds ? "true" : "false";
    out += '\n';
  }
  return out;
}

std::string uniqueness_to_kv(const UniquenessVerdict& verdict) {
  KvNode root;
  root.set("pass", verdict.pass);
  root.set("tolerance", verdict.tol);
  root.set("max_residual", verdict.max_residual);
  root.set("points", static_cast<int>(verdict.points.size()));
  root.set("checks_agree_everywhere", verdict.checks_agree_everywhere);
  root.set("violations", static_cast<int>(verdict.violations.size()));
  if (!verdict.violations.empty()) {
    std::string indices;
    for (size_t i = 0; i < verdict.violations.size(); ++i) {
      if (i) indices += ',';
      indices += std::to_string(verdict.violations[i]);
    }
    root.set("violation_indices", indices);
  }
  return root.render();
}

std::string fit_result_to_kv(const FitResult& result, const FitProblem& problem,
                             std::uint64_t seed, int starts) {
  KvNode root;
  root.set("kind", model_kind_name(problem.kind));
  root.set("seed", std::to_string(seed));
  root.set("starts", starts);
  root.set("objective", result.objective);
  root.set("converged", result.converged);
  root.set("no_improvement", result.no_improvement);
  root.set("total_evaluations", result.total_evaluations);
  root.set("best_start_index", result.best_start_index);
  KvNode& best = root.child("best");
  for (size_t i = 0; i < problem.free.size(); ++i) {
    best.set(problem.free[i].name, result.best_params[i]);
  }
  if (!problem.fixed.empty()) {
    KvNode& fixed = root.child("fixed");
    for (const auto& [name, value] : problem.fixed) fixed.set(name, value);
  }
  KvNode& outcomes = root.child("start_outcomes");
  for (const auto& outcome : result.starts) {
    KvNode& row = outcomes.child(std::to_string(outcome.index));
    row.set("objective", outcome.objective);
    row.set("evaluations", outcome.evaluations);
    row.set("converged", outcome.converged);
  }
  if (!result.warnings.empty()) {
    KvNode& warnings = root.child("warnings");
    for (size_t i = 0; i < result.warnings.size(); ++i) {
      warnings.set(std::to_string(i), result.warnings[i]);
    }
  }
  return root.render();
}

}  // namespace adapt
