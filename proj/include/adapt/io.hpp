#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "adapt/analysis.hpp"
#include "adapt/fitting.hpp"
#include "adapt/simulate.hpp"

namespace adapt {

// Shortest representation that parses back to the same double.
std::string format_double(double value);

// Same, but guarantees the text reads as floating point: "0" becomes "0.0".
// Used for CSV columns so integer-valued entries keep their type.
std::string format_double_pointed(double value);

// Strict full-string parse. `what` names the field for diagnostics.
double parse_double(std::string_view text, const std::string& what);
int parse_int(std::string_view text, const std::string& what);

// Whole-file atomic write: temp file in the same directory, then rename.
void atomic_write_file(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

// Ordered key-value tree rendered as indented "key: value" text, two
// spaces per level. List entries appear as numeric keys.
class KvNode {
 public:
  KvNode& child(const std::string& key);
  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, const char* value);
  void set(const std::string& key, double value);
  void set(const std::string& key, bool value);
  void set(const std::string& key, int value);
  void set(const std::string& key, long value);

  std::string render() const;

 private:
  void render_into(std::string& out, int depth) const;

  using Entry = std::pair<std::string, std::variant<std::string, std::unique_ptr<KvNode>>>;
  std::vector<Entry> entries_;
};

void add_model_kv(KvNode& node, const Model& model);
void add_protocol_kv(KvNode& node, const Protocol& protocol);

// Trajectory table, header "trial,x,error,p", one row per record, shortest
// round-trip decimals. This is the interchange format the fitter reads back.
std::string trajectory_to_csv(const Trajectory& traj);
std::string trajectory_to_kv(const Trajectory& traj);

// Rebuilds a trajectory from its CSV table. The protocol magnitude and kind
// come from the caller; n_trials and x0 are taken from the rows.
Trajectory load_trajectory_csv(const std::filesystem::path& path,
                               ProtocolKind kind, double magnitude);
Trajectory parse_trajectory_csv(std::string_view text, ProtocolKind kind,
                                double magnitude, const std::string& origin);

// Family file: "k_ref,<value>" line, then "e,f,g" header and rows.
std::string family_to_csv(const GeneralLinearFamily& family);
GeneralLinearFamily load_family_csv(const std::filesystem::path& path);
GeneralLinearFamily parse_family_csv(std::string_view text, const std::string& origin);

std::string sweep_to_csv(const std::vector<SweepRow>& rows);
std::string sweep_to_kv(const std::vector<SweepRow>& rows);

std::string falsification_to_kv(const FalsificationReport& report);

// Per-point residual table for a uniqueness verdict.
std::string uniqueness_points_to_csv(const UniquenessVerdict& verdict);
std::string uniqueness_to_kv(const UniquenessVerdict& verdict);

std::string fit_result_to_kv(const FitResult& result, const FitProblem& problem,
                             std::uint64_t seed, int starts);

}  // namespace adapt
