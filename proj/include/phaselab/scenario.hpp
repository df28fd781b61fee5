#pragma once

// Declarative scenarios: config schema, validation, execution into a run
// directory, and the command-line entry point.

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "phaselab/fields.hpp"

namespace phaselab {

enum class ValueType { integer, real, boolean, text, real_list };

struct KeySpec {
  std::string_view key;
  ValueType type;
  bool required;
  std::string_view default_value;  // empty and not required: key may be absent
  std::string_view help;
  std::vector<std::string_view> choices = {};  // text values only
};

enum class GridUse { required, optional, unused };

struct KindSpec {
  std::string_view name;
  std::string_view summary;
  GridUse grid;
  std::vector<KeySpec> params;
  std::vector<std::string_view> headline;
};

const std::vector<KindSpec>& scenario_kinds();
const KindSpec* find_kind(std::string_view name);

struct Diagnostic {
  std::string field;  // "section.key", or "config" for syntax problems
  std::string message;
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<Diagnostic> diagnostics);
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

using ConfigValue = std::variant<long long, double, bool, std::string, std::vector<double>>;

struct GridSpec {
  long long n_points = 0;
  double x_min = 0.0;
  double x_max = 0.0;

  Grid1D make() const { return Grid1D(n_points, x_min, x_max); }
};

/// A parsed and validated scenario with every default filled in.
struct ScenarioConfig {
  std::string name;
  std::string kind;
  std::optional<GridSpec> grid;
  PhysicalConstants physics;
  std::map<std::string, ConfigValue> params;
  long long snapshot_every = 10;
  bool emit_svg = false;

  bool has(const std::string& key) const { return params.count(key) != 0; }
  double real(const std::string& key) const;
  long long integer(const std::string& key) const;
  const std::string& text(const std::string& key) const;
  const std::vector<double>& list(const std::string& key) const;
};

/// Parses INI-style text ([scenario], [grid], [physics], [params], [output]).
/// Throws ConfigError carrying one diagnostic per offending field.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::filesystem::path& path);

struct OutputRecord {
  std::string file;
  std::string role;
  std::string checksum;  // "crc32:xxxxxxxx"
};

struct RunResult {
  std::filesystem::path directory;
  std::vector<OutputRecord> outputs;
  std::map<std::string, double> headline;
};

/// Output root: explicit value, else $PHASELAB_OUT_DIR, else "runs".
std::filesystem::path resolve_out_root(const std::optional<std::filesystem::path>& explicit_root);

/// A numerical failure during a run. Files written so far stay in the run
/// directory; no manifest is written.
class RunFailure : public std::runtime_error {
 public:
  RunFailure(std::filesystem::path directory, ErrorKind kind, const std::string& what);
  const std::filesystem::path& directory() const { return directory_; }
  ErrorKind kind() const { return kind_; }

 private:
  std::filesystem::path directory_;
  ErrorKind kind_;
};

/// Executes the scenario into a fresh <root>/<name>-<timestamp>[-N] directory
/// and writes manifest.json last. Throws RunFailure on numerical errors.
RunResult run_scenario(const ScenarioConfig& config, const std::filesystem::path& out_root);

/// The scenario body alone, writing into an existing directory.
RunResult execute_scenario(const ScenarioConfig& config, const std::filesystem::path& directory);

std::string crc32_of_file(const std::filesystem::path& path);

/// Exit codes: 0 success, 2 invalid config or usage, 3 numerical failure or
/// incomplete run.
int cli_main(int argc, char** argv);

}  // namespace phaselab
