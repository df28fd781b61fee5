#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "phaselab/scenario.hpp"

namespace phaselab::detail {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  void add(std::string name, std::vector<double> values) {
    header.push_back(std::move(name));
    columns.push_back(std::move(values));
  }
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::vector<std::size_t> series;  // column indices plotted against column 0
};

std::string utc_timestamp();        // 2026-10-15T08:30:00Z
std::string compact_timestamp();    // 20261015T083000Z

/// Creates <root>/<name>-<stamp>, appending -2, -3, ... on collision.
std::filesystem::path create_run_directory(const std::filesystem::path& root, const std::string& name);

class RunWriter {
 public:
  explicit RunWriter(std::filesystem::path directory, bool emit_svg);

  /// Header row, then one row per sample with %.17g floats, CRLF line ends.
  void csv(const std::string& file, const std::string& role, const Table& table);

  /// Line plot of selected columns; failures are swallowed.
  void svg(const std::string& file, const std::string& role, const Table& table, const PlotSpec& plot);

  const std::vector<OutputRecord>& outputs() const { return outputs_; }
  const std::filesystem::path& directory() const { return directory_; }

 private:
  std::filesystem::path directory_;
  bool emit_svg_;
  std::vector<OutputRecord> outputs_;
};

/// Writes manifest.json atomically (temporary file, then rename).
void write_manifest(const std::filesystem::path& directory, const ScenarioConfig& config, const std::string& started,
                    const std::string& finished, const std::vector<OutputRecord>& outputs,
                    const std::map<std::string, double>& headline);

}  // namespace phaselab::detail
