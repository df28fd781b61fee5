#include "output.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iterator>
#include <sstream>

#include <boost/crc.hpp>

#include "json.hpp"

namespace phaselab {

std::string crc32_of_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  boost::crc_32_type crc;
  crc.process_bytes(bytes.data(), bytes.size());
  char buf[20];
  std::snprintf(buf, sizeof buf, "crc32:%08x", static_cast<unsigned>(crc.checksum()));
  return buf;
}

namespace detail {

namespace {

std::string format_time(const char* fmt) {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, fmt, &tm);
  return buf;
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  out.close();
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

nlohmann::ordered_json value_json(const ConfigValue& v) {
  return std::visit([](const auto& x) { return nlohmann::ordered_json(x); }, v);
}

}  // namespace

std::string utc_timestamp() { return format_time("%Y-%m-%dT%H:%M:%SZ"); }
std::string compact_timestamp() { return format_time("%Y%m%dT%H%M%SZ"); }

std::filesystem::path create_run_directory(const std::filesystem::path& root, const std::string& name) {
  std::filesystem::create_directories(root);
  const std::string base = name + "-" + compact_timestamp();
  for (int n = 1;; ++n) {
    const auto dir = root / (n == 1 ? base : base + "-" + std::to_string(n));
    // create_directory reports false when the directory already exists, so
    // concurrent runs never share one.
    if (std::filesystem::create_directory(dir)) return dir;
  }
}

RunWriter::RunWriter(std::filesystem::path directory, bool emit_svg)
    : directory_(std::move(directory)), emit_svg_(emit_svg) {}

void RunWriter::csv(const std::string& file, const std::string& role, const Table& table) {
  std::string out;
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    out += (j ? "," : "") + table.header[j];
  }
  out += "\r\n";
  const std::size_t rows = table.columns.empty() ? 0 : table.columns.front().size();
  for (const auto& col : table.columns) {
    if (col.size() != rows) throw std::logic_error("ragged table for " + file);
  }
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < table.columns.size(); ++j) {
      if (j) out += ',';
      out += g17(table.columns[j][i]);
    }
    out += "\r\n";
  }
  const auto path = directory_ / file;
  write_file(path, out);
  outputs_.push_back({file, role, crc32_of_file(path)});
}

void RunWriter::svg(const std::string& file, const std::string& role, const Table& table, const PlotSpec& plot) {
  if (!emit_svg_) return;
  try {
    const double w = 720, h = 440, left = 70, right = 170, top = 40, bottom = 50;
    const auto& xs = table.columns.at(0);
    double x_lo = INFINITY, x_hi = -INFINITY, y_lo = INFINITY, y_hi = -INFINITY;
    for (double v : xs) {
      if (std::isfinite(v)) x_lo = std::min(x_lo, v), x_hi = std::max(x_hi, v);
    }
    for (std::size_t s : plot.series) {
      for (double v : table.columns.at(s)) {
        if (std::isfinite(v)) y_lo = std::min(y_lo, v), y_hi = std::max(y_hi, v);
      }
    }
    if (!(x_hi > x_lo)) x_hi = x_lo + 1;
    if (!(y_hi > y_lo)) y_hi = y_lo + 1;
    const double pw = w - left - right, ph = h - top - bottom;
    auto sx = [&](double v) { return left + (v - x_lo) / (x_hi - x_lo) * pw; };
    auto sy = [&](double v) { return top + (y_hi - v) / (y_hi - y_lo) * ph; };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b"};

    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << w << "\" height=\"" << h << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<text x=\"" << left << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\">" << xml_escape(plot.title)
       << "</text>\n"
       << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    auto label = [&](double x, double y, const std::string& text, const char* anchor) {
      os << "<text x=\"" << x << "\" y=\"" << y << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\""
         << anchor << "\">" << xml_escape(text) << "</text>\n";
    };
    label(left, h - bottom + 16, short_num(x_lo), "start");
    label(left + pw, h - bottom + 16, short_num(x_hi), "end");
    label(left + pw / 2, h - 12, plot.x_label, "middle");
    label(left - 6, top + 10, short_num(y_hi), "end");
    label(left - 6, top + ph, short_num(y_lo), "end");
    for (std::size_t k = 0; k < plot.series.size(); ++k) {
      const auto& ys = table.columns.at(plot.series[k]);
      const char* color = colors[k % std::size(colors)];
      os << "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"" << color << "\" points=\"";
      for (std::size_t i = 0; i < xs.size(); ++i) {
        if (std::isfinite(xs[i]) && std::isfinite(ys[i])) os << sx(xs[i]) << ',' << sy(ys[i]) << ' ';
      }
      os << "\"/>\n";
      const double ly = top + 14 + 18.0 * double(k);
      os << "<line x1=\"" << w - right + 12 << "\" y1=\"" << ly - 4 << "\" x2=\"" << w - right + 32 << "\" y2=\""
         << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
      label(w - right + 38, ly, table.header.at(plot.series[k]), "start");
    }
    os << "</svg>\n";
    const auto path = directory_ / file;
    write_file(path, os.str());
    outputs_.push_back({file, role, crc32_of_file(path)});
  } catch (...) {
    // Plots are a convenience; the CSVs carry the results.
  }
}

void write_manifest(const std::filesystem::path& directory, const ScenarioConfig& config, const std::string& started,
                    const std::string& finished, const std::vector<OutputRecord>& outputs,
                    const std::map<std::string, double>& headline) {
  using json = nlohmann::ordered_json;
  json echo;
  echo["scenario"] = {{"name", config.name}, {"kind", config.kind}};
  if (config.grid) {
    echo["grid"] = {{"n_points", config.grid->n_points}, {"x_min", config.grid->x_min}, {"x_max", config.grid->x_max}};
  }
  echo["physics"] = {{"hbar", config.physics.hbar}, {"mass", config.physics.mass}};
  json params = json::object();
  for (const auto& [key, value] : config.params) params[key] = value_json(value);
  echo["params"] = params;
  echo["output"] = {{"snapshot_every", config.snapshot_every}, {"emit_svg", config.emit_svg}};

  json files = json::array();
  for (const auto& o : outputs) files.push_back({{"file", o.file}, {"role", o.role}, {"checksum", o.checksum}});
  json metrics = json::object();
  for (const auto& [key, value] : headline) {
    metrics[key] = std::isfinite(value) ? json(value) : json(g17(value));
  }

  json manifest;
  manifest["config_echo"] = echo;
  manifest["code_version"] = PHASELAB_VERSION;
  manifest["started"] = started;
  manifest["finished"] = finished;
  manifest["outputs"] = files;
  manifest["headline_metrics"] = metrics;

  const auto tmp = directory / "manifest.json.tmp";
  write_file(tmp, manifest.dump(2) + "\n");
  std::filesystem::rename(tmp, directory / "manifest.json");
}

}  // namespace detail

}  // namespace phaselab
