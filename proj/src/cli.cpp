#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "phaselab/scenario.hpp"

namespace phaselab {

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 2;
constexpr int kFailed = 3;

struct Outcome {
  int code = kOk;
  std::string out;
  std::string err;
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string diagnostics_text(const std::string& source, const ConfigError& e) {
  std::string s = source + ": invalid config\n";
  for (const auto& d : e.diagnostics()) s += "  " + d.field + ": " + d.message + "\n";
  return s;
}

Outcome run_one(const std::string& path, const std::filesystem::path& root) {
  Outcome o;
  try {
    const ScenarioConfig cfg = load_config(path);
    const RunResult r = run_scenario(cfg, root);
    o.out = path + ": ok -> " + r.directory.string() + "\n";
    for (const auto& [key, value] : r.headline) o.out += "  " + key + " = " + fmt(value) + "\n";
  } catch (const ConfigError& e) {
    o.code = kInvalid;
    o.err = diagnostics_text(path, e);
  } catch (const RunFailure& e) {
    o.code = kFailed;
    o.err = path + ": run failed (" + std::string(to_string(e.kind())) + "): " + e.what() +
            "\n  partial outputs kept in " + e.directory().string() + " (no manifest)\n";
  } catch (const std::exception& e) {
    o.code = kFailed;
    o.err = path + ": run failed: " + e.what() + "\n";
  }
  return o;
}

int cmd_run(const std::vector<std::string>& configs, const std::string& out_dir, int jobs) {
  const auto root = resolve_out_root(out_dir.empty() ? std::nullopt : std::optional<std::filesystem::path>(out_dir));
  std::vector<Outcome> outcomes(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < configs.size();) outcomes[i] = run_one(configs[i], root);
  };
  const auto n_threads = std::min<std::size_t>(std::max(jobs, 1), configs.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  int code = kOk;
  for (const auto& o : outcomes) {
    std::cout << o.out;
    std::cerr << o.err;
    code = std::max(code, o.code);
  }
  return code;
}

int cmd_validate(const std::vector<std::string>& configs) {
  int code = kOk;
  for (const auto& path : configs) {
    try {
      const ScenarioConfig cfg = load_config(path);
      std::cout << path << ": ok (kind " << cfg.kind << ", name " << cfg.name << ")\n";
    } catch (const ConfigError& e) {
      std::cerr << diagnostics_text(path, e);
      code = kInvalid;
    }
  }
  return code;
}

int cmd_list() {
  for (const auto& kind : scenario_kinds()) {
    std::cout << kind.name << ": " << kind.summary << "\n";
    std::cout << "  [grid] "
              << (kind.grid == GridUse::required   ? "required"
                  : kind.grid == GridUse::optional ? "optional (sized automatically when absent)"
                                                   : "not used")
              << "\n";
    for (const auto& k : kind.params) {
      std::cout << "  params." << k.key;
      if (k.required) {
        std::cout << " (required)";
      } else if (!k.default_value.empty()) {
        std::cout << " (default " << k.default_value << ")";
      } else {
        std::cout << " (optional)";
      }
      std::cout << ": " << k.help;
      if (!k.choices.empty()) {
        std::cout << " [";
        for (std::size_t i = 0; i < k.choices.size(); ++i) std::cout << (i ? "|" : "") << k.choices[i];
        std::cout << "]";
      }
      std::cout << "\n";
    }
    std::cout << "  headline:";
    for (const auto& h : kind.headline) std::cout << " " << h;
    std::cout << "\n";
  }
  return kOk;
}

int cmd_report(const std::string& run_dir) {
  const std::filesystem::path dir(run_dir);
  if (!std::filesystem::is_directory(dir)) {
    std::cerr << run_dir << ": not a directory\n";
    return kInvalid;
  }
  const auto manifest_path = dir / "manifest.json";
  if (!std::filesystem::exists(manifest_path)) {
    std::cerr << run_dir << ": incomplete run (no manifest.json)\n";
    return kFailed;
  }
  nlohmann::ordered_json manifest;
  try {
    std::ifstream in(manifest_path);
    manifest = nlohmann::ordered_json::parse(in);
  } catch (const std::exception& e) {
    std::cerr << run_dir << ": unreadable manifest: " << e.what() << "\n";
    return kFailed;
  }
  int code = kOk;
  const auto& echo = manifest["config_echo"]["scenario"];
  std::cout << "run " << dir.filename().string() << "\n"
            << "  scenario " << echo.value("name", "?") << " (" << echo.value("kind", "?") << ")\n"
            << "  code_version " << manifest.value("code_version", "?") << "\n"
            << "  started " << manifest.value("started", "?") << ", finished " << manifest.value("finished", "?")
            << "\n";
  for (const auto& o : manifest["outputs"]) {
    const std::string file = o.value("file", "");
    const auto path = dir / file;
    if (!std::filesystem::exists(path)) {
      std::cerr << "  missing output " << file << "\n";
      code = kFailed;
    } else if (crc32_of_file(path) != o.value("checksum", "")) {
      std::cerr << "  checksum mismatch for " << file << "\n";
      code = kFailed;
    }
  }
  std::cout << "headline_metrics\n";
  for (const auto& [key, value] : manifest["headline_metrics"].items()) {
    std::cout << "  " << key << " = " << (value.is_number() ? fmt(value.get<double>()) : value.dump()) << "\n";
  }
  return code;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"phaselab: material-phase numerical laboratory"};
  app.set_version_flag("--version", PHASELAB_VERSION);
  app.require_subcommand(1);

  std::vector<std::string> run_configs;
  std::string out_dir;
  int jobs = 1;
  auto* run = app.add_subcommand("run", "run scenario configs into fresh run directories");
  run->add_option("configs", run_configs, "config files")->required();
  run->add_option("--out-dir", out_dir, "output root (default: $PHASELAB_OUT_DIR, else ./runs)");
  run->add_option("-j,--jobs", jobs, "configs run concurrently")->check(CLI::PositiveNumber);

  std::vector<std::string> validate_configs;
  auto* validate = app.add_subcommand("validate", "parse and validate configs without running");
  validate->add_option("configs", validate_configs, "config files")->required();

  auto* list = app.add_subcommand("list-scenarios", "print scenario kinds and their keys");

  std::string run_dir;
  auto* report = app.add_subcommand("report", "reprint the headline metrics of a completed run");
  report->add_option("run_dir", run_dir, "run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kInvalid;
  }
  if (run->parsed()) return cmd_run(run_configs, out_dir, jobs);
  if (validate->parsed()) return cmd_validate(validate_configs);
  if (list->parsed()) return cmd_list();
  if (report->parsed()) return cmd_report(run_dir);
  return kInvalid;
}

}  // namespace phaselab
