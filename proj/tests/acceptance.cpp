// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <unistd.h>

#include "json.hpp"
#include "oracles.hpp"
#include "phaselab/interference.hpp"
#include "phaselab/madelung.hpp"
#include "phaselab/scenario.hpp"
#include "phaselab/two_level.hpp"

using namespace phaselab;
namespace fs = std::filesystem;
using std::numbers::pi;

namespace {

struct Report {
  bool pass = true;
  std::string detail;

  // Records "label=value (op tol)" and folds the comparison into pass.
  void at_most(const std::string& label, double value, double tol) { add(label, value, "<=", tol, value <= tol); }
  void at_least(const std::string& label, double value, double tol) { add(label, value, ">=", tol, value >= tol); }
  void holds(const std::string& label, bool ok) {
    pass = pass && ok;
    detail += (detail.empty() ? "" : "; ") + label + (ok ? " yes" : " NO");
  }

 private:
  void add(const std::string& label, double value, const char* op, double tol, bool ok) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s=%.3g (%s %.3g)%s", label.c_str(), value, op, tol, ok ? "" : " NO");
    pass = pass && ok;
    detail += (detail.empty() ? "" : "; ") + std::string(buf);
  }
};

int failures = 0;

void criterion(const char* id, const char* title, double limit_s, const std::function<void(Report&)>& body) {
  Report r;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(r);
  } catch (const std::exception& e) {
    r.pass = false;
    r.detail += std::string(r.detail.empty() ? "" : "; ") + "exception: " + e.what();
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  char timing[80];
  if (limit_s > 0) {
    std::snprintf(timing, sizeof timing, "%.2f s (limit %.0f s)", seconds, limit_s);
    if (seconds > limit_s) r.pass = false;
  } else {
    std::snprintf(timing, sizeof timing, "%.2f s", seconds);
  }
  if (!r.pass) ++failures;
  std::cout << id << " " << (r.pass ? "PASS" : "FAIL") << "  " << title << " | " << r.detail << " | " << timing
            << std::endl;
}

double max_on(const RealArrayXd& a, const MaskArray& m) { return m.select(a.abs(), 0.0).maxCoeff(); }

ComplexField harmonic_ground_field(const Grid1D& g, double shift = 0.0) {
  ComplexField psi(g);
  for (Eigen::Index i = 0; i < g.size(); ++i) psi.values(i) = oracle::harmonic_ground(g.x(i) - shift, 1.0);
  return psi;
}

PulseSpec constant_pulse(double rabi, double detuning, std::vector<PhaseJump> jumps = {}) {
  PulseSpec p;
  p.rabi_peak = rabi;
  p.detuning = detuning;
  p.phase_profile = std::move(jumps);
  return p;
}

double wrapped_distance(double a, double b) { return std::abs(std::remainder(a - b, 2 * pi)); }

QhjResiduals free_gaussian_residuals(Eigen::Index n, double dt) {
  const Grid1D g(n, -20.0, 20.0);
  const auto res = evolve(make_gaussian(g, 0.0, 1.0, 0.0), FreeParticle{}, 0.1, dt, 10);
  return qhj_residuals(polar_decompose(res.snapshots), res.times, FreeParticle{}, 1e-3);
}

// Runs the CLI with its console output captured.
int quiet_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "phaselab");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream sink;
  auto* out = std::cout.rdbuf(sink.rdbuf());
  auto* err = std::cerr.rdbuf(sink.rdbuf());
  const int code = cli_main(int(argv.size()), argv.data());
  std::cout.rdbuf(out);
  std::cerr.rdbuf(err);
  return code;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Completed runs under root keyed by scenario name.
std::map<std::string, fs::path> runs_by_name(const fs::path& root) {
  std::map<std::string, fs::path> out;
  for (const auto& e : fs::directory_iterator(root)) {
    if (!fs::exists(e.path() / "manifest.json")) continue;
    const auto m = nlohmann::json::parse(slurp(e.path() / "manifest.json"));
    out[m["config_echo"]["scenario"]["name"].get<std::string>()] = e.path();
  }
  return out;
}

}  // namespace

int main() {
  criterion("AC1", "oracle fidelity", 5.0, [](Report& r) {
    const Grid1D g(1024, -20.0, 20.0);
    const auto free = evolve(make_gaussian(g, 0.0, 1.0, 0.0), FreeParticle{}, 2.0, 1e-3, 100);
    r.at_most("|sigma(2)-sqrt2|", std::abs(std::sqrt(position_variance(free.psi_final)) - std::sqrt(2.0)), 1e-3);

    const Grid1D gh(512, -12.0, 12.0);
    const auto coh = evolve(harmonic_ground_field(gh, 2.0), Harmonic{1.0}, 2 * pi, 2 * pi / 4000, 100);
    r.at_most("|<x>(2pi)-2|", std::abs(expectation_position(coh.psi_final) - 2.0), 1e-3);
    r.at_most("max step norm change", std::max(free.max_step_norm_change, coh.max_step_norm_change), 1e-12);
  });

  criterion("AC2", "coupled-equation satisfaction", 30.0, [](Report& r) {
    const Grid1D g(512, -10.0, 10.0);
    const RealArrayXd R = harmonic_ground_field(g).values.real();
    std::vector<HydroFields> fields;
    std::vector<double> times;
    for (int j = 0; j <= 10; ++j) {
      times.push_back(0.1 * j);
      fields.emplace_back(g, R, RealArrayXd::Constant(g.size(), -0.5 * times.back()));
    }
    const QhjResiduals stationary = qhj_residuals(fields, times, Harmonic{1.0});
    r.at_most("stationary hj_max", stationary.hj_max, 1e-6);
    r.at_most("stationary continuity_max", stationary.continuity_max, 1e-10);

    const QhjResiduals coarse = free_gaussian_residuals(1024, 1e-3);
    const QhjResiduals fine = free_gaussian_residuals(2048, 5e-4);
    r.at_least("hj_max reduction", coarse.hj_max / fine.hj_max, 3.0);
    r.at_least("continuity_max reduction", coarse.continuity_max / fine.continuity_max, 3.0);
  });

  criterion("AC3", "direct Madelung integration", 30.0, [](Report& r) {
    const Grid1D g(1024, -5.0, 5.0);
    const auto res = evolve(make_gaussian(g, 0.0, 1.0, 0.0), FreeParticle{}, 0.5, 1e-3, 500);
    const auto oracle_fields = polar_decompose(res.snapshots);
    const ValidMask mask = make_valid_mask(oracle_fields.front().R);
    const HydroFields direct = madelung_evolve(oracle_fields.front(), FreeParticle{}, 0.5, madelung_max_dt(g), mask);
    const MaskArray m = make_valid_mask(oracle_fields.back().R).mask;
    r.at_most("max|dR|", max_on(direct.R - oracle_fields.back().R, m), 1e-3);
    r.at_most("max|dS|/hbar", max_on(direct.S - oracle_fields.back().S, m), 1e-2);
  });

  criterion("AC4", "round trip and phase covariance", 0.0, [](Report& r) {
    const Grid1D g(1024, -20.0, 20.0);
    ComplexField two(g, make_gaussian(g, -4.0, 1.0, 1.0).values + 0.7 * make_gaussian(g, 4.0, 0.8, -2.0).values);
    two.values /= std::sqrt(norm_squared(two));
    const auto res = evolve(two, FreeParticle{}, 3.0, 1e-3, 100);
    const auto fields = polar_decompose(res.snapshots);
    double round_trip = 0.0;
    for (std::size_t j = 0; j < fields.size(); ++j) {
      const MaskArray m = make_valid_mask(fields[j].R).mask;
      const ComplexArrayXd diff = reconstruct_psi(fields[j]).values - res.snapshots[j].values;
      round_trip = std::max(round_trip, m.select(diff.abs(), 0.0).maxCoeff());
    }
    r.at_most("round trip", round_trip, 1e-10);

    const ComplexField psi = make_gaussian(g, 1.0, 1.3, -0.8);
    const HydroFields base = polar_decompose(psi);
    const MaskArray m = make_valid_mask(base.R).mask;
    double worst = 0.0;
    for (double alpha : {pi / 7, 1.0, 3.0}) {
      const HydroFields h = polar_decompose(ComplexField(g, psi.values * std::polar(1.0, alpha)));
      const RealArrayXd shift = h.S - base.S;
      const double branch = 2 * pi * std::round((shift(g.nearest_index(1.0)) - alpha) / (2 * pi));
      worst = std::max({worst, max_on(shift - alpha - branch, m), (h.R - base.R).abs().maxCoeff()});
    }
    r.at_most("S shift - hbar alpha (3 alphas)", worst, 1e-10);
  });

  criterion("AC5", "Bohmian consistency", 0.0, [](Report& r) {
    const Grid1D g(1024, -20.0, 20.0);
    const auto res = evolve(make_gaussian(g, 0.0, 1.0, 0.0), FreeParticle{}, 2.0, 1e-3, 10);
    const auto fields = polar_decompose(res.snapshots);
    std::vector<Trajectory> tr;
    for (double xs : {-1.0, 0.0, 1.0}) tr.push_back(integrate_trajectory(fields, res.times, xs));
    r.at_most("|x(2)-sqrt2|", std::abs(tr[2].positions.back() - std::sqrt(2.0)), 1e-3);
    double action = 0.0;
    bool ordered = true;
    for (std::size_t i = 0; i < tr[2].times.size(); ++i) {
      action = std::max(action, std::abs(tr[2].action_sampled[i] - tr[2].action_integrated[i]));
      ordered = ordered && tr[0].positions[i] < tr[1].positions[i] && tr[1].positions[i] < tr[2].positions[i];
    }
    r.at_most("max|S_sampled-S_integrated|/hbar", action, 1e-2);
    r.holds("ordering preserved", ordered);
  });

  criterion("AC6", "phase to population causality", 5.0, [](Report& r) {
    const double pe_pi = propagate(TwoLevelState{}, constant_pulse(pi, 0.0), 1.0, 1e-3).back().excited_population();
    r.at_most("|P_e(pi pulse)-1|", std::abs(pe_pi - 1.0), 1e-6);
    const double pe_echo =
        propagate(TwoLevelState{}, constant_pulse(pi, 0.0, {{0.5, pi}}), 1.0, 1e-3).back().excited_population();
    r.at_most("P_e(echo)", pe_echo, 1e-6);
    std::vector<double> values;
    for (int i = 0; i < 8; ++i) values.push_back(2 * pi * i / 8);
    double lo = 1.0, hi = 0.0;
    for (const auto& [phi, pe] : phase_scan(constant_pulse(pi, 0.0), 0.5, values, 1.0, 1e-3)) {
      lo = std::min(lo, pe);
      hi = std::max(hi, pe);
    }
    r.at_least("scan range", hi - lo, 0.5);
    const double offset =
        propagate(TwoLevelState{}, constant_pulse(pi, 0.0, {{0.0, 1.234}}), 1.0, 1e-3).back().excited_population();
    r.at_most("global offset change", std::abs(offset - pe_pi), 1e-10);
  });

  criterion("AC7", "dressed-state structure", 0.0, [](Report& r) {
    const auto d = dressed_decompose(TwoLevelState{}, constant_pulse(4.0, 3.0));
    r.at_most("|gap-5|", std::abs(d.e_plus - d.e_minus - 5.0), 1e-10);
    PulseSpec ramp;
    ramp.rabi_peak = 2.0;
    ramp.detuning = 1.0;
    ramp.envelope = GaussianEnvelope{250.0, 50.0};
    const auto states = propagate(TwoLevelState{}, ramp, 250.0, 0.01);
    double plus_lo = 1.0, plus_hi = 0.0, minus_lo = 1.0, minus_hi = 0.0;
    for (const auto& s : states) {
      const auto dd = dressed_decompose(s, ramp);
      plus_lo = std::min(plus_lo, std::norm(dd.a_plus));
      plus_hi = std::max(plus_hi, std::norm(dd.a_plus));
      minus_lo = std::min(minus_lo, std::norm(dd.a_minus));
      minus_hi = std::max(minus_hi, std::norm(dd.a_minus));
    }
    r.at_most("dressed change", std::max(plus_hi - plus_lo, minus_hi - minus_lo), 1e-2);
    r.at_least("bare change", std::abs(states.back().excited_population() - states.front().excited_population()), 0.1);
  });

  criterion("AC8", "phase to fringe causality", 60.0, [](Report& r) {
    std::vector<double> phis;
    for (int i = 0; i < 8; ++i) phis.push_back(2 * pi * i / 8);
    const auto prep = phase_to_fringe_scan(8.0, 0.5, 6.0, phis);
    std::vector<double> applied, extracted;
    for (const auto& p : prep) {
      applied.push_back(p.applied);
      extracted.push_back(p.extracted);
    }
    const LineFit fit = fit_line(applied, extracted);
    r.at_most("|slope-1|", std::abs(fit.slope - 1.0), 0.02);
    r.at_most("|offset|", std::abs(fit.offset), 0.05);

    FringeScanOptions mid;
    mid.application = PhaseApplication::mid_flight;
    const auto kicked = phase_to_fringe_scan(8.0, 0.5, 6.0, phis, mid);
    double mismatch = 0.0;
    for (std::size_t i = 0; i < phis.size(); ++i) mismatch = std::max(mismatch, std::abs(kicked[i].extracted - prep[i].extracted));
    r.at_most("prep vs mid-flight", mismatch, 0.05);

    const Grid1D g = interference_grid(8.0, 1.0, 6.0);
    const ComplexField psi = evolve(two_packet_state(g, 8.0, 1.0, pi), FreeParticle{}, 6.0, 0.01, 600).psi_final;
    const FringeAnalysis fa = fringe_analysis(psi, 3 * pi / 2);
    r.at_most("|shift(dphi=pi)-pi|", wrapped_distance(fa.phase_shift, pi), 0.05);
    r.holds("central minimum", fa.center_intensity <= 1e-6 * psi.values.abs2().maxCoeff());
  });

  criterion("AC9", "CLI contract", 0.0, [](Report& r) {
    const fs::path root = fs::temp_directory_path() / ("phaselab-acceptance-" + std::to_string(::getpid()));
    fs::remove_all(root);
    fs::create_directories(root);
    std::vector<std::string> configs;
    for (const auto& e : fs::directory_iterator(fs::path(PHASELAB_SOURCE_DIR) / "scenarios")) {
      if (e.path().extension() == ".ini") configs.push_back(e.path().string());
    }
    std::sort(configs.begin(), configs.end());

    auto run_all = [&](const fs::path& out) {
      std::vector<std::string> args{"run"};
      args.insert(args.end(), configs.begin(), configs.end());
      args.insert(args.end(), {"--out-dir", out.string(), "--jobs", "2"});
      return quiet_cli(args);
    };
    const int first = run_all(root / "a");
    const int second = run_all(root / "b");
    r.holds("shipped scenarios exit 0", first == 0 && second == 0);

    const auto a = runs_by_name(root / "a");
    const auto b = runs_by_name(root / "b");
    bool identical = a.size() == configs.size() && b.size() == configs.size();
    std::set<std::string> kinds_seen;
    bool headlines = true;
    for (const auto& [name, dir] : a) {
      if (!b.count(name)) {
        identical = false;
        continue;
      }
      for (const auto& e : fs::directory_iterator(dir)) {
        if (e.path().extension() == ".csv") identical = identical && slurp(e.path()) == slurp(b.at(name) / e.path().filename());
      }
      const auto m = nlohmann::json::parse(slurp(dir / "manifest.json"));
      const std::string kind = m["config_echo"]["scenario"]["kind"];
      kinds_seen.insert(kind);
      for (const auto& h : find_kind(kind)->headline) headlines = headlines && m["headline_metrics"].contains(std::string(h));
    }
    r.holds("byte-identical CSVs on rerun", identical);
    r.holds("all 9 kinds emit their headline metrics", headlines && kinds_seen.size() == scenario_kinds().size());

    const fs::path bad = root / "bad.ini";
    std::ofstream(bad) << "[scenario]\nname=bad\nkind=free_gaussian\n[grid]\nn_points=1000\nx_min=-20\nx_max=20\n";
    const fs::path escape = root / "escape.ini";
    std::ofstream(escape) << "[scenario]\nname=escape\nkind=trajectory_ensemble\n[grid]\nn_points=512\nx_min=-10\n"
                             "x_max=10\n[params]\nx_starts=0,9\n";
    const bool invalid = quiet_cli({"run", bad.string(), "--out-dir", (root / "c").string()}) == 2;
    const bool failed = quiet_cli({"run", escape.string(), "--out-dir", (root / "c").string()}) == 3;
    bool incomplete = false;
    for (const auto& e : fs::directory_iterator(root / "c")) {
      incomplete = !fs::exists(e.path() / "manifest.json") && quiet_cli({"report", e.path().string()}) == 3;
    }
    const bool complete = !a.empty() && quiet_cli({"report", a.begin()->second.string()}) == 0;
    r.holds("exit 2 on invalid config", invalid);
    r.holds("exit 3 on numerical failure", failed);
    r.holds("report refuses incomplete run", incomplete && complete);
    fs::remove_all(root);
  });

  std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << std::endl;
  return failures == 0 ? 0 : 1;
}
