#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>

#include "output.hpp"
#include "phaselab/interference.hpp"
#include "phaselab/madelung.hpp"
#include "phaselab/scenario.hpp"
#include "phaselab/schrodinger.hpp"
#include "phaselab/two_level.hpp"

namespace phaselab {

namespace {

using detail::PlotSpec;
using detail::RunWriter;
using detail::Table;
using Metrics = std::map<std::string, double>;

constexpr double kPi = std::numbers::pi;

std::vector<double> to_vector(const RealArrayXd& a) { return {a.data(), a.data() + a.size()}; }

double spread_width(double sigma0, double t, const PhysicalConstants& c) {
  const double tau = c.hbar * t / (2.0 * c.mass * sigma0 * sigma0);
  return sigma0 * std::sqrt(1.0 + tau * tau);
}

// Leading snapshots that share one time spacing; evolve() may end on a shorter interval.
std::size_t uniform_prefix(const std::vector<double>& times) {
  if (times.size() < 3) return times.size();
  const double h = times[1] - times[0];
  std::size_t n = 2;
  while (n < times.size() && std::abs((times[n] - times[n - 1]) - h) <= 1e-9 * std::max(1.0, std::abs(h))) ++n;
  return n;
}

double max_on_mask(const RealArrayXd& a, const MaskArray& mask) {
  double m = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (mask(i)) m = std::max(m, std::abs(a(i)));
  }
  return m;
}

Table observables_table(const PropagationResult& res, bool with_sigma) {
  Table t;
  std::vector<double> norm, mean, sigma;
  for (const auto& psi : res.snapshots) {
    norm.push_back(norm_squared(psi));
    mean.push_back(expectation_position(psi));
    if (with_sigma) sigma.push_back(std::sqrt(position_variance(psi)));
  }
  t.add("t", res.times);
  t.add("norm", norm);
  t.add("mean_x", mean);
  if (with_sigma) t.add("sigma", sigma);
  return t;
}

Table hydro_table(const HydroFields& f, const PhysicalConstants& c, double epsilon) {
  Table t;
  t.add("x", to_vector(f.grid.positions()));
  t.add("R", to_vector(f.R));
  t.add("S", to_vector(f.S));
  t.add("Phi", to_vector(f.material_phase(c)));
  t.add("Q", to_vector(quantum_potential(f, make_valid_mask(f.R, epsilon), c)));
  return t;
}

void run_free_gaussian(const ScenarioConfig& c, RunWriter& w, Metrics& m) {
  const Grid1D grid = c.grid->make();
  const auto& pc = c.physics;
  const double s0 = c.real("sigma0");
  const ComplexField psi0 = make_gaussian(grid, c.real("x0"), s0, c.real("k0"));
  const auto res = evolve(psi0, FreeParticle{}, c.real("t_final"), c.real("dt"), c.snapshot_every, pc);

  Table obs = observables_table(res, true);
  std::vector<double> analytic;
  for (double t : res.times) analytic.push_back(spread_width(s0, t, pc));
  obs.add("sigma_analytic", analytic);
  w.csv("observables.csv", "time series of norm, mean position and width", obs);
  w.svg("sigma.svg", "width against time", obs, {"packet width", "t", {3, 4}});

  const HydroFields final_fields = polar_decompose(res.psi_final, pc);
  Table fields = hydro_table(final_fields, pc, 1e-3);
  fields.add("rho_initial", to_vector(psi0.values.abs2()));
  fields.add("rho_final", to_vector(res.psi_final.values.abs2()));
  w.csv("fields_final.csv", "final R, S, Phi, Q and densities", fields);
  w.svg("density.svg", "initial and final density", fields, {"probability density", "x", {5, 6}});

  m["sigma_final"] = obs.columns[3].back();
  m["sigma_analytic"] = analytic.back();
  m["sigma_error"] = std::abs(m["sigma_final"] - m["sigma_analytic"]);
  m["norm_drift"] = res.norm_drift;
  m["max_step_norm_change"] = res.max_step_norm_change;
}

void run_harmonic_stationary(const ScenarioConfig& c, RunWriter& w, Metrics& m) {
  const Grid1D grid = c.grid->make();
  const auto& pc = c.physics;
  const double omega = c.real("omega");
  const double eps = c.real("epsilon");
  const Harmonic V{omega, 0.0};
  const double sigma = std::sqrt(pc.hbar / (2.0 * pc.mass * omega));
  const ComplexField psi0 = make_gaussian(grid, 0.0, sigma, 0.0);
  const auto res = evolve(psi0, V, c.real("t_final"), c.real("dt"), c.snapshot_every, pc);
  const double e0 = 0.5 * pc.hbar * omega;

  const auto fields = polar_decompose(res.snapshots, pc, eps);
  double phase_error = 0.0;
  double modulus_error = 0.0;
  std::vector<double> s_center, mod_err;
  const Eigen::Index ic = grid.nearest_index(0.0);
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const auto mask = make_valid_mask(fields[i].R, eps);
    phase_error = std::max(phase_error, max_on_mask(fields[i].S + e0 * res.times[i], mask.mask));
    const double me = (fields[i].R - psi0.values.abs()).abs().maxCoeff();
    modulus_error = std::max(modulus_error, me);
    s_center.push_back(fields[i].S(ic));
    mod_err.push_back(me);
  }
  Table obs = observables_table(res, true);
  obs.add("S_center", s_center);
  obs.add("modulus_error", mod_err);
  w.csv("observables.csv", "time series of norm, position, width, central action and modulus error", obs);
  w.svg("action.svg", "central action against time", obs, {"S at x = 0", "t", {4}});

  const std::size_t n = uniform_prefix(res.times);
  const std::vector<HydroFields> used(fields.begin(), fields.begin() + std::ptrdiff_t(n));
  const std::vector<double> times(res.times.begin(), res.times.begin() + std::ptrdiff_t(n));
  const auto qr = qhj_residuals(used, times, V, eps, pc);

  std::vector<HydroFields> exact;
  for (double t : times) {
    exact.emplace_back(grid, psi0.values.abs(), RealArrayXd::Constant(grid.size(), -e0 * t));
  }
  const auto qa = qhj_residuals(exact, times, V, eps, pc);

  Table resid;
  resid.add("t", qr.times);
  std::vector<double> hj, co, hja, coa;
  for (Eigen::Index i = 0; i < qr.hj_residual.rows(); ++i) {
    hj.push_back(qr.hj_residual.row(i).abs().maxCoeff());
    co.push_back(qr.continuity_residual.row(i).abs().maxCoeff());
    hja.push_back(qa.hj_residual.row(i).abs().maxCoeff());
    coa.push_back(qa.continuity_residual.row(i).abs().maxCoeff());
  }
  resid.add("hj_max", hj);
  resid.add("continuity_max", co);
  resid.add("hj_max_analytic", hja);
  resid.add("continuity_max_analytic", coa);
  w.csv("residuals.csv", "per-time maxima of both hydrodynamic residuals on the mask", resid);
  w.svg("residuals.svg", "residual maxima against time", resid, {"hydrodynamic residuals", "t", {1, 2}});

  w.csv("fields_final.csv", "final R, S, Phi, Q", hydro_table(fields.back(), pc, eps));

  m["hj_max"] = qr.hj_max;
  m["continuity_max"] = qr.continuity_max;
  m["hj_max_analytic"] = qa.hj_max;
  m["continuity_max_analytic"] = qa.continuity_max;
  m["phase_error"] = phase_error;
  m["modulus_error"] = modulus_error;
  m["energy"] = expectation_energy(res.psi_final, V, pc);
}

void run_coherent_state(const ScenarioConfig& c, RunWriter& w, Metrics& m) {
  const Grid1D grid = c.grid->make();
  const auto& pc = c.physics;
  const double omega = c.real("omega");
  const double x0 = c.real("x0");
  const Harmonic V{omega, 0.0};
  const double sigma = std::sqrt(pc.hbar / (2.0 * pc.mass * omega));
  const double t_final = c.real("periods") * 2.0 * kPi / omega;
  const double steps = std::round(c.real("periods") * double(c.integer("steps_per_period")));
  const auto res = evolve(make_gaussian(grid, x0, sigma, 0.0), V, t_final, t_final / steps, c.snapshot_every, pc);

  Table obs = observables_table(res, true);
  std::vector<double> analytic, energy;
  double err_max = 0.0;
  for (std::size_t i = 0; i < res.times.size(); ++i) {
    analytic.push_back(x0 * std::cos(omega * res.times[i]));
    err_max = std::max(err_max, std::abs(obs.columns[2][i] - analytic.back()));
    energy.push_back(expectation_energy(res.snapshots[i], V, pc));
  }
  obs.add("mean_x_analytic", analytic);
  obs.add("energy", energy);
  w.csv("observables.csv", "time series of norm, mean position, width and energy", obs);
  w.svg("center.svg", "packet center against time", obs, {"<x>", "t", {2, 4}});

  m["center_final"] = obs.columns[2].back();
  m["center_error"] = std::abs(obs.columns[2].back() - analytic.back());
  m["center_error_max"] = err_max;
  m["norm_drift"] = res.norm_drift;
}

void run_two_packet(const ScenarioConfig& c, RunWriter& w, Metrics& m) {
  const auto& pc = c.physics;
  const double d = c.real("separation");
  const double s0 = c.real("sigma0");
  const double t_free = c.real("t_free");
  const double r = c.real("amplitude_ratio");
  const Grid1D grid = c.grid ? c.grid->make() : interference_grid(d, s0, t_free, pc);
  const ComplexField psi0 = two_packet_state(grid, d, s0, c.real("delta_phi"), r);
  const Eigen::Index steps = c.integer("steps");
  const auto res = evolve(psi0, FreeParticle{}, t_free, t_free / double(steps), steps, pc);

  Table t;
  t.add("x", to_vector(grid.positions()));
  t.add("intensity_initial", to_vector(psi0.values.abs2()));
  t.add("intensity_final", to_vector(res.psi_final.values.abs2()));
  w.csv("intensity.csv", "initial and final probability density", t);
  w.svg("intensity.svg", "interference pattern", t, {"probability density", "x", {1, 2}});

  const double k_exact = two_packet_fringe_wavenumber(d, s0, t_free, pc);
  FringeOptions opts;
  opts.center = 0.0;
  const auto fa = fringe_analysis(res.psi_final, 2.0 * kPi / k_exact, opts);
  m["fringe_spacing"] = fa.fringe_spacing;
  m["fringe_spacing_exact"] = 2.0 * kPi / k_exact;
  m["phase_shift"] = fa.phase_shift;
  m["visibility"] = fa.visibility;
  m["visibility_expected"] = 2.0 * r / (1.0 + r * r);
  m["center_intensity"] = fa.center_intensity;
  m["peak_intensity"] = res.psi_final.values.abs2().maxCoeff();
}

void run_phase_scan_interference(const ScenarioConfig& c, RunWriter& w, Metrics& m) {
  const auto& phis = c.list("phis");
  const std::string& app = c.text("application");
  FringeScanOptions opts;
  if (c.grid) opts.grid = c.grid->make();
  opts.steps = c.integer("steps");
  opts.amplitude_ratio = c.real("amplitude_ratio");
  opts.constants = c.physics;
  if (c.has("kick_time")) opts.kick_time = c.real("kick_time");

  Table t;
  t.add("applied", phis);
  auto scan = [&](PhaseApplication a) {
    opts.application = a;
    return phase_to_fringe_scan(c.real("separation"), c.real("sigma0"), c.real("t_free"), phis, opts);
  };
  double vis_min = 1.0;
  std::vector<std::vector<FringeScanPoint>> runs;
  for (const auto& [label, a] : {std::pair{"preparation", PhaseApplication::preparation},
                                 std::pair{"mid_flight", PhaseApplication::mid_flight}}) {
    if (app != "both" && app != label) continue;
    const auto points = scan(a);
    std::vector<double> extracted, vis, spacing;
    for (const auto& p : points) {
      extracted.push_back(p.extracted);
      vis.push_back(p.analysis.visibility);
      spacing.push_back(p.analysis.fringe_spacing);
      vis_min = std::min(vis_min, p.analysis.visibility);
    }
    t.add(std::string("extracted_") + label, extracted);
    t.add(std::string("visibility_") + label, vis);
    t.add(std::string("spacing_") + label, spacing);
    const LineFit fit = fit_line(phis, extracted);
    if (runs.empty()) {
      m["fringe_slope"] = fit.slope;
      m["fringe_offset"] = fit.offset;
    }
    if (a == PhaseApplication::mid_flight && app == "both") {
      m["mid_flight_slope"] = fit.slope;
      m["mid_flight_offset"] = fit.offset;
    }
    runs.push_back(points);
  }
  if (runs.size() == 2) {
    double mismatch = 0.0;
    for (std::size_t i = 0; i < phis.size(); ++i) {
      mismatch = std::max(mismatch, std::abs(runs[0][i].extracted - runs[1][i].extracted));
    }
    m["application_mismatch_max"] = mismatch;
  }
  m["visibility_min"] = vis_min;
  w.csv("scan.csv", "applied phase against extracted fringe phase", t);
  w.svg("scan.svg", "extracted against applied phase", t, {"fringe phase", "applied phase", {1}});
}

PulseSpec make_pulse(const ScenarioConfig& c) {
  PulseSpec p;
  p.rabi_peak = c.real("rabi_peak");
  p.detuning = c.real("detuning");
  const std::string& env = c.text("envelope");
  if (env == "gaussian") {
    p.envelope = GaussianEnvelope{c.real("t_center"), c.real("t_width")};
  } else if (env == "flat_top") {
    p.envelope = FlatTopEnvelope{c.real("t_on"), c.real("t_off")};
  }
  if (c.has("jump_times")) {
    const auto& times = c.list("jump_times");
    const auto& phases = c.list("jump_phases");
    for (std::size_t i = 0; i < times.size(); ++i) p.phase_profile.push_back({times[i], phases[i]});
  }
  return p;
}

void run_rabi_pulse(const ScenarioConfig& c, RunWriter& w, Metrics& m) {
  const PulseSpec pulse = make_pulse(c);
  const auto states = propagate(TwoLevelState{}, pulse, c.real("t_final"), c.real("dt"));

  Table t;
  const char* names[] = {"t",     "P_g",   "P_e",          "norm",          "rabi",  "phase",
                         "theta", "dressed_plus", "dressed_minus", "e_plus", "e_minus"};
  std::vector<std::vector<double>> cols(std::size(names));
  double drift = 0.0;
  double pe_lo = 1.0, pe_hi = 0.0, ap_lo = 1.0, ap_hi = 0.0, am_lo = 1.0, am_hi = 0.0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto& s = states[i];
    const auto dd = dressed_decompose(s, pulse, c.physics);
    const double pe = s.excited_population();
    const double ap = std::norm(dd.a_plus);
    const double am = std::norm(dd.a_minus);
    drift = std::max(drift, std::abs(s.norm() - 1.0));
    pe_lo = std::min(pe_lo, pe), pe_hi = std::max(pe_hi, pe);
    ap_lo = std::min(ap_lo, ap), ap_hi = std::max(ap_hi, ap);
    am_lo = std::min(am_lo, am), am_hi = std::max(am_hi, am);
    if (i % std::size_t(c.snapshot_every) != 0 && i + 1 != states.size()) continue;
    const double row[] = {s.t,      s.ground_population(), pe, s.norm(), pulse.rabi(s.t), pulse.phase(s.t),
                          dd.theta, ap,                    am, dd.e_plus, dd.e_minus};
    for (std::size_t j = 0; j < cols.size(); ++j) cols[j].push_back(row[j]);
  }
  for (std::size_t j = 0; j < cols.size(); ++j) t.add(names[j], cols[j]);
  w.csv("populations.csv", "bare and dressed populations, drive and quasi-energies", t);
  w.svg("populations.svg", "bare and dressed populations", t, {"population", "t", {1, 2, 7, 8}});

  m["P_e_final"] = states.back().excited_population();
  m["P_g_final"] = states.back().ground_population();
  m["max_norm_drift"] = drift;
  m["bare_excited_change"] = pe_hi - pe_lo;
  m["dressed_plus_change"] = ap_hi - ap_lo;
  m["dressed_minus_change"] = am_hi - am_lo;
}

void run_phase_jump_scan(const ScenarioConfig& c, RunWriter& w, Metrics& m) {
  const PulseSpec base = make_pulse(c);
  const double tj = c.real("jump_time");
  const double t_final = c.real("t_final");
  const double dt = c.real("dt");
  const double offset = c.real("global_offset");
  const auto& values = c.list("jump_values");
  const auto scan = phase_scan(base, tj, values, t_final, dt);

  Table t;
  std::vector<double> phases, pe, pe_offset;
  double lo = 1.0, hi = 0.0, offset_change = 0.0;
  for (const auto& [phi, p] : scan) {
    phases.push_back(phi);
    pe.push_back(p);
    lo = std::min(lo, p);
    hi = std::max(hi, p);
    // The same profile with a constant added at all times.
    PulseSpec shifted = base;
    shifted.phase_profile.clear();
    if (tj > 0) shifted.phase_profile.push_back({0.0, offset});
    shifted.phase_profile.push_back({tj, phi + offset});
    const double q = propagate(TwoLevelState{}, shifted, t_final, dt).back().excited_population();
    pe_offset.push_back(q);
    offset_change = std::max(offset_change, std::abs(q - p));
  }
  t.add("jump_phase", phases);
  t.add("P_e", pe);
  t.add("P_e_with_global_offset", pe_offset);
  w.csv("scan.csv", "final excited population against jump phase", t);
  w.svg("scan.svg", "excited population against jump phase", t, {"P_e", "jump phase", {1, 2}});

  m["P_e_range"] = hi - lo;
  m["P_e_min"] = lo;
  m["P_e_max"] = hi;
  m["global_offset_change"] = offset_change;
}

void run_madelung_direct(const ScenarioConfig& c, RunWriter& w, Metrics& m) {
  const Grid1D grid = c.grid->make();
  const auto& pc = c.physics;
  const double eps = c.real("epsilon");
  const double t_final = c.real("t_final");
  const ComplexField psi0 = make_gaussian(grid, c.real("x0"), c.real("sigma0"), c.real("k0"));
  const auto oracle = evolve(psi0, FreeParticle{}, t_final, c.real("oracle_dt"), c.snapshot_every, pc);
  const auto oracle_fields = polar_decompose(oracle.snapshots, pc, eps);
  const HydroFields& start = oracle_fields.front();
  const HydroFields& target = oracle_fields.back();

  const ValidMask mask = make_valid_mask(start.R, eps);
  MadelungDiagnostics diag;
  const double dt = c.has("dt") ? c.real("dt") : madelung_max_dt(grid, pc);
  const HydroFields direct = madelung_evolve(start, FreeParticle{}, t_final, dt, mask, pc, &diag);

  const ValidMask final_mask = make_valid_mask(target.R, eps);
  Table t;
  t.add("x", to_vector(grid.positions()));
  t.add("R_direct", to_vector(direct.R));
  t.add("R_oracle", to_vector(target.R));
  t.add("S_direct", to_vector(direct.S));
  t.add("S_oracle", to_vector(target.S));
  t.add("mask", to_vector(final_mask.mask.cast<double>()));
  w.csv("fields_final.csv", "directly integrated and oracle-extracted R, S at t_final", t);
  w.svg("fields.svg", "direct against oracle fields", t, {"R and S", "x", {1, 2, 3, 4}});

  m["max_dR"] = max_on_mask(direct.R - target.R, final_mask.mask);
  m["max_dS"] = max_on_mask(direct.S - target.S, final_mask.mask);
  m["madelung_steps"] = double(diag.steps);
  m["clamp_events"] = double(diag.clamp_events);
  m["min_R_ratio"] = start.R.minCoeff() / start.R.maxCoeff();
}

void run_trajectory_ensemble(const ScenarioConfig& c, RunWriter& w, Metrics& m) {
  const Grid1D grid = c.grid->make();
  const auto& pc = c.physics;
  const double x0 = c.real("x0");
  const double s0 = c.real("sigma0");
  const double k0 = c.real("k0");
  const auto res = evolve(make_gaussian(grid, x0, s0, k0), FreeParticle{}, c.real("t_final"), c.real("dt"),
                          c.snapshot_every, pc);
  w.csv("observables.csv", "time series of norm, mean position and width", observables_table(res, true));

  const auto fields = polar_decompose(res.snapshots, pc, c.real("epsilon"));
  TrajectoryOptions opts;
  opts.substeps = int(c.integer("substeps"));
  opts.epsilon = c.real("epsilon");

  const auto& starts = c.list("x_starts");
  Table tr, ac;
  tr.add("t", res.times);
  ac.add("t", res.times);
  std::vector<Trajectory> trajectories;
  double pos_err = 0.0, act_err = 0.0;
  for (std::size_t k = 0; k < starts.size(); ++k) {
    trajectories.push_back(integrate_trajectory(fields, res.times, starts[k], FreeParticle{}, pc, opts));
    const auto& tj = trajectories.back();
    for (std::size_t i = 0; i < tj.times.size(); ++i) {
      const double t = tj.times[i];
      const double exact = x0 + pc.hbar * k0 * t / pc.mass + (starts[k] - x0) * spread_width(s0, t, pc) / s0;
      pos_err = std::max(pos_err, std::abs(tj.positions[i] - exact));
      act_err = std::max(act_err, std::abs(tj.action_sampled[i] - tj.action_integrated[i]));
    }
    const std::string id = std::to_string(k);
    tr.add("x_" + id, tj.positions);
    ac.add("S_sampled_" + id, tj.action_sampled);
    ac.add("S_integrated_" + id, tj.action_integrated);
  }
  for (std::size_t k = 0; k < starts.size(); ++k) tr.add("v_" + std::to_string(k), trajectories[k].velocities);
  w.csv("trajectories.csv", "positions and velocities of each trajectory", tr);
  w.csv("action.csv", "sampled and integrated action along each trajectory", ac);
  std::vector<std::size_t> series;
  for (std::size_t k = 0; k < starts.size(); ++k) series.push_back(k + 1);
  w.svg("trajectories.svg", "trajectories", tr, {"x(t)", "t", series});

  // Ordering of start points must survive at every sampled time.
  std::vector<std::size_t> order(starts.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return starts[a] < starts[b]; });
  bool ordered = true;
  for (std::size_t i = 0; i < res.times.size() && ordered; ++i) {
    for (std::size_t k = 1; k < order.size(); ++k) {
      if (starts[order[k]] > starts[order[k - 1]] &&
          !(trajectories[order[k]].positions[i] > trajectories[order[k - 1]].positions[i])) {
        ordered = false;
      }
    }
  }
  m["max_position_error"] = pos_err;
  m["max_action_mismatch"] = act_err;
  m["ordering_preserved"] = ordered ? 1.0 : 0.0;
}

}  // namespace

RunResult execute_scenario(const ScenarioConfig& config, const std::filesystem::path& directory) {
  RunWriter writer(directory, config.emit_svg);
  Metrics metrics;
  const std::string& k = config.kind;
  if (k == "free_gaussian") {
    run_free_gaussian(config, writer, metrics);
  } else if (k == "harmonic_stationary") {
    run_harmonic_stationary(config, writer, metrics);
  } else if (k == "coherent_state") {
    run_coherent_state(config, writer, metrics);
  } else if (k == "two_packet_interference") {
    run_two_packet(config, writer, metrics);
  } else if (k == "phase_scan_interference") {
    run_phase_scan_interference(config, writer, metrics);
  } else if (k == "rabi_pulse") {
    run_rabi_pulse(config, writer, metrics);
  } else if (k == "phase_jump_scan") {
    run_phase_jump_scan(config, writer, metrics);
  } else if (k == "madelung_direct") {
    run_madelung_direct(config, writer, metrics);
  } else if (k == "trajectory_ensemble") {
    run_trajectory_ensemble(config, writer, metrics);
  } else {
    throw Error(ErrorKind::parameter, "unknown scenario kind " + k);
  }
  return {directory, writer.outputs(), metrics};
}

std::filesystem::path resolve_out_root(const std::optional<std::filesystem::path>& explicit_root) {
  if (explicit_root) return *explicit_root;
  if (const char* env = std::getenv("PHASELAB_OUT_DIR"); env && *env) return env;
  return "runs";
}

RunFailure::RunFailure(std::filesystem::path directory, ErrorKind kind, const std::string& what)
    : std::runtime_error(what), directory_(std::move(directory)), kind_(kind) {}

RunResult run_scenario(const ScenarioConfig& config, const std::filesystem::path& out_root) {
  const auto dir = detail::create_run_directory(out_root, config.name);
  const std::string started = detail::utc_timestamp();
  RunResult result;
  try {
    result = execute_scenario(config, dir);
  } catch (const Error& e) {
    throw RunFailure(dir, e.kind(), e.what());
  }
  detail::write_manifest(dir, config, started, detail::utc_timestamp(), result.outputs, result.headline);
  return result;
}

}  // namespace phaselab
