#include "phaselab/two_level.hpp"

#include <algorithm>
#include <cmath>

namespace phaselab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

// Envelope value; `gate_probe` decides the piecewise-constant flat-top gate so
// that a whole step sees one side of an edge.
double envelope_value(const Envelope& env, double t, double gate_probe) {
  return std::visit(overloaded{
                        [](const ConstantEnvelope&) { return 1.0; },
                        [&](const GaussianEnvelope& g) {
                          const double u = (t - g.t_center) / g.t_width;
                          return std::exp(-0.5 * u * u);
                        },
                        [&](const FlatTopEnvelope& f) {
                          return (gate_probe >= f.t_on && gate_probe <= f.t_off) ? 1.0 : 0.0;
                        },
                    },
                    env);
}

double phase_value(const std::vector<PhaseJump>& profile, double t) {
  double phi = 0.0;
  for (const auto& jump : profile) {
    if (jump.time <= t) phi = jump.phase;
  }
  return phi;
}

// H/hbar at time t inside a step whose piecewise-constant parts are read at probe.
Eigen::Matrix2cd angular_hamiltonian(const PulseSpec& pulse, double t, double probe) {
  const double omega = pulse.rabi_peak * envelope_value(pulse.envelope, t, probe);
  const std::complex<double> coupling = 0.5 * omega * std::polar(1.0, phase_value(pulse.phase_profile, probe));
  Eigen::Matrix2cd h;
  h << 0.0, std::conj(coupling), coupling, -pulse.detuning;
  return h;
}

}  // namespace

void PulseSpec::validate() const {
  if (!(rabi_peak >= 0) || !std::isfinite(rabi_peak)) throw Error(ErrorKind::parameter, "rabi_peak must be >= 0");
  if (!std::isfinite(detuning)) throw Error(ErrorKind::parameter, "detuning must be finite");
  if (const auto* g = std::get_if<GaussianEnvelope>(&envelope); g && !(g->t_width > 0)) {
    throw Error(ErrorKind::parameter, "gaussian envelope width must be positive");
  }
  if (const auto* f = std::get_if<FlatTopEnvelope>(&envelope); f && !(f->t_off > f->t_on)) {
    throw Error(ErrorKind::parameter, "flat-top envelope needs t_off > t_on");
  }
  for (std::size_t i = 1; i < phase_profile.size(); ++i) {
    if (!(phase_profile[i].time > phase_profile[i - 1].time)) {
      throw Error(ErrorKind::parameter, "phase jump times must be strictly increasing");
    }
  }
}

double PulseSpec::rabi(double t) const { return rabi_peak * envelope_value(envelope, t, t); }

double PulseSpec::phase(double t) const { return phase_value(phase_profile, t); }

std::vector<double> PulseSpec::breakpoints() const {
  std::vector<double> out;
  for (const auto& jump : phase_profile) out.push_back(jump.time);
  if (const auto* f = std::get_if<FlatTopEnvelope>(&envelope)) {
    out.push_back(f->t_on);
    out.push_back(f->t_off);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Eigen::Matrix2cd rwa_hamiltonian(const PulseSpec& pulse, double t, const PhysicalConstants& c) {
  pulse.validate();
  return c.hbar * angular_hamiltonian(pulse, t, t);
}

std::vector<TwoLevelState> propagate(const TwoLevelState& state0, const PulseSpec& pulse, double t_final, double dt,
                                     const PropagateOptions& options) {
  pulse.validate();
  if (!(dt > 0)) throw Error(ErrorKind::parameter, "dt must be positive");
  if (!(t_final > state0.t)) throw Error(ErrorKind::parameter, "t_final must lie after the initial time");
  if (std::abs(state0.norm() - 1.0) > 1e-10) throw Error(ErrorKind::parameter, "initial state is not normalized");
  const double max_gap = std::hypot(pulse.detuning, pulse.rabi_peak);
  if (dt * max_gap >= 0.1) {
    throw Error(ErrorKind::parameter, "dt times the largest quasi-energy gap must stay below 0.1");
  }

  // Segment edges: start, every discontinuity strictly inside, end.
  std::vector<double> edges{state0.t};
  for (double b : pulse.breakpoints()) {
    if (b > state0.t && b < t_final) edges.push_back(b);
  }
  edges.push_back(t_final);

  std::vector<TwoLevelState> states{state0};
  Eigen::Vector2cd c(state0.c_g, state0.c_e);
  const std::complex<double> minus_i(0.0, -1.0);
  for (std::size_t s = 0; s + 1 < edges.size(); ++s) {
    const double span = edges[s + 1] - edges[s];
    const auto steps = std::max<long>(1, static_cast<long>(std::ceil(span / dt - 1e-9)));
    const double h = span / double(steps);
    for (long n = 0; n < steps; ++n) {
      const double t = edges[s] + double(n) * h;
      const double probe = t + 0.5 * h;
      const auto rate = [&](double tt, const Eigen::Vector2cd& v) -> Eigen::Vector2cd {
        return minus_i * (angular_hamiltonian(pulse, tt, probe) * v);
      };
      const Eigen::Vector2cd k1 = rate(t, c);
      const Eigen::Vector2cd k2 = rate(t + 0.5 * h, c + 0.5 * h * k1);
      const Eigen::Vector2cd k3 = rate(t + 0.5 * h, c + 0.5 * h * k2);
      const Eigen::Vector2cd k4 = rate(t + h, c + h * k3);
      c += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      const double t_next = (n + 1 == steps) ? edges[s + 1] : t + h;
      TwoLevelState next{c(0), c(1), t_next};
      if (!std::isfinite(next.norm()) || std::abs(next.norm() - 1.0) > options.max_norm_drift) {
        throw Error(ErrorKind::instability, "two-level norm drifted beyond tolerance");
      }
      states.push_back(next);
    }
  }
  return states;
}

DressedDecomposition dressed_decompose(const TwoLevelState& state, const PulseSpec& pulse,
                                       const PhysicalConstants& c) {
  pulse.validate();
  const double omega = pulse.rabi(state.t);
  const double delta = pulse.detuning;
  const double phi = pulse.phase(state.t);
  const double gen = std::hypot(delta, omega);

  DressedDecomposition d;
  d.e_plus = c.hbar * 0.5 * (-delta + gen);
  d.e_minus = c.hbar * 0.5 * (-delta - gen);
  if (gen == 0.0) {
    d.degenerate = true;
    d.theta = 0.0;
    d.a_plus = state.c_g;
    d.a_minus = state.c_e;
    return d;
  }
  d.theta = 0.5 * std::atan2(omega, delta);
  const double ct = std::cos(d.theta);
  const double st = std::sin(d.theta);
  const std::complex<double> e_phi = std::polar(1.0, phi);
  // a = <dressed|state>
  d.a_plus = ct * state.c_g + st * std::conj(e_phi) * state.c_e;
  d.a_minus = -st * e_phi * state.c_g + ct * state.c_e;
  return d;
}

std::vector<std::pair<double, double>> phase_scan(const PulseSpec& pulse_template, double jump_time,
                                                  const std::vector<double>& jump_values, double t_final,
                                                  double dt) {
  if (jump_values.empty()) throw Error(ErrorKind::parameter, "phase scan needs at least one jump value");
  std::vector<std::pair<double, double>> out;
  out.reserve(jump_values.size());
  for (double value : jump_values) {
    PulseSpec pulse = pulse_template;
    std::erase_if(pulse.phase_profile, [&](const PhaseJump& j) { return j.time >= jump_time; });
    pulse.phase_profile.push_back({jump_time, value});
    const auto states = propagate(TwoLevelState{}, pulse, t_final, dt);
    out.emplace_back(value, states.back().excited_population());
  }
  return out;
}

}  // namespace phaselab
