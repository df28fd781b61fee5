#pragma once

// Driven two-level system in the rotating-wave approximation and its
// instantaneous (dressed) eigenbasis. State ordering is (ground, excited).

#include <complex>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "phaselab/fields.hpp"

namespace phaselab {

struct ConstantEnvelope {};

struct GaussianEnvelope {
  double t_center = 0.0;
  double t_width = 1.0;
};

/// Rectangular gate: full amplitude on [t_on, t_off], zero outside.
struct FlatTopEnvelope {
  double t_on = 0.0;
  double t_off = 1.0;
};

using Envelope = std::variant<ConstantEnvelope, GaussianEnvelope, FlatTopEnvelope>;

struct PhaseJump {
  double time = 0.0;
  double phase = 0.0;
};

/// Drive field with Rabi envelope Omega(t) = rabi_peak * envelope(t), detuning
/// (drive minus transition frequency) and a piecewise-constant optical phase
/// that is 0 before the first jump.
struct PulseSpec {
  double rabi_peak = 0.0;
  Envelope envelope = ConstantEnvelope{};
  double detuning = 0.0;
  std::vector<PhaseJump> phase_profile;

  void validate() const;
  double rabi(double t) const;
  double phase(double t) const;
  /// Times at which the drive is discontinuous.
  std::vector<double> breakpoints() const;
};

struct TwoLevelState {
  std::complex<double> c_g{1.0, 0.0};
  std::complex<double> c_e{0.0, 0.0};
  double t = 0.0;

  double excited_population() const { return std::norm(c_e); }
  double ground_population() const { return std::norm(c_g); }
  double norm() const { return std::norm(c_g) + std::norm(c_e); }
};

/// H(t) = hbar [[0, Omega e^{-i phi}/2], [Omega e^{+i phi}/2, -Delta]].
Eigen::Matrix2cd rwa_hamiltonian(const PulseSpec& pulse, double t, const PhysicalConstants& c = {});

struct PropagateOptions {
  /// Largest tolerated norm drift before the run is rejected.
  double max_norm_drift = 1e-6;
};

/// Classical RK4 for i hbar dc/dt = H(t) c with steps split at every
/// discontinuity of the drive. One state is recorded per step, including the
/// initial one.
std::vector<TwoLevelState> propagate(const TwoLevelState& state0, const PulseSpec& pulse, double t_final, double dt,
                                     const PropagateOptions& options = {});

struct DressedDecomposition {
  double theta = 0.0;   // mixing angle, tan(2 theta) = Omega / Delta
  double e_plus = 0.0;  // hbar (-Delta + Omega_gen) / 2
  double e_minus = 0.0;
  std::complex<double> a_plus;
  std::complex<double> a_minus;
  bool degenerate = false;  // Omega = Delta = 0: bare basis returned

  double generalized_rabi(const PhysicalConstants& c = {}) const { return (e_plus - e_minus) / c.hbar; }
};

/// Projects the state onto the instantaneous eigenvectors of the RWA
/// Hamiltonian at state.t. The dressed vectors carry the drive phase:
///   |+> =  cos(theta) |g> + sin(theta) e^{i phi} |e>
///   |-> = -sin(theta) e^{-i phi} |g> + cos(theta) |e>
DressedDecomposition dressed_decompose(const TwoLevelState& state, const PulseSpec& pulse,
                                       const PhysicalConstants& c = {});

/// Final excited population for each value of a single phase jump applied to
/// the template at jump_time (replacing its phase profile).
std::vector<std::pair<double, double>> phase_scan(const PulseSpec& pulse_template, double jump_time,
                                                  const std::vector<double>& jump_values, double t_final, double dt);

}  // namespace phaselab
