#pragma once

// Split-step Fourier propagation of the 1-D time-dependent Schrodinger
// equation. This is the ground truth the hydrodynamic side is checked against.

#include <variant>
#include <vector>

#include "phaselab/fields.hpp"

namespace phaselab {

struct FreeParticle {};

struct Harmonic {
  double omega = 1.0;
  double center = 0.0;
};

/// Rectangular barrier of the given height on |x - center| <= width/2.
struct Barrier {
  double height = 0.0;
  double width = 1.0;
  double center = 0.0;
};

/// Instantaneous material-phase kick: psi -> exp(i delta_phi) psi on
/// [region_lo, region_hi]. It acts during a single step, as the impulse limit
/// of a potential pulse with V*tau = -hbar*delta_phi; otherwise free.
struct PhaseKick {
  double delta_phi = 0.0;
  double region_lo = 0.0;
  double region_hi = 0.0;
};

using Potential = std::variant<FreeParticle, Harmonic, Barrier, PhaseKick>;

void validate(const Potential& V, const Grid1D& grid);

/// Static part of the potential sampled on the grid (zero for a phase kick).
RealArrayXd potential_values(const Potential& V, const Grid1D& grid, const PhysicalConstants& c = {});

ComplexField apply_phase_kick(const ComplexField& psi, const PhaseKick& kick);

/// Kinetic phase dt*hbar*k_max^2/(2m) at the Nyquist wavenumber; values >= pi
/// alias the highest modes.
double kinetic_phase_at_nyquist(const Grid1D& grid, double dt, const PhysicalConstants& c = {});

/// Strang-split propagator exp(-iV dt/2h) exp(-iT dt/h) exp(-iV dt/2h) with the
/// phase factors precomputed for one (grid, potential, dt) triple. A negative
/// dt runs the same scheme backwards in time.
class SplitStepPropagator {
 public:
  SplitStepPropagator(const Grid1D& grid, const Potential& V, double dt, const PhysicalConstants& c = {});

  /// One step. The phase kick, if any, is applied only when `kick` is true.
  void step(ComplexArrayXd& psi, bool kick = true);

 private:
  Spectral spectral_;
  ComplexArrayXd half_potential_;
  ComplexArrayXd half_potential_kicked_;
  ComplexArrayXd kinetic_;
};

ComplexField split_step(const ComplexField& psi, const Potential& V, double dt, const PhysicalConstants& c = {});

/// The same step with dt -> -dt; used for time-reversal checks.
ComplexField split_step_backward(const ComplexField& psi, const Potential& V, double dt,
                                 const PhysicalConstants& c = {});

struct PropagationResult {
  ComplexField psi_final;
  std::vector<ComplexField> snapshots;
  std::vector<double> times;
  double norm_drift = 0.0;
  double max_step_norm_change = 0.0;
  Eigen::Index snapshot_stride = 1;
  bool kinetic_phase_warning = false;
};

struct EvolveOptions {
  std::size_t snapshot_cap = 256;
};

/// Repeated split_step from t = 0 to t_final. Snapshots are taken every
/// `snapshot_every` steps and always include t = 0 and t_final; when the count
/// would exceed the cap the stride is widened. A PhaseKick potential kicks
/// during the first step only.
PropagationResult evolve(const ComplexField& psi0, const Potential& V, double t_final, double dt,
                         Eigen::Index snapshot_every, const PhysicalConstants& c = {},
                         const EvolveOptions& options = {});

double expectation_position(const ComplexField& psi);
double position_variance(const ComplexField& psi);
double expectation_energy(const ComplexField& psi, const Potential& V, const PhysicalConstants& c = {});

}  // namespace phaselab
