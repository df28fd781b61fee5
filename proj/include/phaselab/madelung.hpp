#pragma once

// Hydrodynamic (Madelung) form of the Schrodinger equation, psi = R exp(iS/hbar):
//
//   dS/dt + (dS/dx)^2 / 2m + V + Q = 0,       Q = -(hbar^2 / 2m) R''/R
//   d(R^2)/dt + d/dx (R^2 (dS/dx) / m) = 0
//
// Spatial derivatives of S are always taken through the reconstructed
// wavefunction, never by transforming S itself, because S is in general not
// periodic on the grid while psi is.

#include <vector>

#include "phaselab/fields.hpp"
#include "phaselab/schrodinger.hpp"

namespace phaselab {

using MaskArray = Eigen::Array<bool, Eigen::Dynamic, 1>;

/// Points where R > epsilon * max(R). Everything singular in R''/R is only
/// evaluated on the mask.
struct ValidMask {
  double epsilon = 1e-3;
  MaskArray mask;

  Eigen::Index count() const { return mask.count(); }
};

ValidMask make_valid_mask(const RealArrayXd& R, double epsilon = 1e-3);

HydroFields polar_decompose(const ComplexField& psi, const PhysicalConstants& c = {}, double epsilon = 1e-3);

/// R = |psi| and S = hbar arg(psi), unwrapped left to right over the valid mask
/// and continued in time: each snapshot's 2*pi*hbar branch minimizes the max
/// jump against its predecessor on the common mask. Off-mask points carry the
/// locally unwrapped phase so that reconstruction is exact everywhere.
std::vector<HydroFields> polar_decompose(const std::vector<ComplexField>& snapshots, const PhysicalConstants& c = {},
                                         double epsilon = 1e-3);

ComplexField reconstruct_psi(const HydroFields& fields, const PhysicalConstants& c = {});

/// Q = -(hbar^2/2m) R''/R on the mask, 0 elsewhere.
RealArrayXd quantum_potential(const HydroFields& fields, const ValidMask& mask, const PhysicalConstants& c = {});

/// Flow velocity v = S'/m (zero where R vanishes identically).
RealArrayXd bohm_velocity(const HydroFields& fields, const PhysicalConstants& c = {});

/// Probability current j = R^2 S'/m.
RealArrayXd probability_current(const HydroFields& fields, const PhysicalConstants& c = {});

struct QhjResiduals {
  std::vector<double> times;      // interior snapshot times
  Eigen::ArrayXXd hj_residual;    // rows: interior times, cols: grid points (0 off mask)
  Eigen::ArrayXXd continuity_residual;
  std::vector<MaskArray> masks;
  double hj_max = 0.0;
  double continuity_max = 0.0;
};

/// Residuals of both hydrodynamic equations at interior snapshots, with d/dt
/// from second-order central differences. A point counts only when it is on
/// the epsilon-mask of all three snapshots involved.
QhjResiduals qhj_residuals(const std::vector<HydroFields>& fields_t, const std::vector<double>& times,
                           const Potential& V, double epsilon = 1e-3, const PhysicalConstants& c = {});

struct MadelungDiagnostics {
  long steps = 0;
  long clamp_events = 0;
};

/// Largest dt accepted by madelung_step: 0.2 dx^2 m / hbar.
double madelung_max_dt(const Grid1D& grid, const PhysicalConstants& c = {});

/// One classical RK4 step of (R^2, S) with spectral derivatives. Only
/// node-free states are accepted (min(R)/max(R) > mask.epsilon on the whole
/// periodic grid); for those R and S are smooth periodic functions, up to an
/// integer phase winding that is handled explicitly.
HydroFields madelung_step(const HydroFields& fields, const Potential& V, double dt, const ValidMask& mask,
                          const PhysicalConstants& c = {}, MadelungDiagnostics* diagnostics = nullptr);

/// Repeated madelung_step to t_final with dt adjusted down to divide it evenly.
HydroFields madelung_evolve(const HydroFields& fields, const Potential& V, double t_final, double dt_max,
                            const ValidMask& mask, const PhysicalConstants& c = {},
                            MadelungDiagnostics* diagnostics = nullptr);

struct Trajectory {
  std::vector<double> times;
  std::vector<double> positions;
  std::vector<double> velocities;
  std::vector<double> action_sampled;     // S(x(t), t) read off the fields
  std::vector<double> action_integrated;  // S(x0, 0) + integral of (m v^2/2 - V - Q) dt
};

struct TrajectoryOptions {
  int substeps = 4;        // RK4 steps per snapshot interval
  double epsilon = 1e-3;   // mask for the quantum potential
};

/// Integrates dx/dt = v(x, t) through the snapshot velocity fields (linear in
/// t, cubic in x) and accumulates the action two independent ways.
Trajectory integrate_trajectory(const std::vector<HydroFields>& fields_t, const std::vector<double>& times,
                                double x_start, const Potential& V = FreeParticle{}, const PhysicalConstants& c = {},
                                const TrajectoryOptions& options = {});

/// Four-point cubic Lagrange interpolation of grid samples at x.
double interpolate_cubic(const RealArrayXd& samples, const Grid1D& grid, double x);

}  // namespace phaselab
