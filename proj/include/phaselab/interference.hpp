#pragma once

// Two-packet matter-wave interference: preparation, fringe extraction and
// the applied-phase -> fringe-phase scan.

#include <optional>
#include <vector>

#include "phaselab/fields.hpp"
#include "phaselab/schrodinger.hpp"

namespace phaselab {

/// (psi_L + r e^{i delta_phi} psi_R) / norm with Gaussians of width sigma0 at
/// -separation/2 and +separation/2; r is the right/left amplitude ratio.
ComplexField two_packet_state(const Grid1D& grid, double separation, double sigma0, double delta_phi,
                              double amplitude_ratio = 1.0);

struct FringeAnalysis {
  double fringe_spacing = 0.0;
  double phase_shift = 0.0;  // in (-pi, pi]; > 0 means fringes displaced towards +x
  double visibility = 0.0;
  double center_intensity = 0.0;
  double center = 0.0;  // reference point the phase is measured at
};

struct FringeOptions {
  /// Reference point; defaults to the centroid of the band-passed fringe term.
  std::optional<double> center;
  /// Half-width of the fit window in fringe spacings.
  double window_fringes = 1.5;
};

/// k is the spectral peak of |psi|^2 nearest 2*pi/hint, refined below bin
/// resolution. With k fixed, |psi|^2 near the center is least-squares fitted
/// to P0(x) + P1(x) cos(kx') + P2(x) sin(kx'), x' = x - center, quadratic
/// envelopes P0..P2. At the center this reads envelope * (1 + V cos(kx' - phase_shift)).
FringeAnalysis fringe_analysis(const ComplexField& psi, double expected_spacing_hint,
                               const FringeOptions& options = {});

/// Exact fringe wavenumber of two freely spreading Gaussians (no far-field
/// approximation): k = (d/2) tau / (sigma0^2 (1 + tau^2)), tau = hbar t / (2 m sigma0^2).
double two_packet_fringe_wavenumber(double separation, double sigma0, double t, const PhysicalConstants& c = {});

enum class PhaseApplication { preparation, mid_flight };

struct FringeScanOptions {
  PhaseApplication application = PhaseApplication::preparation;
  std::optional<Grid1D> grid;          // default: sized from the geometry
  std::optional<double> kick_time;     // default: latest time the packets stay 5 sigma apart
  Eigen::Index steps = 200;
  double amplitude_ratio = 1.0;
  PhysicalConstants constants{};
};

struct FringeScanPoint {
  double applied = 0.0;
  double extracted = 0.0;  // unwrapped against `applied`
  FringeAnalysis analysis;
};

/// Default grid: packets stay 6 sigma(t_free) inside and the initial packets
/// are resolved with margin.
Grid1D interference_grid(double separation, double sigma0, double t_free, const PhysicalConstants& c = {});

/// Latest time at which each packet is still 5 sigma(t) from the midpoint.
double latest_separated_time(double separation, double sigma0, const PhysicalConstants& c = {});

std::vector<FringeScanPoint> phase_to_fringe_scan(double separation, double sigma0, double t_free,
                                                  const std::vector<double>& phis,
                                                  const FringeScanOptions& options = {});

struct LineFit {
  double slope = 0.0;
  double offset = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace phaselab
