#include "phaselab/interference.hpp"

#include <cmath>
#include <numbers>

namespace phaselab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_to_pi(double a) {
  double w = std::remainder(a, kTwoPi);
  if (w <= -kPi) w += kTwoPi;
  return w;
}

double spreading_tau(double sigma0, double t, const PhysicalConstants& c) {
  return c.hbar * t / (2.0 * c.mass * sigma0 * sigma0);
}

struct LocalFit {
  double residual = 0.0;
  Eigen::VectorXd coeffs;  // P0, P1, P2 envelopes in powers of the scaled offset
};

// Linear least squares of the windowed intensity for a fixed wavenumber.
constexpr int kEnvelopeDegree = 2;
LocalFit fit_at(const RealArrayXd& x, const RealArrayXd& intensity, double center, double half_width, double k) {
  const RealArrayXd u = (x - center) / half_width;
  const RealArrayXd phase = k * (x - center);
  const int np = kEnvelopeDegree + 1;
  Eigen::MatrixXd basis(x.size(), 3 * np);
  for (int p = 0; p < np; ++p) {
    const RealArrayXd up = u.pow(double(p));
    basis.col(p) = up.matrix();
    basis.col(np + p) = (up * phase.cos()).matrix();
    basis.col(2 * np + p) = (up * phase.sin()).matrix();
  }
  LocalFit fit;
  fit.coeffs = basis.colPivHouseholderQr().solve(intensity.matrix());
  fit.residual = (basis * fit.coeffs - intensity.matrix()).squaredNorm();
  return fit;
}

}  // namespace

ComplexField two_packet_state(const Grid1D& grid, double separation, double sigma0, double delta_phi,
                              double amplitude_ratio) {
  if (!(sigma0 > 0)) throw Error(ErrorKind::parameter, "sigma0 must be positive");
  if (!(amplitude_ratio > 0)) throw Error(ErrorKind::parameter, "amplitude ratio must be positive");
  if (separation < 6.0 * sigma0) {
    throw Error(ErrorKind::preparation, "packets overlap initially: separation must be at least 6 sigma0");
  }
  const double half = 0.5 * separation;
  if (-half - 5.0 * sigma0 < grid.x_min() || half + 5.0 * sigma0 > grid.x_max()) {
    throw Error(ErrorKind::preparation, "packets must sit at least 5 sigma0 inside the grid");
  }
  const ComplexField left = make_gaussian(grid, -half, sigma0, 0.0);
  const ComplexField right = make_gaussian(grid, half, sigma0, 0.0);
  ComplexField psi(grid, left.values + amplitude_ratio * std::polar(1.0, delta_phi) * right.values);
  psi.values /= std::sqrt(norm_squared(psi));
  return psi;
}

double two_packet_fringe_wavenumber(double separation, double sigma0, double t, const PhysicalConstants& c) {
  const double tau = spreading_tau(sigma0, t, c);
  return 0.5 * separation * tau / (sigma0 * sigma0 * (1.0 + tau * tau));
}

FringeAnalysis fringe_analysis(const ComplexField& psi, double expected_spacing_hint, const FringeOptions& options) {
  if (!(expected_spacing_hint > 0)) throw Error(ErrorKind::parameter, "spacing hint must be positive");
  const Grid1D& grid = psi.grid;
  const RealArrayXd x = grid.positions();
  const RealArrayXd intensity = psi.values.abs2();
  const double total = intensity.sum();
  if (!(total > 0)) throw Error(ErrorKind::degenerate_state, "cannot analyse a zero field");

  // Seed: spectral peak of the intensity nearest the hinted wavenumber.
  Spectral spectral(grid);
  const ComplexArrayXd spectrum = spectral.forward(intensity.cast<std::complex<double>>());
  const RealArrayXd magnitude = spectrum.abs();
  const RealArrayXd& k = spectral.wavenumbers();
  const double floor = 1e-6 * magnitude(0);
  const double k_hint = kTwoPi / expected_spacing_hint;
  // A candidate is a local maximum standing 3x above the lower of the two
  // valleys that flank it.
  const Eigen::Index half = grid.size() / 2;
  std::vector<Eigen::Index> peaks;
  for (Eigen::Index i = 1; i + 1 < half; ++i) {
    if (magnitude(i) > magnitude(i - 1) && magnitude(i) >= magnitude(i + 1) && magnitude(i) >= floor) {
      peaks.push_back(i);
    }
  }
  Eigen::Index i_seed = -1;
  for (std::size_t p = 0; p < peaks.size(); ++p) {
    const Eigen::Index i = peaks[p];
    const Eigen::Index lo = p == 0 ? 0 : peaks[p - 1];
    const Eigen::Index hi = p + 1 == peaks.size() ? half : peaks[p + 1];
    const double left = magnitude.segment(lo, i - lo + 1).minCoeff();
    const double right = magnitude.segment(i, hi - i).minCoeff();
    if (magnitude(i) < 3.0 * std::min(left, right)) continue;
    if (i_seed < 0 || std::abs(k(i) - k_hint) < std::abs(k(i_seed) - k_hint)) i_seed = i;
  }
  if (i_seed < 0) throw Error(ErrorKind::no_fringe, "no spectral peak at least 3x above its background");

  // Sub-bin peak position from a parabola through the log magnitudes (exact
  // for a Gaussian fringe envelope).
  const double lm = std::log(magnitude(i_seed - 1));
  const double l0 = std::log(magnitude(i_seed));
  const double lp = std::log(magnitude(i_seed + 1));
  const double curvature = lm - 2.0 * l0 + lp;
  const double shift = curvature < 0 ? std::clamp(0.5 * (lm - lp) / curvature, -0.5, 0.5) : 0.0;
  const double k_best = k(i_seed) + shift * grid.dk();

  // Default center: centroid of the fringe term alone (the band around k_best),
  // which stays at the overlap midpoint when the packets differ in weight.
  double center = 0.0;
  if (options.center) {
    center = *options.center;
  } else {
    const RealArrayXd offset = (k.abs() - k_best) / (0.25 * k_best);
    const ComplexArrayXd band = spectrum * (-0.5 * offset.square()).exp().cast<std::complex<double>>();
    const RealArrayXd weight = spectral.inverse(band).abs2();
    center = (x * weight).sum() / weight.sum();
  }

  const double half_width = options.window_fringes * kTwoPi / k_best;
  std::vector<Eigen::Index> window;
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    if (std::abs(x(i) - center) <= half_width) window.push_back(i);
  }
  if (window.size() < 12) throw Error(ErrorKind::no_fringe, "fit window holds too few samples");
  const LocalFit fit = fit_at(x(window), intensity(window), center, half_width, k_best);

  // Envelopes evaluated at the center are the constant coefficients.
  const double p0 = fit.coeffs(0);
  const double p1 = fit.coeffs(kEnvelopeDegree + 1);
  const double p2 = fit.coeffs(2 * kEnvelopeDegree + 2);
  if (!(p0 > 0)) throw Error(ErrorKind::no_fringe, "fit produced a non-positive envelope at the center");

  FringeAnalysis out;
  out.fringe_spacing = kTwoPi / k_best;
  out.phase_shift = wrap_to_pi(std::atan2(p2, p1));
  out.visibility = std::clamp(std::hypot(p1, p2) / p0, 0.0, 1.0);
  out.center = center;
  const double u = (center - grid.x_min()) / grid.dx();
  const auto i0 = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::floor(u)), 0, grid.size() - 2);
  const double frac = std::clamp(u - double(i0), 0.0, 1.0);
  out.center_intensity = (1.0 - frac) * intensity(i0) + frac * intensity(i0 + 1);
  return out;
}

Grid1D interference_grid(double separation, double sigma0, double t_free, const PhysicalConstants& c) {
  const double tau = spreading_tau(sigma0, t_free, c);
  const double sigma_t = sigma0 * std::sqrt(1.0 + tau * tau);
  const double half = 0.5 * separation + 6.0 * std::max(sigma_t, sigma0) + 5.0 * sigma0;
  // Resolve the initial momentum spread 1/(2 sigma0) with a wide Nyquist margin.
  const double dx_max = std::min(sigma0 / 4.0, kPi * sigma0 / 6.0);
  Eigen::Index n = 256;
  while (2.0 * half / double(n) > dx_max) n *= 2;
  return Grid1D(n, -half, half);
}

double latest_separated_time(double separation, double sigma0, const PhysicalConstants& c) {
  const double ratio = separation / (10.0 * sigma0);
  if (ratio < 1.0) {
    throw Error(ErrorKind::preparation, "packets are never 5 sigma away from the midpoint");
  }
  const double tau = std::sqrt(ratio * ratio - 1.0);
  return tau * 2.0 * c.mass * sigma0 * sigma0 / c.hbar;
}

std::vector<FringeScanPoint> phase_to_fringe_scan(double separation, double sigma0, double t_free,
                                                  const std::vector<double>& phis,
                                                  const FringeScanOptions& options) {
  if (phis.empty()) throw Error(ErrorKind::parameter, "phase scan needs at least one phase");
  if (!(t_free > 0)) throw Error(ErrorKind::parameter, "t_free must be positive");
  if (options.steps < 2) throw Error(ErrorKind::parameter, "scan needs at least two steps");
  const PhysicalConstants& c = options.constants;
  const Grid1D grid = options.grid.value_or(interference_grid(separation, sigma0, t_free, c));
  const double hint = kTwoPi / two_packet_fringe_wavenumber(separation, sigma0, t_free, c);
  const double dt = t_free / double(options.steps);

  double kick_time = 0.0;
  if (options.application == PhaseApplication::mid_flight) {
    kick_time = options.kick_time.value_or(std::min(0.25 * t_free, latest_separated_time(separation, sigma0, c)));
    if (kick_time > latest_separated_time(separation, sigma0, c)) {
      throw Error(ErrorKind::preparation, "packets already overlap at the kick time");
    }
  }
  const auto kick_steps = static_cast<Eigen::Index>(std::floor(kick_time / dt));

  std::vector<FringeScanPoint> out;
  out.reserve(phis.size());
  for (double phi : phis) {
    ComplexField psi = [&] {
      if (options.application == PhaseApplication::preparation) {
        const ComplexField psi0 = two_packet_state(grid, separation, sigma0, phi, options.amplitude_ratio);
        return evolve(psi0, FreeParticle{}, t_free, dt, options.steps, c).psi_final;
      }
      // Kick the right half of the grid, which holds the right packet only.
      ComplexField current = two_packet_state(grid, separation, sigma0, 0.0, options.amplitude_ratio);
      if (kick_steps > 0) {
        current = evolve(current, FreeParticle{}, double(kick_steps) * dt, dt, kick_steps, c).psi_final;
      }
      const Eigen::Index rest = options.steps - kick_steps;
      const PhaseKick kick{phi, 0.0, grid.x_max()};
      return evolve(current, kick, double(rest) * dt, dt, rest, c).psi_final;
    }();
    FringeOptions fopts;
    fopts.center = 0.0;
    const FringeAnalysis analysis = fringe_analysis(psi, hint, fopts);
    const double extracted = analysis.phase_shift + kTwoPi * std::round((phi - analysis.phase_shift) / kTwoPi);
    out.push_back({phi, extracted, analysis});
  }
  return out;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error(ErrorKind::insufficient_data, "line fit needs two points");
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd a(n, 2);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, 0) = x[i];
    a(i, 1) = 1.0;
    b(i) = y[i];
  }
  const Eigen::Vector2d sol = a.colPivHouseholderQr().solve(b);
  return {sol(0), sol(1)};
}

}  // namespace phaselab
