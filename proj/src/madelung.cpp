#include "phaselab/madelung.hpp"

#include <cmath>
#include <complex>
#include <numbers>

namespace phaselab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::complex<double> kI{0.0, 1.0};

double wrap_to_pi(double a) {
  double w = std::remainder(a, kTwoPi);
  if (w <= -std::numbers::pi) w += kTwoPi;
  return w;
}

// Derivative quantities of psi = R exp(iS/hbar) shared by several operations.
struct WaveDerivatives {
  ComplexArrayXd psi;
  ComplexArrayXd d1;
  ComplexArrayXd d2;
};

WaveDerivatives derivatives_of(const HydroFields& fields, const PhysicalConstants& c, Spectral& spectral) {
  WaveDerivatives w;
  w.psi = reconstruct_psi(fields, c).values;
  w.d1 = spectral.derivative(w.psi, 1);
  w.d2 = spectral.derivative(w.psi, 2);
  return w;
}

// hbar Im(psi* psi') / |psi|^2 where |psi|^2 is representable, else 0.
RealArrayXd action_gradient(const WaveDerivatives& w, const PhysicalConstants& c) {
  const RealArrayXd rho = w.psi.abs2();
  const RealArrayXd flux = (w.psi.conjugate() * w.d1).imag();
  return (rho > 0).select(c.hbar * flux / rho, 0.0);
}

// R''/R = [Re(psi* psi'') + |psi'|^2] / rho - (Re(psi* psi'))^2 / rho^2.
RealArrayXd curvature_ratio(const WaveDerivatives& w) {
  const RealArrayXd rho = w.psi.abs2();
  const RealArrayXd a = (w.psi.conjugate() * w.d2).real() + w.d1.abs2();
  const RealArrayXd b = (w.psi.conjugate() * w.d1).real();
  return (rho > 0).select(a / rho - b.square() / rho.square(), 0.0);
}

void require_same_grid(const std::vector<HydroFields>& fields_t) {
  for (const auto& f : fields_t) {
    if (!(f.grid == fields_t.front().grid)) throw Error(ErrorKind::dimension, "snapshots live on different grids");
  }
}

}  // namespace

ValidMask make_valid_mask(const RealArrayXd& R, double epsilon) {
  if (!(epsilon > 0 && epsilon < 1)) throw Error(ErrorKind::parameter, "mask epsilon must lie in (0, 1)");
  return ValidMask{epsilon, R > epsilon * R.maxCoeff()};
}

namespace {

// Unwrapped phase (radians) and mask of a single snapshot.
std::pair<RealArrayXd, MaskArray> unwrap_phase(const ComplexField& psi, double epsilon) {
  const RealArrayXd R = psi.values.abs();
  if (!(R.maxCoeff() > 0)) throw Error(ErrorKind::degenerate_state, "cannot decompose a zero field");
  const MaskArray mask = make_valid_mask(R, epsilon).mask;
  const Eigen::Index n = psi.size();
  RealArrayXd raw(n);
  for (Eigen::Index i = 0; i < n; ++i) raw(i) = std::arg(psi.values(i));

  RealArrayXd phase(n);
  phase(0) = raw(0);
  bool have_valid = mask(0);
  double last_valid = phase(0);
  for (Eigen::Index i = 1; i < n; ++i) {
    // Valid points chain to the previous valid point so that noise in the
    // gaps between them never shifts the branch.
    const double ref = (mask(i) && have_valid) ? last_valid : phase(i - 1);
    const double step = wrap_to_pi(raw(i) - ref);
    if (mask(i) && mask(i - 1) && std::abs(step) >= std::numbers::pi * (1.0 - 1e-9)) {
      throw Error(ErrorKind::unwrap_failure,
                  "phase jump of pi between adjacent valid points at x = " + std::to_string(psi.grid.x(i)));
    }
    phase(i) = ref + step;
    if (mask(i)) {
      have_valid = true;
      last_valid = phase(i);
    }
  }
  return {phase, mask};
}

}  // namespace

HydroFields polar_decompose(const ComplexField& psi, const PhysicalConstants& c, double epsilon) {
  return polar_decompose(std::vector<ComplexField>{psi}, c, epsilon).front();
}

std::vector<HydroFields> polar_decompose(const std::vector<ComplexField>& snapshots, const PhysicalConstants& c,
                                         double epsilon) {
  c.validate();
  std::vector<HydroFields> out;
  out.reserve(snapshots.size());
  RealArrayXd prev_phase;
  MaskArray prev_mask;
  for (const auto& psi : snapshots) {
    auto [phase, mask] = unwrap_phase(psi, epsilon);
    if (prev_phase.size() == phase.size()) {
      const MaskArray common = mask && prev_mask;
      if (common.any()) {
        const RealArrayXd diff = phase - prev_phase;
        const double hi = common.select(diff, -std::numeric_limits<double>::infinity()).maxCoeff();
        const double lo = common.select(diff, std::numeric_limits<double>::infinity()).minCoeff();
        phase -= kTwoPi * std::round(0.5 * (hi + lo) / kTwoPi);
      }
    }
    out.emplace_back(psi.grid, psi.values.abs(), c.hbar * phase);
    prev_phase = std::move(phase);
    prev_mask = std::move(mask);
  }
  return out;
}

ComplexField reconstruct_psi(const HydroFields& fields, const PhysicalConstants& c) {
  ComplexField psi(fields.grid);
  for (Eigen::Index i = 0; i < psi.size(); ++i) psi.values(i) = std::polar(fields.R(i), fields.S(i) / c.hbar);
  return psi;
}

RealArrayXd quantum_potential(const HydroFields& fields, const ValidMask& mask, const PhysicalConstants& c) {
  if (mask.mask.size() != fields.grid.size()) throw Error(ErrorKind::dimension, "mask length does not match grid");
  Spectral spectral(fields.grid);
  const RealArrayXd ratio = curvature_ratio(derivatives_of(fields, c, spectral));
  return mask.mask.select(-c.hbar * c.hbar / (2.0 * c.mass) * ratio, 0.0);
}

RealArrayXd bohm_velocity(const HydroFields& fields, const PhysicalConstants& c) {
  Spectral spectral(fields.grid);
  return action_gradient(derivatives_of(fields, c, spectral), c) / c.mass;
}

RealArrayXd probability_current(const HydroFields& fields, const PhysicalConstants& c) {
  Spectral spectral(fields.grid);
  const ComplexArrayXd psi = reconstruct_psi(fields, c).values;
  return c.hbar / c.mass * (psi.conjugate() * spectral.derivative(psi, 1)).imag();
}

QhjResiduals qhj_residuals(const std::vector<HydroFields>& fields_t, const std::vector<double>& times,
                           const Potential& V, double epsilon, const PhysicalConstants& c) {
  c.validate();
  if (fields_t.size() < 3 || times.size() != fields_t.size()) {
    throw Error(ErrorKind::insufficient_data, "need at least three snapshots with matching times");
  }
  require_same_grid(fields_t);
  const double dt = times[1] - times[0];
  if (!(dt > 0)) throw Error(ErrorKind::spacing, "snapshot times must increase");
  for (std::size_t j = 1; j < times.size(); ++j) {
    if (std::abs((times[j] - times[j - 1]) - dt) > 1e-9) {
      throw Error(ErrorKind::spacing, "snapshot times are not uniformly spaced");
    }
  }

  const Grid1D& grid = fields_t.front().grid;
  validate(V, grid);
  const RealArrayXd potential = potential_values(V, grid, c);
  Spectral spectral(grid);

  std::vector<MaskArray> masks;
  masks.reserve(fields_t.size());
  for (const auto& f : fields_t) masks.push_back(make_valid_mask(f.R, epsilon).mask);

  const auto interior = static_cast<Eigen::Index>(fields_t.size() - 2);
  QhjResiduals out;
  out.hj_residual = Eigen::ArrayXXd::Zero(interior, grid.size());
  out.continuity_residual = Eigen::ArrayXXd::Zero(interior, grid.size());
  for (Eigen::Index j = 1; j <= interior; ++j) {
    const HydroFields& f = fields_t[j];
    const WaveDerivatives w = derivatives_of(f, c, spectral);
    const RealArrayXd grad_s = action_gradient(w, c);
    const RealArrayXd q = -c.hbar * c.hbar / (2.0 * c.mass) * curvature_ratio(w);
    const RealArrayXd ds_dt = (fields_t[j + 1].S - fields_t[j - 1].S) / (2.0 * dt);
    const RealArrayXd drho_dt = (fields_t[j + 1].R.square() - fields_t[j - 1].R.square()) / (2.0 * dt);
    const RealArrayXd current = c.hbar / c.mass * (w.psi.conjugate() * w.d1).imag();
    const RealArrayXd divergence = spectral.derivative(current, 1);

    const MaskArray mask = masks[j - 1] && masks[j] && masks[j + 1];
    const RealArrayXd hj = ds_dt + grad_s.square() / (2.0 * c.mass) + potential + q;
    const RealArrayXd cont = drho_dt + divergence;
    out.hj_residual.row(j - 1) = mask.select(hj, 0.0).transpose();
    out.continuity_residual.row(j - 1) = mask.select(cont, 0.0).transpose();
    out.times.push_back(times[j]);
    out.masks.push_back(mask);
  }
  out.hj_max = out.hj_residual.abs().maxCoeff();
  out.continuity_max = out.continuity_residual.abs().maxCoeff();
  return out;
}

double madelung_max_dt(const Grid1D& grid, const PhysicalConstants& c) {
  return 0.2 * grid.dx() * grid.dx() * c.mass / c.hbar;
}

namespace {

struct HydroRate {
  RealArrayXd drho;
  RealArrayXd dS;
};

// Right-hand side of both hydrodynamic equations with spectral derivatives of
// rho = R^2 and S. A node-free periodic psi has a smooth periodic amplitude
// and an action that is periodic up to an integer winding 2*pi*hbar*w, whose
// linear ramp is taken out before transforming.
class HydroRhs {
 public:
  HydroRhs(const Grid1D& grid, const Potential& V, const PhysicalConstants& c)
      : spectral_(grid), potential_(potential_values(V, grid, c)), x_(grid.positions()), c_(c) {
    k_ = grid.wavenumbers();
    k_odd_ = k_;
    k_odd_(grid.size() / 2) = 0.0;
  }

  HydroRate operator()(const RealArrayXd& rho, const RealArrayXd& S) {
    const Grid1D& grid = spectral_.grid();
    const Eigen::Index n = S.size();
    const double period_jump = S(n - 1) + (S(n - 1) - S(n - 2)) - S(0);
    const double slope = kTwoPi * c_.hbar * std::round(period_jump / (kTwoPi * c_.hbar)) / grid.length();
    const RealArrayXd periodic_s = S - slope * (x_ - grid.x_min());

    // Both fields are real, so one transform of S + i rho carries both.
    const ComplexArrayXd packed = spectral_.forward(periodic_s.cast<std::complex<double>>() + kI * rho);
    const ComplexArrayXd d1 = spectral_.inverse(packed * (kI * k_odd_));
    const ComplexArrayXd d2 = spectral_.inverse(packed * (-k_.square()).cast<std::complex<double>>());
    const RealArrayXd s1 = d1.real() + slope;
    const RealArrayXd s2 = d2.real();
    const RealArrayXd r1 = d1.imag();
    const RealArrayXd r2 = d2.imag();
    // R''/R expressed through rho = R^2.
    const RealArrayXd curvature = r2 / (2.0 * rho) - r1.square() / (4.0 * rho.square());
    const RealArrayXd q = -c_.hbar * c_.hbar / (2.0 * c_.mass) * curvature;
    return {-(r1 * s1 + rho * s2) / c_.mass, -s1.square() / (2.0 * c_.mass) - potential_ - q};
  }

 private:
  Spectral spectral_;
  RealArrayXd potential_;
  RealArrayXd x_;
  RealArrayXd k_;
  RealArrayXd k_odd_;
  PhysicalConstants c_;
};

HydroFields rk4_hydro(const HydroFields& fields, double dt, HydroRhs& rhs, double hbar, long& clamped) {
  const RealArrayXd rho0 = fields.R.square();
  const RealArrayXd& s0 = fields.S;
  const HydroRate k1 = rhs(rho0, s0);
  const HydroRate k2 = rhs(rho0 + 0.5 * dt * k1.drho, s0 + 0.5 * dt * k1.dS);
  const HydroRate k3 = rhs(rho0 + 0.5 * dt * k2.drho, s0 + 0.5 * dt * k2.dS);
  const HydroRate k4 = rhs(rho0 + dt * k3.drho, s0 + dt * k3.dS);
  RealArrayXd rho = rho0 + dt / 6.0 * (k1.drho + 2.0 * k2.drho + 2.0 * k3.drho + k4.drho);
  RealArrayXd S = s0 + dt / 6.0 * (k1.dS + 2.0 * k2.dS + 2.0 * k3.dS + k4.dS);

  const double s_before = std::max(s0.abs().maxCoeff(), hbar);
  if (!rho.allFinite() || !S.allFinite() || S.abs().maxCoeff() > 1e3 * s_before) {
    throw Error(ErrorKind::instability, "action grew by more than 1e3 in one step");
  }
  clamped = (rho < 0).count();
  rho = rho.max(0.0);
  return HydroFields(fields.grid, rho.sqrt(), std::move(S));
}

void check_step_preconditions(const HydroFields& fields, double dt, const ValidMask& mask,
                              const PhysicalConstants& c) {
  c.validate();
  if (!(dt > 0)) throw Error(ErrorKind::parameter, "dt must be positive");
  if (dt > madelung_max_dt(fields.grid, c) * (1.0 + 1e-12)) {
    throw Error(ErrorKind::parameter, "dt exceeds the stability guard 0.2 dx^2 m / hbar");
  }
  if (!(mask.epsilon > 0 && mask.epsilon < 1)) throw Error(ErrorKind::parameter, "mask epsilon must lie in (0, 1)");
  const double r_max = fields.R.maxCoeff();
  if (!(r_max > 0) || !(fields.R.minCoeff() / r_max > mask.epsilon)) {
    throw Error(ErrorKind::node, "state has a node or near-node (min R / max R <= epsilon)");
  }
}

}  // namespace

HydroFields madelung_step(const HydroFields& fields, const Potential& V, double dt, const ValidMask& mask,
                          const PhysicalConstants& c, MadelungDiagnostics* diagnostics) {
  check_step_preconditions(fields, dt, mask, c);
  HydroRhs rhs(fields.grid, V, c);
  long clamped = 0;
  HydroFields next = rk4_hydro(fields, dt, rhs, c.hbar, clamped);
  if (diagnostics) {
    ++diagnostics->steps;
    diagnostics->clamp_events += clamped;
  }
  return next;
}

HydroFields madelung_evolve(const HydroFields& fields, const Potential& V, double t_final, double dt_max,
                            const ValidMask& mask, const PhysicalConstants& c, MadelungDiagnostics* diagnostics) {
  if (!(t_final > 0) || !(dt_max > 0)) throw Error(ErrorKind::parameter, "t_final and dt must be positive");
  const auto steps = static_cast<long>(std::ceil(t_final / dt_max - 1e-9));
  const double dt = t_final / double(steps);
  HydroRhs rhs(fields.grid, V, c);
  HydroFields current = fields;
  for (long n = 0; n < steps; ++n) {
    check_step_preconditions(current, dt, mask, c);
    long clamped = 0;
    current = rk4_hydro(current, dt, rhs, c.hbar, clamped);
    if (diagnostics) {
      ++diagnostics->steps;
      diagnostics->clamp_events += clamped;
    }
  }
  return current;
}

double interpolate_cubic(const RealArrayXd& samples, const Grid1D& grid, double x) {
  const double u = (x - grid.x_min()) / grid.dx();
  const auto i = static_cast<Eigen::Index>(std::floor(u));
  if (i < 1 || i + 2 >= grid.size()) throw Error(ErrorKind::escape, "interpolation point too close to the boundary");
  const double t = u - double(i);
  const double f0 = samples(i - 1), f1 = samples(i), f2 = samples(i + 1), f3 = samples(i + 2);
  return f0 * (-t * (t - 1.0) * (t - 2.0) / 6.0) + f1 * ((t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0) +
         f2 * (-(t + 1.0) * t * (t - 2.0) / 2.0) + f3 * ((t + 1.0) * t * (t - 1.0) / 6.0);
}

Trajectory integrate_trajectory(const std::vector<HydroFields>& fields_t, const std::vector<double>& times,
                                double x_start, const Potential& V, const PhysicalConstants& c,
                                const TrajectoryOptions& options) {
  c.validate();
  if (fields_t.size() < 2 || times.size() != fields_t.size()) {
    throw Error(ErrorKind::insufficient_data, "need at least two snapshots with matching times");
  }
  if (options.substeps < 1) throw Error(ErrorKind::parameter, "substeps must be at least 1");
  require_same_grid(fields_t);
  for (std::size_t j = 1; j < times.size(); ++j) {
    if (!(times[j] > times[j - 1])) throw Error(ErrorKind::spacing, "snapshot times must increase");
  }
  const Grid1D& grid = fields_t.front().grid;
  const double margin = 5.0 * grid.dx();
  const auto check_inside = [&](double x) {
    if (!std::isfinite(x) || x < grid.x_min() + margin || x > grid.x_max() - margin) {
      throw Error(ErrorKind::escape, "trajectory left the grid interior at x = " + std::to_string(x));
    }
  };
  check_inside(x_start);

  const RealArrayXd potential = potential_values(V, grid, c);
  std::vector<RealArrayXd> velocity;
  std::vector<RealArrayXd> lagrangian;  // m v^2/2 - V - Q
  Spectral spectral(grid);
  for (const auto& f : fields_t) {
    const WaveDerivatives w = derivatives_of(f, c, spectral);
    const RealArrayXd v = action_gradient(w, c) / c.mass;
    const MaskArray mask = make_valid_mask(f.R, options.epsilon).mask;
    const RealArrayXd q = mask.select(-c.hbar * c.hbar / (2.0 * c.mass) * curvature_ratio(w), 0.0);
    velocity.push_back(v);
    lagrangian.push_back(0.5 * c.mass * v.square() - potential - q);
  }

  // Field value at (x, t) with t inside snapshot interval j.
  const auto sample = [&](const std::vector<RealArrayXd>& field, std::size_t j, double t, double x) {
    check_inside(x);
    const double a = (t - times[j]) / (times[j + 1] - times[j]);
    return (1.0 - a) * interpolate_cubic(field[j], grid, x) + a * interpolate_cubic(field[j + 1], grid, x);
  };

  Trajectory traj;
  double x = x_start;
  double action = interpolate_cubic(fields_t.front().S, grid, x);
  const auto record = [&](std::size_t j) {
    traj.times.push_back(times[j]);
    traj.positions.push_back(x);
    traj.velocities.push_back(interpolate_cubic(velocity[j], grid, x));
    traj.action_sampled.push_back(interpolate_cubic(fields_t[j].S, grid, x));
    traj.action_integrated.push_back(action);
  };
  record(0);
  for (std::size_t j = 0; j + 1 < times.size(); ++j) {
    const double h = (times[j + 1] - times[j]) / options.substeps;
    for (int s = 0; s < options.substeps; ++s) {
      const double t = times[j] + s * h;
      const double v1 = sample(velocity, j, t, x);
      const double l1 = sample(lagrangian, j, t, x);
      const double v2 = sample(velocity, j, t + 0.5 * h, x + 0.5 * h * v1);
      const double l2 = sample(lagrangian, j, t + 0.5 * h, x + 0.5 * h * v1);
      const double v3 = sample(velocity, j, t + 0.5 * h, x + 0.5 * h * v2);
      const double l3 = sample(lagrangian, j, t + 0.5 * h, x + 0.5 * h * v2);
      const double v4 = sample(velocity, j, t + h, x + h * v3);
      const double l4 = sample(lagrangian, j, t + h, x + h * v3);
      x += h / 6.0 * (v1 + 2.0 * v2 + 2.0 * v3 + v4);
      action += h / 6.0 * (l1 + 2.0 * l2 + 2.0 * l3 + l4);
    }
    check_inside(x);
    record(j + 1);
  }
  return traj;
}

}  // namespace phaselab
