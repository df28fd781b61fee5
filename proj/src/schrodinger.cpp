#include "phaselab/schrodinger.hpp"

#include <cmath>
#include <numbers>

namespace phaselab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void require_finite(const ComplexArrayXd& values) {
  if (!values.real().allFinite() || !values.imag().allFinite()) {
    throw Error(ErrorKind::numeric, "wavefunction contains non-finite values");
  }
}

ComplexArrayXd phase_factors(const RealArrayXd& phase) {
  ComplexArrayXd out(phase.size());
  for (Eigen::Index i = 0; i < phase.size(); ++i) out(i) = std::polar(1.0, phase(i));
  return out;
}

RealArrayXd kick_phase(const PhaseKick& kick, const Grid1D& grid) {
  const RealArrayXd x = grid.positions();
  return ((x >= kick.region_lo) && (x <= kick.region_hi)).cast<double>() * kick.delta_phi;
}

}  // namespace

void validate(const Potential& V, const Grid1D& grid) {
  std::visit(overloaded{
                 [](const FreeParticle&) {},
                 [](const Harmonic& h) {
                   if (!(h.omega > 0)) throw Error(ErrorKind::parameter, "harmonic omega must be positive");
                 },
                 [](const Barrier& b) {
                   if (!(b.width > 0)) throw Error(ErrorKind::parameter, "barrier width must be positive");
                 },
                 [&](const PhaseKick& k) {
                   if (!(k.region_lo < k.region_hi) || k.region_lo < grid.x_min() || k.region_hi > grid.x_max()) {
                     throw Error(ErrorKind::parameter, "phase kick region must be a non-empty interval inside the grid");
                   }
                 },
             },
             V);
}

RealArrayXd potential_values(const Potential& V, const Grid1D& grid, const PhysicalConstants& c) {
  const RealArrayXd x = grid.positions();
  return std::visit(overloaded{
                        [&](const FreeParticle&) -> RealArrayXd { return RealArrayXd::Zero(x.size()); },
                        [&](const Harmonic& h) -> RealArrayXd {
                          return 0.5 * c.mass * h.omega * h.omega * (x - h.center).square();
                        },
                        [&](const Barrier& b) -> RealArrayXd {
                          return ((x - b.center).abs() <= 0.5 * b.width).cast<double>() * b.height;
                        },
                        [&](const PhaseKick&) -> RealArrayXd { return RealArrayXd::Zero(x.size()); },
                    },
                    V);
}

ComplexField apply_phase_kick(const ComplexField& psi, const PhaseKick& kick) {
  validate(kick, psi.grid);
  return ComplexField(psi.grid, psi.values * phase_factors(kick_phase(kick, psi.grid)));
}

double kinetic_phase_at_nyquist(const Grid1D& grid, double dt, const PhysicalConstants& c) {
  const double k = grid.k_nyquist();
  return std::abs(dt) * c.hbar * k * k / (2.0 * c.mass);
}

SplitStepPropagator::SplitStepPropagator(const Grid1D& grid, const Potential& V, double dt,
                                         const PhysicalConstants& c)
    : spectral_(grid) {
  c.validate();
  validate(V, grid);
  const RealArrayXd half = -0.5 * dt / c.hbar * potential_values(V, grid, c);
  half_potential_ = phase_factors(half);
  if (const auto* kick = std::get_if<PhaseKick>(&V)) {
    // Split evenly over the two half steps so the step stays symmetric.
    const double sign = dt < 0 ? -1.0 : 1.0;
    half_potential_kicked_ = phase_factors(half + 0.5 * sign * kick_phase(*kick, grid));
  } else {
    half_potential_kicked_ = half_potential_;
  }
  const RealArrayXd& k = spectral_.wavenumbers();
  kinetic_ = phase_factors(-dt * c.hbar / (2.0 * c.mass) * k.square());
}

void SplitStepPropagator::step(ComplexArrayXd& psi, bool kick) {
  const ComplexArrayXd& half = kick ? half_potential_kicked_ : half_potential_;
  psi *= half;
  ComplexArrayXd psik = spectral_.forward(psi);
  psik *= kinetic_;
  psi = spectral_.inverse(psik);
  psi *= half;
}

ComplexField split_step(const ComplexField& psi, const Potential& V, double dt, const PhysicalConstants& c) {
  if (!(dt > 0)) throw Error(ErrorKind::parameter, "dt must be positive");
  require_finite(psi.values);
  SplitStepPropagator prop(psi.grid, V, dt, c);
  ComplexArrayXd values = psi.values;
  prop.step(values);
  return ComplexField(psi.grid, std::move(values));
}

ComplexField split_step_backward(const ComplexField& psi, const Potential& V, double dt,
                                 const PhysicalConstants& c) {
  if (!(dt > 0)) throw Error(ErrorKind::parameter, "dt must be positive");
  require_finite(psi.values);
  SplitStepPropagator prop(psi.grid, V, -dt, c);
  ComplexArrayXd values = psi.values;
  prop.step(values);
  return ComplexField(psi.grid, std::move(values));
}

PropagationResult evolve(const ComplexField& psi0, const Potential& V, double t_final, double dt,
                         Eigen::Index snapshot_every, const PhysicalConstants& c, const EvolveOptions& options) {
  if (!(t_final > 0)) throw Error(ErrorKind::parameter, "t_final must be positive");
  if (!(dt > 0)) throw Error(ErrorKind::parameter, "dt must be positive");
  if (snapshot_every < 1) throw Error(ErrorKind::parameter, "snapshot_every must be at least 1");
  if (options.snapshot_cap < 2) throw Error(ErrorKind::parameter, "snapshot cap must be at least 2");
  const auto steps = static_cast<Eigen::Index>(std::llround(t_final / dt));
  if (steps < 1 || std::abs(double(steps) * dt - t_final) > 1e-9 * std::max(1.0, t_final)) {
    throw Error(ErrorKind::parameter, "dt must divide t_final");
  }
  require_finite(psi0.values);

  Eigen::Index stride = snapshot_every;
  const auto count_for = [&](Eigen::Index s) {
    return static_cast<std::size_t>((steps + s - 1) / s + 1);
  };
  while (count_for(stride) > options.snapshot_cap) stride += snapshot_every;

  PropagationResult result{psi0, {}, {}, 0.0, 0.0, stride, kinetic_phase_at_nyquist(psi0.grid, dt, c) >= std::numbers::pi};
  result.snapshots.push_back(psi0);
  result.times.push_back(0.0);

  SplitStepPropagator prop(psi0.grid, V, dt, c);
  ComplexArrayXd psi = psi0.values;
  const double norm0 = norm_squared(psi0);
  double norm_prev = norm0;
  for (Eigen::Index n = 1; n <= steps; ++n) {
    prop.step(psi, n == 1);
    const double norm_now = psi.abs2().sum() * psi0.grid.dx();
    if (!std::isfinite(norm_now)) throw Error(ErrorKind::numeric, "wavefunction became non-finite");
    result.max_step_norm_change = std::max(result.max_step_norm_change, std::abs(norm_now - norm_prev));
    norm_prev = norm_now;
    if (n % stride == 0 || n == steps) {
      // t = n*dt rather than accumulated sums keeps the times exact.
      result.snapshots.emplace_back(psi0.grid, psi);
      result.times.push_back(n == steps ? t_final : double(n) * dt);
    }
  }
  result.psi_final = ComplexField(psi0.grid, psi);
  result.norm_drift = std::abs(norm_prev - norm0);
  return result;
}

namespace {

double checked_norm(const ComplexField& psi) {
  const double n = norm_squared(psi);
  if (!(n > 0)) throw Error(ErrorKind::degenerate_state, "expectation value of a zero-norm field");
  return n;
}

}  // namespace

double expectation_position(const ComplexField& psi) {
  const double n = checked_norm(psi);
  return (psi.grid.positions() * psi.values.abs2()).sum() * psi.grid.dx() / n;
}

double position_variance(const ComplexField& psi) {
  const double n = checked_norm(psi);
  const double mean = expectation_position(psi);
  return ((psi.grid.positions() - mean).square() * psi.values.abs2()).sum() * psi.grid.dx() / n;
}

double expectation_energy(const ComplexField& psi, const Potential& V, const PhysicalConstants& c) {
  const double n = checked_norm(psi);
  Spectral spectral(psi.grid);
  const ComplexArrayXd h_psi = -c.hbar * c.hbar / (2.0 * c.mass) * spectral.derivative(psi.values, 2) +
                               potential_values(V, psi.grid, c).cast<std::complex<double>>() * psi.values;
  const std::complex<double> e = (psi.values.conjugate() * h_psi).sum() * psi.grid.dx() / n;
  if (std::abs(e.imag()) > 1e-10 * std::max(1.0, std::abs(e.real()))) {
    throw Error(ErrorKind::numeric, "energy expectation has a non-negligible imaginary part");
  }
  return e.real();
}

}  // namespace phaselab
