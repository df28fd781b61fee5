#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "phaselab/madelung.hpp"

using namespace phaselab;
using std::numbers::pi;

namespace {

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected a phaselab::Error");
  return ErrorKind::parameter;
}

double max_on(const RealArrayXd& a, const MaskArray& m) { return m.select(a.abs(), 0.0).maxCoeff(); }

ComplexField harmonic_ground_field(const Grid1D& g) {
  ComplexField psi(g);
  for (Eigen::Index i = 0; i < g.size(); ++i) psi.values(i) = oracle::harmonic_ground(g.x(i), 1.0);
  return psi;
}

}  // namespace

TEST_CASE("polar_decompose examples") {
  const Grid1D g(1024, -20.0, 20.0);
  const ComplexField gauss = make_gaussian(g, 0.0, 1.0, 0.0);

  SUBCASE("global phase") {
    const HydroFields h = polar_decompose(ComplexField(g, gauss.values * std::polar(1.0, pi / 3)));
    const MaskArray m = make_valid_mask(h.R).mask;
    CHECK(m.count() > 100);
    CHECK(max_on(h.R - gauss.values.abs(), m) <= 1e-15);
    CHECK(max_on(h.S - pi / 3, m) <= 1e-10);
  }

  SUBCASE("plane-wave gradient") {
    const HydroFields h = polar_decompose(make_gaussian(g, 0.0, 1.0, 2.0));
    const MaskArray m = make_valid_mask(h.R).mask;
    CHECK(max_on(bohm_velocity(h) - 2.0, m) <= 1e-8);
    // The unwrapped S is a straight line on the mask.
    CHECK(max_on(h.S - h.S(g.nearest_index(0.0)) - 2.0 * g.positions(), m) <= 1e-9);
  }

  SUBCASE("stationary phase of the harmonic ground state") {
    const Grid1D gh(512, -10.0, 10.0);
    const auto res = evolve(harmonic_ground_field(gh), Harmonic{1.0}, 1.0, 1e-3, 250);
    const auto fields = polar_decompose(res.snapshots);
    for (std::size_t j = 0; j < fields.size(); ++j) {
      const MaskArray m = make_valid_mask(fields[j].R).mask;
      CHECK(max_on(fields[j].S + 0.5 * res.times[j], m) <= 1e-6);
    }
  }

  SUBCASE("temporal branch continuity") {
    // The phase at the origin winds through many multiples of 2 pi; the
    // decomposition must follow it rather than jump back to (-pi, pi].
    const Grid1D gh(512, -10.0, 10.0);
    const auto res = evolve(harmonic_ground_field(gh), Harmonic{1.0}, 20.0, 1e-2, 10);
    const auto fields = polar_decompose(res.snapshots);
    const Eigen::Index c = gh.nearest_index(0.0);
    // dt = 1e-2 leaves a splitting error far below a 2 pi jump.
    for (std::size_t j = 0; j < fields.size(); ++j) CHECK(std::abs(fields[j].S(c) + 0.5 * res.times[j]) <= 1e-3);
  }

  SUBCASE("round trip on the mask") {
    const ComplexField two = [&] {
      ComplexField s(g, make_gaussian(g, -4.0, 1.0, 1.0).values + 0.7 * make_gaussian(g, 4.0, 0.8, -2.0).values);
      s.values /= std::sqrt(norm_squared(s));
      return s;
    }();
    const auto res = evolve(two, FreeParticle{}, 3.0, 1e-3, 300);
    const auto fields = polar_decompose(res.snapshots);
    for (std::size_t j = 0; j < fields.size(); ++j) {
      const MaskArray m = make_valid_mask(fields[j].R).mask;
      const ComplexField back = reconstruct_psi(fields[j]);
      CHECK(m.select((back.values - res.snapshots[j].values).abs(), 0.0).maxCoeff() <= 1e-10);
    }
  }

  SUBCASE("global phase covariance") {
    const ComplexField psi = make_gaussian(g, 1.0, 1.3, -0.8);
    const HydroFields base = polar_decompose(psi);
    const MaskArray m = make_valid_mask(base.R).mask;
    for (double alpha : {pi / 7, 1.0, 3.0}) {
      const HydroFields h = polar_decompose(ComplexField(g, psi.values * std::polar(1.0, alpha)));
      CHECK((h.R - base.R).abs().maxCoeff() <= 1e-15);
      const RealArrayXd shift = h.S - base.S;
      const double branch = 2 * pi * std::round((shift(g.nearest_index(1.0)) - alpha) / (2 * pi));
      CHECK(max_on(shift - alpha - branch, m) <= 1e-10);
    }
  }

  SUBCASE("errors") {
    CHECK(kind_of([&] { polar_decompose(ComplexField(g)); }) == ErrorKind::degenerate_state);
    // A sign flip between two neighbouring points of a smooth envelope is a
    // jump of exactly pi that no branch choice can remove.
    ComplexField flipped = gauss;
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      if (g.x(i) > 0.3 * g.dx()) flipped.values(i) *= -1.0;
    }
    CHECK(kind_of([&] { polar_decompose(flipped); }) == ErrorKind::unwrap_failure);
  }
}

TEST_CASE("quantum potential") {
  const Grid1D g(1024, -16.0, 16.0);  // dx = 1/32, so x = 2 is a grid point
  const HydroFields h = polar_decompose(make_gaussian(g, 0.0, 1.0, 0.0));
  const ValidMask mask = make_valid_mask(h.R);
  const RealArrayXd Q = quantum_potential(h, mask);
  CHECK(std::abs(Q(g.nearest_index(0.0)) - 0.25) <= 1e-6);
  CHECK(std::abs(Q(g.nearest_index(2.0)) + 0.25) <= 1e-6);
  double err = 0.0;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    if (mask.mask(i)) err = std::max(err, std::abs(Q(i) - oracle::gaussian_quantum_potential(g.x(i), 1.0)));
    else CHECK(Q(i) == 0.0);
  }
  CHECK(err <= 1e-6);

  const HydroFields flat(g, RealArrayXd::Constant(g.size(), 0.3), RealArrayXd::Zero(g.size()));
  CHECK(quantum_potential(flat, make_valid_mask(flat.R)).abs().maxCoeff() <= 1e-10);

  PhysicalConstants c;
  c.hbar = 2.0;
  c.mass = 0.5;
  const RealArrayXd Qc = quantum_potential(h, mask, c);
  CHECK(std::abs(Qc(g.nearest_index(0.0)) - oracle::gaussian_quantum_potential(0.0, 1.0, {2.0, 0.5})) <= 1e-5);
}

TEST_CASE("qhj residuals") {
  SUBCASE("analytic stationary state") {
    const Grid1D g(512, -10.0, 10.0);
    const RealArrayXd R = harmonic_ground_field(g).values.real();
    std::vector<HydroFields> fields;
    std::vector<double> times;
    for (int j = 0; j <= 10; ++j) {
      times.push_back(0.1 * j);
      fields.emplace_back(g, R, RealArrayXd::Constant(g.size(), -0.5 * times.back()));
    }
    const QhjResiduals r = qhj_residuals(fields, times, Harmonic{1.0});
    CHECK(r.hj_max <= 1e-6);
    CHECK(r.continuity_max <= 1e-10);
    CHECK(r.times.size() == 9);
    CHECK(r.hj_residual.cols() == g.size());
  }

  SUBCASE("oracle-evolved free Gaussian and a planted perturbation") {
    const Grid1D g(1024, -20.0, 20.0);
    const auto res = evolve(make_gaussian(g, 0.0, 1.0, 0.0), FreeParticle{}, 1.0, 1e-3, 10);
    auto fields = polar_decompose(res.snapshots);
    const QhjResiduals r = qhj_residuals(fields, res.times, FreeParticle{});
    CHECK(r.hj_max <= 1e-3);
    CHECK(r.continuity_max <= 1e-3);
    for (auto& f : fields) f.S += 0.1 * g.positions();
    const QhjResiduals bad = qhj_residuals(fields, res.times, FreeParticle{});
    CHECK(bad.hj_max - r.hj_max >= 1e-3);
  }

  SUBCASE("errors") {
    const Grid1D g(64, -5.0, 5.0);
    const HydroFields f(g, RealArrayXd::Ones(64), RealArrayXd::Zero(64));
    CHECK(kind_of([&] { qhj_residuals({f, f}, {0.0, 0.1}, FreeParticle{}); }) == ErrorKind::insufficient_data);
    CHECK(kind_of([&] { qhj_residuals({f, f, f}, {0.0, 0.1, 0.25}, FreeParticle{}); }) == ErrorKind::spacing);
  }
}

TEST_CASE("madelung_step") {
  SUBCASE("static solution") {
    const Grid1D g(128, -5.0, 5.0);
    const HydroFields f(g, RealArrayXd::Constant(128, 0.4), RealArrayXd::Constant(128, 0.25));
    const double dt = madelung_max_dt(g);
    CHECK(dt == doctest::Approx(0.2 * g.dx() * g.dx()));
    HydroFields h = f;
    for (int n = 0; n < 50; ++n) h = madelung_step(h, FreeParticle{}, dt, make_valid_mask(h.R));
    CHECK((h.R - f.R).abs().maxCoeff() <= 1e-12);
    CHECK((h.S - f.S).abs().maxCoeff() <= 1e-12);
  }

  SUBCASE("direct integration against the oracle") {
    const Grid1D g(512, -5.0, 5.0);
    const auto res = evolve(make_gaussian(g, 0.0, 1.0, 0.0), FreeParticle{}, 0.5, 1e-3, 500);
    const auto oracle_fields = polar_decompose(res.snapshots);
    REQUIRE(oracle_fields.size() == 2);
    const ValidMask mask = make_valid_mask(oracle_fields.front().R);
    MadelungDiagnostics diag;
    const HydroFields direct =
        madelung_evolve(oracle_fields.front(), FreeParticle{}, 0.5, madelung_max_dt(g), mask, {}, &diag);
    const MaskArray m = make_valid_mask(oracle_fields.back().R).mask;
    CHECK(max_on(direct.R - oracle_fields.back().R, m) <= 1e-3);
    CHECK(max_on(direct.S - oracle_fields.back().S, m) <= 1e-2);
    CHECK(diag.steps > 0);
  }

  SUBCASE("errors") {
    const Grid1D g(512, -20.0, 20.0);
    ComplexField two(g, make_gaussian(g, -5.0, 1.0, 0.0).values + make_gaussian(g, 5.0, 1.0, 0.0).values);
    const HydroFields h = polar_decompose(two);
    CHECK(kind_of([&] { madelung_step(h, FreeParticle{}, madelung_max_dt(g), make_valid_mask(h.R)); }) ==
          ErrorKind::node);
    const Grid1D gs(128, -5.0, 5.0);
    const HydroFields flat(gs, RealArrayXd::Ones(128), RealArrayXd::Zero(128));
    CHECK(kind_of([&] { madelung_step(flat, FreeParticle{}, 2 * madelung_max_dt(gs), make_valid_mask(flat.R)); }) ==
          ErrorKind::parameter);
  }
}

TEST_CASE("bohmian trajectories") {
  const Grid1D g(1024, -20.0, 20.0);
  const auto res = evolve(make_gaussian(g, 0.0, 1.0, 0.0), FreeParticle{}, 2.0, 1e-3, 10);
  const auto fields = polar_decompose(res.snapshots);

  const Trajectory axis = integrate_trajectory(fields, res.times, 0.0);
  for (double x : axis.positions) CHECK(std::abs(x) <= 1e-9);

  const Trajectory one = integrate_trajectory(fields, res.times, 1.0);
  CHECK(one.times.size() == res.times.size());
  CHECK(one.positions.size() == one.times.size());
  CHECK(one.velocities.size() == one.times.size());
  CHECK(std::abs(one.positions.back() - std::sqrt(2.0)) <= 1e-3);
  double pos_err = 0.0, act_err = 0.0;
  for (std::size_t i = 0; i < one.times.size(); ++i) {
    pos_err = std::max(pos_err, std::abs(one.positions[i] - oracle::bohm_path(1.0, one.times[i], 0.0, 1.0, 0.0)));
    act_err = std::max(act_err, std::abs(one.action_sampled[i] - one.action_integrated[i]));
  }
  CHECK(pos_err <= 1e-3);
  CHECK(act_err <= 1e-2);

  const Trajectory minus = integrate_trajectory(fields, res.times, -1.0);
  for (std::size_t i = 0; i < one.times.size(); ++i) {
    CHECK(minus.positions[i] < axis.positions[i]);
    CHECK(axis.positions[i] < one.positions[i]);
  }

  const RealArrayXd j = probability_current(fields.back());
  const RealArrayXd v = bohm_velocity(fields.back());
  CHECK((j - fields.back().R.square() * v).abs().maxCoeff() <= 1e-12);

  CHECK(kind_of([&] { integrate_trajectory(fields, res.times, 19.9); }) == ErrorKind::escape);
  CHECK(kind_of([&] { integrate_trajectory({fields.front()}, {0.0}, 0.0); }) == ErrorKind::insufficient_data);
}

TEST_CASE("cubic interpolation") {
  const Grid1D g(64, 0.0, 8.0);
  const RealArrayXd x = g.positions();
  const RealArrayXd f = 1.0 + x * (0.5 - 0.1 * x * x);
  CHECK(interpolate_cubic(f, g, 3.3) == doctest::Approx(1.0 + 3.3 * (0.5 - 0.1 * 3.3 * 3.3)).epsilon(1e-12));
  CHECK(kind_of([&] { interpolate_cubic(f, g, 0.01); }) == ErrorKind::escape);
}
