#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "phaselab/interference.hpp"

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

double wrapped_distance(double a, double b) { return std::abs(std::remainder(a - b, 2 * pi)); }

// Fringe wavenumber from the slope of the analytic cross-term phase at x = 0.
double oracle_fringe_wavenumber(double d, double s0, double t) {
  const double h = 1e-4;
  return -(oracle::cross_phase(h, t, d, s0, 0.0) - oracle::cross_phase(-h, t, d, s0, 0.0)) / (2 * h);
}

ComplexField evolved_pair(double d, double s0, double t, double dphi, double ratio = 1.0) {
  const Grid1D g = interference_grid(d, s0, t);
  const ComplexField psi0 = two_packet_state(g, d, s0, dphi, ratio);
  return evolve(psi0, FreeParticle{}, t, t / 600, 600).psi_final;
}

}  // namespace

TEST_CASE("two_packet_state") {
  const Grid1D g(1024, -20.0, 20.0);
  SUBCASE("symmetric") {
    const ComplexField psi = two_packet_state(g, 8.0, 1.0, 0.0);
    double err = 0.0;
    for (Eigen::Index i = 1; i < g.size(); ++i) err = std::max(err, std::abs(std::abs(psi.values(i)) - std::abs(psi.values(g.size() - i))));
    CHECK(err <= 1e-12);
  }
  SUBCASE("antisymmetric node") {
    const ComplexField psi = two_packet_state(g, 8.0, 1.0, pi);
    CHECK(std::abs(psi.values(g.nearest_index(0.0))) <= 1e-12);
  }
  SUBCASE("normalized and matching the closed form") {
    for (double dphi : {0.0, 0.4, pi / 2, pi, 5.0}) {
      const ComplexField psi = two_packet_state(g, 6.0, 1.0, dphi, 1.5);
      CHECK(std::abs(norm_squared(psi) - 1.0) <= 1e-10);
      double err = 0.0;
      for (Eigen::Index i = 0; i < g.size(); ++i) {
        err = std::max(err, std::abs(psi.values(i) - oracle::two_packets(g.x(i), 0.0, 6.0, 1.0, dphi, 1.5)));
      }
      CHECK(err <= 1e-10);
    }
  }
  SUBCASE("errors") {
    CHECK(kind_of([&] { two_packet_state(g, 5.0, 1.0, 0.0); }) == ErrorKind::preparation);
    CHECK(kind_of([&] { two_packet_state(g, 34.0, 1.0, 0.0); }) == ErrorKind::preparation);
    CHECK(kind_of([&] { two_packet_state(g, 8.0, 1.0, 0.0, 0.0); }) == ErrorKind::parameter);
  }
}

TEST_CASE("fringe wavenumber") {
  for (double t : {2.0, 6.0, 15.0}) {
    CHECK(two_packet_fringe_wavenumber(8.0, 1.0, t) == doctest::Approx(oracle_fringe_wavenumber(8.0, 1.0, t)).epsilon(1e-6));
  }
  // The two-source far-field spacing 2 pi hbar t / (m d) is the large-t limit.
  const double t = 200.0;
  CHECK(2 * pi / two_packet_fringe_wavenumber(8.0, 1.0, t) == doctest::Approx(2 * pi * t / 8.0).epsilon(1e-3));
}

TEST_CASE("fringe_analysis") {
  const double d = 8.0, s0 = 1.0, t = 6.0;
  const double exact_spacing = 2 * pi / oracle_fringe_wavenumber(d, s0, t);

  SUBCASE("in phase") {
    const FringeAnalysis fa = fringe_analysis(evolved_pair(d, s0, t, 0.0), 3 * pi / 2);
    CHECK(fa.fringe_spacing == doctest::Approx(exact_spacing).epsilon(0.05));
    CHECK(wrapped_distance(fa.phase_shift, 0.0) <= 0.05);
    CHECK(fa.visibility >= 0.0);
    CHECK(fa.visibility <= 1.0);
    CHECK(fa.phase_shift > -pi);
    CHECK(fa.phase_shift <= pi);
  }

  SUBCASE("opposite phase: central minimum") {
    const ComplexField psi = evolved_pair(d, s0, t, pi);
    const FringeAnalysis fa = fringe_analysis(psi, 3 * pi / 2);
    CHECK(wrapped_distance(fa.phase_shift, pi) <= 0.05);
    CHECK(fa.fringe_spacing == doctest::Approx(exact_spacing).epsilon(0.05));
    const double peak = psi.values.abs2().maxCoeff();
    CHECK(fa.center_intensity <= 1e-6 * peak);
    CHECK(std::norm(psi.values(psi.grid.nearest_index(0.0))) <= 1e-6 * peak);
  }

  // Only about one fringe is visible at sigma0 = 1, t = 6 (local contrast
  // falls as 1/cosh(x d / 2 sigma_t^2)). Generic phases and visibility need a
  // pattern with several fringes: sigma0 = 0.5 spreads four times faster.
  SUBCASE("against the analytic superposition") {
    const double narrow = 0.5;
    const double hint = 2 * pi / oracle_fringe_wavenumber(d, narrow, t);
    for (double dphi : {0.7, -2.0, 2.9}) {
      const FringeAnalysis fa = fringe_analysis(evolved_pair(d, narrow, t, dphi), hint);
      CHECK(wrapped_distance(fa.phase_shift, oracle::cross_phase(0.0, t, d, narrow, dphi)) <= 0.05);
    }
  }

  SUBCASE("visibility and amplitude ratio") {
    const double narrow = 0.5;
    const double hint = 2 * pi / oracle_fringe_wavenumber(d, narrow, t);
    const FringeAnalysis equal = fringe_analysis(evolved_pair(d, narrow, t, 0.0), hint);
    CHECK(equal.visibility >= 0.9);
    CHECK(equal.visibility <= 1.0);
    const double r = 2.0;
    const FringeAnalysis fa = fringe_analysis(evolved_pair(d, narrow, t, 0.0, r), hint);
    CHECK(std::abs(fa.visibility - 2 * r / (1 + r * r)) <= 0.05);
  }

  SUBCASE("no fringes") {
    const Grid1D g(1024, -20.0, 20.0);
    CHECK(kind_of([&] { fringe_analysis(make_gaussian(g, 0.0, 1.0, 0.0), 2.0); }) == ErrorKind::no_fringe);
    CHECK(kind_of([&] { fringe_analysis(ComplexField(g), 2.0); }) == ErrorKind::degenerate_state);
    CHECK(kind_of([&] { fringe_analysis(make_gaussian(g, 0.0, 1.0, 0.0), -1.0); }) == ErrorKind::parameter);
  }
}

TEST_CASE("phase_to_fringe_scan") {
  const double d = 8.0, s0 = 0.5, t = 6.0;
  const std::vector<double> phis{0.0, pi / 2, pi, 3 * pi / 2};

  const auto prep = phase_to_fringe_scan(d, s0, t, phis);
  REQUIRE(prep.size() == phis.size());
  std::vector<double> applied, extracted;
  for (std::size_t i = 0; i < prep.size(); ++i) {
    CHECK(prep[i].applied == phis[i]);
    CHECK(std::abs(prep[i].extracted - phis[i]) <= pi);
    CHECK(wrapped_distance(prep[i].extracted, oracle::cross_phase(0.0, t, d, s0, phis[i])) <= 0.05);
    applied.push_back(prep[i].applied);
    extracted.push_back(prep[i].extracted);
  }
  const LineFit fit = fit_line(applied, extracted);
  CHECK(std::abs(fit.slope - 1.0) <= 0.02);
  CHECK(std::abs(fit.offset) <= 0.05);

  FringeScanOptions mid;
  mid.application = PhaseApplication::mid_flight;
  const auto kicked = phase_to_fringe_scan(d, s0, t, phis, mid);
  for (std::size_t i = 0; i < phis.size(); ++i) {
    CHECK(std::abs(kicked[i].extracted - prep[i].extracted) <= 0.05);
  }

  const auto zero = phase_to_fringe_scan(d, s0, t, {0.0});
  CHECK(std::abs(zero.front().extracted) <= 0.05);

  SUBCASE("kick timing") {
    const double t_sep = latest_separated_time(d, s0);
    // sigma(t_sep) puts each packet exactly 5 sigma from the midpoint.
    CHECK(oracle::free_width(s0, t_sep) * 5.0 == doctest::Approx(d / 2).epsilon(1e-9));
    FringeScanOptions late = mid;
    late.kick_time = 2.0 * t_sep;
    CHECK(kind_of([&] { phase_to_fringe_scan(d, s0, t, phis, late); }) == ErrorKind::preparation);
    CHECK(kind_of([&] { latest_separated_time(4.0, 1.0); }) == ErrorKind::preparation);
  }

  SUBCASE("errors") {
    CHECK(kind_of([&] { phase_to_fringe_scan(d, s0, t, {}); }) == ErrorKind::parameter);
    CHECK(kind_of([&] { phase_to_fringe_scan(d, s0, -1.0, phis); }) == ErrorKind::parameter);
  }
}

TEST_CASE("fit_line") {
  const LineFit f = fit_line({0.0, 1.0, 2.0, 3.0}, {1.0, 3.0, 5.0, 7.0});
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.offset == doctest::Approx(1.0));
  CHECK(kind_of([] { fit_line({1.0}, {2.0}); }) == ErrorKind::insufficient_data);
}
