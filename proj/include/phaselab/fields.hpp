#pragma once

// Grids, fields and the elementary spectral field algebra. Everything here is
// templated on the real scalar type; the double-precision aliases at the
// bottom are what the rest of the library uses.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "phaselab/error.hpp"

namespace phaselab {

template <typename Scalar>
using RealArray = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using ComplexArray = Eigen::Array<std::complex<Scalar>, Eigen::Dynamic, 1>;

template <typename Scalar>
struct BasicPhysicalConstants {
  Scalar hbar = Scalar(1);
  Scalar mass = Scalar(1);

  void validate() const {
    if (!(hbar > 0) || !std::isfinite(hbar)) throw Error(ErrorKind::parameter, "hbar must be positive");
    if (!(mass > 0) || !std::isfinite(mass)) throw Error(ErrorKind::parameter, "mass must be positive");
  }
};

constexpr bool is_power_of_two(Eigen::Index n) { return n > 0 && (n & (n - 1)) == 0; }

/// Uniform periodic grid x_i = x_min + i*dx, i = 0..n-1. The right end point
/// x_max is the periodic image of x_min and is not stored.
template <typename Scalar>
class BasicGrid1D {
 public:
  BasicGrid1D(Eigen::Index n_points, Scalar x_min, Scalar x_max)
      : n_(n_points), x_min_(x_min), x_max_(x_max) {
    if (n_points < 8 || !is_power_of_two(n_points)) {
      throw Error(ErrorKind::parameter,
                  "n_points must be a power of two and at least 8 (got " + std::to_string(n_points) + ")");
    }
    if (!(x_max > x_min) || !std::isfinite(x_min) || !std::isfinite(x_max)) {
      throw Error(ErrorKind::parameter, "x_max must be greater than x_min");
    }
    dx_ = (x_max_ - x_min_) / Scalar(n_);
  }

  Eigen::Index size() const { return n_; }
  Scalar x_min() const { return x_min_; }
  Scalar x_max() const { return x_max_; }
  Scalar length() const { return x_max_ - x_min_; }
  Scalar dx() const { return dx_; }
  Scalar dk() const { return Scalar(2) * std::numbers::pi_v<Scalar> / length(); }
  Scalar k_nyquist() const { return std::numbers::pi_v<Scalar> / dx_; }

  Scalar x(Eigen::Index i) const { return x_min_ + Scalar(i) * dx_; }

  RealArray<Scalar> positions() const {
    return RealArray<Scalar>::LinSpaced(n_, x_min_, x_min_ + Scalar(n_ - 1) * dx_);
  }

  /// Wavenumbers in FFT order: 0, dk, ..., -(n/2)dk, ..., -dk.
  RealArray<Scalar> wavenumbers() const {
    RealArray<Scalar> k(n_);
    for (Eigen::Index i = 0; i < n_; ++i) {
      const Eigen::Index m = i < n_ / 2 ? i : i - n_;
      k(i) = Scalar(m) * dk();
    }
    return k;
  }

  /// Index of the grid point nearest to x (clamped to the grid).
  Eigen::Index nearest_index(Scalar xv) const {
    const auto i = static_cast<Eigen::Index>(std::llround((xv - x_min_) / dx_));
    return std::clamp<Eigen::Index>(i, 0, n_ - 1);
  }

  bool operator==(const BasicGrid1D& other) const {
    return n_ == other.n_ && x_min_ == other.x_min_ && x_max_ == other.x_max_;
  }

 private:
  Eigen::Index n_;
  Scalar x_min_;
  Scalar x_max_;
  Scalar dx_;
};

template <typename Scalar>
struct BasicComplexField {
  BasicGrid1D<Scalar> grid;
  ComplexArray<Scalar> values;

  BasicComplexField(const BasicGrid1D<Scalar>& g, ComplexArray<Scalar> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.size()) throw Error(ErrorKind::dimension, "field length does not match grid");
  }
  explicit BasicComplexField(const BasicGrid1D<Scalar>& g) : grid(g), values(ComplexArray<Scalar>::Zero(g.size())) {}

  Eigen::Index size() const { return values.size(); }
};

/// Madelung pair: psi = R exp(i S / hbar) with R >= 0.
template <typename Scalar>
struct BasicHydroFields {
  BasicGrid1D<Scalar> grid;
  RealArray<Scalar> R;
  RealArray<Scalar> S;

  BasicHydroFields(const BasicGrid1D<Scalar>& g, RealArray<Scalar> amplitude, RealArray<Scalar> action)
      : grid(g), R(std::move(amplitude)), S(std::move(action)) {
    if (R.size() != grid.size() || S.size() != grid.size()) {
      throw Error(ErrorKind::dimension, "hydro field length does not match grid");
    }
    if ((R < Scalar(0)).any()) throw Error(ErrorKind::parameter, "amplitude R must be non-negative");
  }

  /// Material phase read-out Phi = -S/hbar.
  RealArray<Scalar> material_phase(const BasicPhysicalConstants<Scalar>& c) const { return -S / c.hbar; }
};

template <typename Scalar>
Scalar norm_squared(const BasicComplexField<Scalar>& psi) {
  return psi.values.abs2().sum() * psi.grid.dx();
}

/// Normalized Gaussian psi ~ exp(-(x-x0)^2 / (4 sigma0^2)) exp(i k0 x); sigma0 is
/// the standard deviation of |psi|^2.
template <typename Scalar>
BasicComplexField<Scalar> make_gaussian(const BasicGrid1D<Scalar>& grid, Scalar x0, Scalar sigma0, Scalar k0) {
  if (!(sigma0 > 0)) throw Error(ErrorKind::parameter, "sigma0 must be positive");
  if (sigma0 < Scalar(2) * grid.dx()) {
    throw Error(ErrorKind::resolution, "sigma0 is below two grid spacings");
  }
  if (!(std::abs(k0) < grid.k_nyquist())) {
    throw Error(ErrorKind::aliasing, "|k0| must stay below the Nyquist wavenumber pi/dx");
  }
  const RealArray<Scalar> x = grid.positions();
  const RealArray<Scalar> u = x - x0;
  const RealArray<Scalar> envelope = (-u.square() / (Scalar(4) * sigma0 * sigma0)).exp();
  BasicComplexField<Scalar> psi(grid);
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    psi.values(i) = std::polar(envelope(i), k0 * x(i));
  }
  psi.values /= std::sqrt(norm_squared(psi));
  return psi;
}

/// FFT-backed spectral differentiation on a periodic grid. Holds a transform
/// plan, so one instance must not be shared between threads.
template <typename Scalar>
class BasicSpectral {
 public:
  explicit BasicSpectral(const BasicGrid1D<Scalar>& grid) : grid_(grid), k_(grid.wavenumbers()) {
    // The Nyquist mode has no well-defined odd derivative for real data.
    k_odd_ = k_;
    k_odd_(grid.size() / 2) = Scalar(0);
  }

  const BasicGrid1D<Scalar>& grid() const { return grid_; }
  const RealArray<Scalar>& wavenumbers() const { return k_; }

  ComplexArray<Scalar> forward(const ComplexArray<Scalar>& f) {
    Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1> in = f.matrix(), out;
    fft_.fwd(out, in);
    return out.array();
  }

  ComplexArray<Scalar> inverse(const ComplexArray<Scalar>& fk) {
    Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1> in = fk.matrix(), out;
    fft_.inv(out, in);
    return out.array();
  }

  /// d^order f / dx^order for a complex periodic field.
  ComplexArray<Scalar> derivative(const ComplexArray<Scalar>& f, int order) {
    check(f.size());
    ComplexArray<Scalar> fk = forward(f);
    const RealArray<Scalar>& k = (order % 2 == 1) ? k_odd_ : k_;
    for (Eigen::Index i = 0; i < fk.size(); ++i) {
      const std::complex<Scalar> ik(0, k(i));
      for (int p = 0; p < order; ++p) fk(i) *= ik;
    }
    return inverse(fk);
  }

  RealArray<Scalar> derivative(const RealArray<Scalar>& f, int order) {
    return derivative(ComplexArray<Scalar>(f.template cast<std::complex<Scalar>>()), order).real();
  }

 private:
  void check(Eigen::Index n) const {
    if (n != grid_.size()) throw Error(ErrorKind::dimension, "field length does not match grid");
  }

  BasicGrid1D<Scalar> grid_;
  RealArray<Scalar> k_;
  RealArray<Scalar> k_odd_;
  Eigen::FFT<Scalar> fft_;
};

template <typename Scalar>
RealArray<Scalar> gradient(const RealArray<Scalar>& field, const BasicGrid1D<Scalar>& grid) {
  if (field.size() != grid.size()) throw Error(ErrorKind::dimension, "field length does not match grid");
  return BasicSpectral<Scalar>(grid).derivative(field, 1);
}

template <typename Scalar>
RealArray<Scalar> laplacian(const RealArray<Scalar>& field, const BasicGrid1D<Scalar>& grid) {
  if (field.size() != grid.size()) throw Error(ErrorKind::dimension, "field length does not match grid");
  return BasicSpectral<Scalar>(grid).derivative(field, 2);
}

using PhysicalConstants = BasicPhysicalConstants<double>;
using Grid1D = BasicGrid1D<double>;
using ComplexField = BasicComplexField<double>;
using HydroFields = BasicHydroFields<double>;
using Spectral = BasicSpectral<double>;
using RealArrayXd = RealArray<double>;
using ComplexArrayXd = ComplexArray<double>;

}  // namespace phaselab
