#pragma once
// Square output filters F(t) = [h(t) - h(t - tau)] / sqrt(tau) * exp(-i Omega t)
// and their Fourier transforms, convention f~(w) = \int dt e^{+i w t} f(t)
// with inverse measure dw / 2pi.

#include <cmath>
#include <complex>
#include <string>

#include "optomag/core.hpp"
#include "optomag/covmat.hpp"
#include "optomag/errors.hpp"

namespace optomag {

enum class FilterShape { square };

inline FilterShape parse_filter_shape(const std::string& s) {
  if (s == "square") return FilterShape::square;
  throw UsageError("unsupported filter shape '" + s + "' (only \"square\" is implemented)");
}

struct FilterSpec {
  double detuning = 0.0;  // center relative to the sideband, rad/s
  double tau = 1e-6;      // duration, s
  double delay = 0.0;     // window start, s; V4 is invariant under a common delay
  FilterShape shape = FilterShape::square;

  void check() const {
    if (!(tau > 0.0) || !std::isfinite(tau)) throw DomainError("FilterSpec: tau must be > 0");
    if (!std::isfinite(detuning) || !std::isfinite(delay))
      throw DomainError("FilterSpec: detuning and delay must be finite");
  }
};

/// Filters applied to the a2 and b1 output fields.
struct FilterPair {
  FilterSpec a2;
  FilterSpec b1;
};

/// How a nominal duration maps to the window length. `cyclic` treats the
/// nominal value as a time measured against cyclic rates (kappa/2pi), so the
/// window actually used is tau / 2pi.
enum class TauConvention { si, cyclic };

inline TauConvention parse_tau_convention(const std::string& s) {
  if (s == "si") return TauConvention::si;
  if (s == "cyclic") return TauConvention::cyclic;
  throw UsageError("unknown filter_tau_convention '" + s + "' (expected si or cyclic)");
}

inline const char* tau_convention_name(TauConvention c) { return c == TauConvention::si ? "si" : "cyclic"; }

inline FilterPair effective_filters(FilterPair f, TauConvention c) {
  if (c == TauConvention::cyclic) {
    f.a2.tau /= kTwoPi;
    f.b1.tau /= kTwoPi;
  }
  return f;
}

inline std::complex<double> filter_time(double t, const FilterSpec& f) {
  const double s = t - f.delay;
  if (s < 0.0 || s >= f.tau) return 0.0;
  return std::polar(1.0 / std::sqrt(f.tau), -f.detuning * s);
}

namespace detail {
inline double sinc(double x) {
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sin(x) / x;
}
}  // namespace detail

/// F~(w) = (e^{i(w-Omega)tau} - 1) / (i (w-Omega) sqrt(tau)), written as
/// sqrt(tau) e^{i x/2} sinc(x/2) with x = (w - Omega) tau so the point
/// w = Omega needs no special case.
inline std::complex<double> filter_freq(double omega, const FilterSpec& f) {
  const double x = (omega - f.detuning) * f.tau;
  return std::sqrt(f.tau) * detail::sinc(0.5 * x) * std::polar(1.0, 0.5 * x + omega * f.delay);
}

/// Fourier transform of the real 2x2 quadrature kernel
/// [[Re F, -Im F], [Im F, Re F]], unscaled.
inline Eigen::Matrix2cd filter_block(double omega, const FilterSpec& f) {
  using Cd = std::complex<double>;
  const Cd fp = filter_freq(omega, f);
  const Cd fm = std::conj(filter_freq(-omega, f));
  const Cd re = 0.5 * (fp + fm);
  const Cd im = (fp - fm) / Cd(0.0, 2.0);
  Eigen::Matrix2cd b;
  b << re, -im, im, re;
  return b;
}

/// Block-diagonal transformation I_2 (+) sqrt(2 kappa_a2) T2~ (+) sqrt(2 kappa_b1) T1~.
inline Mat6c build_T_tilde(double omega, const FilterSpec& fa, const FilterSpec& fb,
                           double kappa_a2, double kappa_b1) {
  Mat6c t = Mat6c::Zero();
  t(0, 0) = t(1, 1) = 1.0;
  t.block<2, 2>(2, 2) = std::sqrt(2.0 * kappa_a2) * filter_block(omega, fa);
  t.block<2, 2>(4, 4) = std::sqrt(2.0 * kappa_b1) * filter_block(omega, fb);
  return t;
}

}  // namespace optomag
