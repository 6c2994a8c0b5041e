#pragma once
// Stationary covariance matrix of the magnon and the two filtered output
// modes, evaluated as a frequency integral
//
//   V_out = \int dw/2pi  T~(w) (M~(w) + P) D (M~(w)^H + P) T~(w)^H,
//   M~(w) = (i w + A)^{-1},  P = diag(0, 0, 1/2k_a2, 1/2k_a2, 1/2k_b1, 1/2k_b1).

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "optomag/covmat.hpp"
#include "optomag/dynamics.hpp"
#include "optomag/errors.hpp"
#include "optomag/filters.hpp"
#include "optomag/quadrature.hpp"

namespace optomag {

struct QuadratureSettings {
  double rel_tol = 1e-8;
  double abs_tol = 1e-12;
  std::size_t max_panels = 100000;
  double window_halfwidth = 0.0;  // rad/s; 0 selects the automatic window

  void check() const {
    if (!(rel_tol > 0.0 && rel_tol <= 1e-2)) throw UsageError("quadrature rel_tol must lie in (0, 1e-2]");
    if (!(abs_tol >= 0.0)) throw UsageError("quadrature abs_tol must be >= 0");
    if (!(window_halfwidth >= 0.0)) throw UsageError("quadrature window_halfwidth must be > 0 (or 0 for auto)");
    if (max_panels < 4) throw UsageError("quadrature max_panels must be >= 4");
  }
};

struct SpectralDiagnostics {
  double integral_error = 0.0;
  std::size_t panels = 0;
  std::size_t evaluations = 0;
  double window = 0.0;  // rad/s
  double imag_residual = 0.0;
  bool converged = false;
};

struct OutputCM {
  CovMat cm;  // ordering (m, A2_out, B1_out)
  SpectralDiagnostics diagnostics;
};

class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, OutputCM best)
      : NumericalError(what), best_(std::move(best)) {}
  const OutputCM& best() const { return best_; }

 private:
  OutputCM best_;
};

/// (i w I + A)^{-1}
inline Mat6c transfer_matrix(const Mat6& a, double omega) {
  Mat6c k = a.cast<std::complex<double>>();
  k.diagonal().array() += std::complex<double>(0.0, omega);
  Eigen::PartialPivLU<Mat6c> lu(k);
  if (!(lu.rcond() > 1e-14)) throw NumericalError("transfer_matrix: i*omega + A is singular");
  return lu.inverse();
}

inline Vec6 output_projector(const SystemParams& p) {
  Vec6 d;
  d << 0.0, 0.0, 0.5 / p.kappa_a2, 0.5 / p.kappa_a2, 0.5 / p.kappa_b1, 0.5 / p.kappa_b1;
  return d;
}

/// The full integrand T~ (M~ + P) D (M~^H + P) T~^H at one frequency.
inline Mat6c output_integrand(double omega, const LinearModel& model, const FilterPair& filters) {
  const SystemParams& p = model.params;
  const Mat6c t = build_T_tilde(omega, filters.a2, filters.b1, p.kappa_a2, p.kappa_b1);
  Mat6c mp = transfer_matrix(model.drift, omega);
  mp.diagonal() += output_projector(p).cast<std::complex<double>>();
  const Mat6c l = t * mp;
  return l * model.diffusion.cast<std::complex<double>>().asDiagonal() * l.adjoint();
}

namespace detail {

// The drift couples X_m only to (Y_a2, Y_b1) and Y_m only to (X_a2, X_b1),
// so (i w + A) is block diagonal on these two index groups.
inline constexpr std::array<std::array<int, 3>, 2> kQuadratureGroups{{{0, 3, 5}, {1, 2, 4}}};

inline bool drift_is_grouped(const Mat6& a) {
  for (int g = 0; g < 2; ++g)
    for (int i : kQuadratureGroups[g])
      for (int k : kQuadratureGroups[1 - g])
        if (a(i, k) != 0.0) return false;
  return true;
}

/// K = D + D P A^T + A P D. With D and P diagonal the frequency terms of
/// M~ D M~^H + M~ D P + P D M~^H cancel identically and that sum equals
/// M~ K M~^H. The cavity diagonal of K is exactly zero.
inline Mat6 remainder_source(const LinearModel& m) {
  const Vec6 p = output_projector(m.params);
  const Vec6& d = m.diffusion;
  Mat6 k = Mat6::Zero();
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) k(i, j) = d(i) * p(i) * m.drift(j, i) + m.drift(i, j) * p(j) * d(j);
  const SystemParams& q = m.params;
  const std::array<double, 6> kappa{q.kappa_m, q.kappa_m, q.kappa_a2, q.kappa_a2, q.kappa_b1, q.kappa_b1};
  for (int i = 0; i < 6; ++i)
    k(i, i) = p(i) == 0.0 ? d(i) : d(i) * (1.0 + m.drift(i, i) / kappa[static_cast<std::size_t>(i)]);
  return k;
}

/// Precomputed per-model data for repeated integrand evaluation.
struct IntegrandKernel {
  const LinearModel* model;
  const FilterPair* filters;
  Mat6 source;
  std::array<Eigen::Matrix3d, 2> a3, k3;
  bool grouped;

  IntegrandKernel(const LinearModel& m, const FilterPair& f) : model(&m), filters(&f) {
    grouped = drift_is_grouped(m.drift);
    source = remainder_source(m);
    for (int g = 0; g < 2; ++g)
      for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) {
          a3[g](i, k) = m.drift(kQuadratureGroups[g][i], kQuadratureGroups[g][k]);
          k3[g](i, k) = source(kQuadratureGroups[g][i], kQuadratureGroups[g][k]);
        }
  }

  /// T~ M~ K M~^H T~^H, i.e. the full integrand minus its asymptote
  /// T~ P D P T~^H.
  Mat6c remainder(double omega) const {
    using Cd = std::complex<double>;
    Mat6c inner = Mat6c::Zero();
    if (grouped) {
      for (int g = 0; g < 2; ++g) {
        Eigen::Matrix3cd k = a3[g].cast<Cd>();
        k.diagonal().array() += Cd(0.0, omega);
        const Eigen::Matrix3cd m = k.inverse();
        if (!m.allFinite()) throw NumericalError("transfer_matrix: i*omega + A is singular");
        const Eigen::Matrix3cd x = m * k3[g].cast<Cd>() * m.adjoint();
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) inner(kQuadratureGroups[g][i], kQuadratureGroups[g][j]) = x(i, j);
      }
    } else {
      const Mat6c m = transfer_matrix(model->drift, omega);
      inner = m * source.cast<Cd>() * m.adjoint();
    }
    // T~ is block diagonal (identity on the magnon pair), so the sandwich
    // is done one 2x2 block pair at a time.
    const SystemParams& p = model->params;
    const std::array<Eigen::Matrix2cd, 3> t{
        Eigen::Matrix2cd::Identity(),
        std::sqrt(2.0 * p.kappa_a2) * filter_block(omega, filters->a2),
        std::sqrt(2.0 * p.kappa_b1) * filter_block(omega, filters->b1)};
    Mat6c out;
    for (int i = 0; i < 3; ++i)
      for (int k = i; k < 3; ++k) {
        const Eigen::Matrix2cd blk = t[i] * inner.block<2, 2>(2 * i, 2 * k) * t[k].adjoint();
        out.block<2, 2>(2 * i, 2 * k) = blk;
        if (k != i) out.block<2, 2>(2 * k, 2 * i) = blk.adjoint();
      }
    return out;
  }
};

inline double max_abs_real(const Mat6c& m) { return m.real().cwiseAbs().maxCoeff(); }

inline std::vector<double> seed_breakpoints(const std::vector<FilterSpec>& filters, double window) {
  constexpr int kSincSeeds = 32;
  std::vector<double> bp{-window, 0.0, window};
  for (const auto& f : filters) {
    const double step = kTwoPi / f.tau;
    for (int k = -kSincSeeds; k <= kSincSeeds; ++k) {
      const double w = f.detuning + k * step;
      if (w > -window && w < window) bp.push_back(w);
    }
  }
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
  return bp;
}

}  // namespace detail

/// Default half-width of the finite window: 40 times the largest of the
/// rates, the filter bandwidths 2pi/tau and the filter detunings.
inline double default_window(const SystemParams& p, const FilterPair& f) {
  const double rates = std::max({p.kappa_a2, p.kappa_b1, p.G_a, p.G_b, p.kappa_m,
                                 kTwoPi / f.a2.tau, kTwoPi / f.b1.tau,
                                 std::abs(f.a2.detuning), std::abs(f.b1.detuning)});
  return 40.0 * rates;
}

inline OutputCM output_cm(const LinearModel& model, const FilterPair& filters,
                          const QuadratureSettings& settings = {}) {
  settings.check();
  filters.a2.check();
  filters.b1.check();
  const auto st = is_stable(model);
  if (!st.stable) throw StabilityError("output_cm: drift matrix is unstable", st.abscissa);

  const double window = settings.window_halfwidth > 0.0 ? settings.window_halfwidth
                                                         : default_window(model.params, filters);
  const auto bp = detail::seed_breakpoints({filters.a2, filters.b1}, window);
  const quad::Settings qs{settings.rel_tol, settings.abs_tol, settings.max_panels};
  const detail::IntegrandKernel kernel(model, filters);
  auto r = quad::integrate_real_line(
      [&](double w) { return kernel.remainder(w); },
      [](const Mat6c& m) { return detail::max_abs_real(m); }, bp, window, qs);

  Mat6 v = r.value.real() / kTwoPi;
  // The P D P term integrates to N_j + 1/2 on each output quadrature. Adding
  // that value directly keeps uncoupled outputs exactly thermal.
  const SystemParams& p = model.params;
  const double na = thermal_occupation(p.omega_a2, p.T) + 0.5, nb = thermal_occupation(p.omega_b1, p.T) + 0.5;
  v.diagonal().tail<4>() += Eigen::Vector4d(na, na, nb, nb);

  OutputCM out{CovMat(v, {Mode::magnon, Mode::a2_out, Mode::b1_out}), {}};
  out.diagnostics.integral_error = r.error / kTwoPi;
  out.diagnostics.panels = r.panels;
  out.diagnostics.evaluations = r.evaluations;
  out.diagnostics.window = window;
  out.diagnostics.imag_residual = r.value.imag().cwiseAbs().maxCoeff() / kTwoPi;
  out.diagnostics.converged = r.converged;
  if (!r.converged) throw ConvergenceError("output_cm: quadrature did not reach tolerance", out);
  return out;
}

/// Unfiltered intracavity CM \int dw/2pi M~ D M~^H; equals the Lyapunov solution.
inline OutputCM intracavity_spectral_cm(const LinearModel& model, const QuadratureSettings& settings = {}) {
  settings.check();
  const auto st = is_stable(model);
  if (!st.stable) throw StabilityError("intracavity_spectral_cm: drift matrix is unstable", st.abscissa);
  const SystemParams& p = model.params;
  const double scale = std::max({p.kappa_m, p.kappa_a2, p.kappa_b1, p.G_a, p.G_b});
  const double window = settings.window_halfwidth > 0.0 ? settings.window_halfwidth : 40.0 * scale;
  const quad::Settings qs{settings.rel_tol, settings.abs_tol, settings.max_panels};
  const Vec6 sqrt_d = model.diffusion.cwiseSqrt();
  auto r = quad::integrate_real_line(
      [&](double w) {
        const Mat6c q = transfer_matrix(model.drift, w) * sqrt_d.cast<std::complex<double>>().asDiagonal();
        return Mat6c(q * q.adjoint());
      },
      [](const Mat6c& m) { return detail::max_abs_real(m); }, std::vector<double>{-window, 0.0, window}, window, qs);
  OutputCM out{CovMat(r.value.real() / kTwoPi, {Mode::magnon, Mode::a2, Mode::b1}), {}};
  out.diagnostics.integral_error = r.error / kTwoPi;
  out.diagnostics.panels = r.panels;
  out.diagnostics.evaluations = r.evaluations;
  out.diagnostics.window = window;
  out.diagnostics.imag_residual = r.value.imag().cwiseAbs().maxCoeff() / kTwoPi;
  out.diagnostics.converged = r.converged;
  if (!r.converged) throw ConvergenceError("intracavity_spectral_cm: quadrature did not reach tolerance", out);
  return out;
}

/// Mode pairs that can be extracted from the 6x6 output CM.
enum class ModePair { a2_b1, m_a2, m_b1 };

inline ModePair parse_mode_pair(const std::string& s) {
  if (s == "a2-b1" || s == "A2-B1") return ModePair::a2_b1;
  if (s == "m-a2" || s == "m-A2") return ModePair::m_a2;
  if (s == "m-b1" || s == "m-B1") return ModePair::m_b1;
  throw UsageError("unknown mode pair '" + s + "' (expected a2-b1, m-a2 or m-b1)");
}

inline std::pair<int, int> pair_indices(ModePair pair) {
  switch (pair) {
    case ModePair::a2_b1: return {1, 2};
    case ModePair::m_a2: return {0, 1};
    case ModePair::m_b1: return {0, 2};
  }
  throw UsageError("unknown mode pair");
}

/// 4x4 [V_A, V_AB; V_AB^T, V_B] for the chosen pair of a 3-mode CM.
inline CovMat extract_bipartite(const CovMat& v6, ModePair pair = ModePair::a2_b1) {
  if (v6.dim() != 6) throw DomainError("extract_bipartite: expected a 6x6 covariance matrix");
  const auto [i, k] = pair_indices(pair);
  const std::array<int, 4> idx{2 * i, 2 * i + 1, 2 * k, 2 * k + 1};
  Eigen::Matrix4d out;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) out(r, c) = v6(idx[r], idx[c]);
  return CovMat(out, {v6.modes()[i], v6.modes()[k]});
}

/// Inverse of extract_bipartite: writes v4 back into a copy of v6.
inline CovMat embed_bipartite(const CovMat& v6, const CovMat& v4, ModePair pair = ModePair::a2_b1) {
  if (v6.dim() != 6 || v4.dim() != 4) throw DomainError("embed_bipartite: expected 6x6 and 4x4 matrices");
  const auto [i, k] = pair_indices(pair);
  const std::array<int, 4> idx{2 * i, 2 * i + 1, 2 * k, 2 * k + 1};
  Eigen::MatrixXd m = v6.matrix();
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) m(idx[r], idx[c]) = v4(r, c);
  return CovMat(m, v6.modes());
}

}  // namespace optomag
