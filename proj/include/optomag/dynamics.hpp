#pragma once
// Linearized quadrature dynamics du/dt = A u + noise, ordering
// (X_m, Y_m, X_a2, Y_a2, X_b1, Y_b1).

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <complex>
#include <limits>

#include "optomag/core.hpp"
#include "optomag/covmat.hpp"
#include "optomag/errors.hpp"

namespace optomag {

struct LinearModel {
  Mat6 drift = Mat6::Zero();
  Vec6 diffusion = Vec6::Zero();  // diagonal of D
  SystemParams params;

  Mat6 diffusion_matrix() const { return diffusion.asDiagonal(); }
};

inline Mat6 build_drift(const SystemParams& p) {
  Mat6 a = Mat6::Zero();
  a(0, 0) = a(1, 1) = -p.kappa_m;
  a(2, 2) = a(3, 3) = -p.kappa_a2;
  a(4, 4) = a(5, 5) = -p.kappa_b1;
  // state swap a2 <-> m
  a(0, 3) = p.G_a;
  a(1, 2) = -p.G_a;
  a(2, 1) = p.G_a;
  a(3, 0) = -p.G_a;
  // two-mode squeezing b1 <-> m
  a(0, 5) = -p.G_b;
  a(1, 4) = -p.G_b;
  a(4, 1) = -p.G_b;
  a(5, 0) = -p.G_b;
  return a;
}

/// Diagonal of D: kappa_j (2 N_j + 1) per quadrature, with N_j the thermal
/// occupation at the mode's own frequency.
inline Vec6 build_diffusion(const SystemParams& p) {
  const double nm = thermal_occupation(p.omega_m, p.T);
  const double na = thermal_occupation(p.omega_a2, p.T);
  const double nb = thermal_occupation(p.omega_b1, p.T);
  Vec6 d;
  d << p.kappa_m * (2 * nm + 1), p.kappa_m * (2 * nm + 1), p.kappa_a2 * (2 * na + 1),
      p.kappa_a2 * (2 * na + 1), p.kappa_b1 * (2 * nb + 1), p.kappa_b1 * (2 * nb + 1);
  return d;
}

inline LinearModel make_model(const SystemParams& p) {
  if (has_errors(validate(p))) throw UsageError("make_model: invalid system parameters");
  return LinearModel{build_drift(p), build_diffusion(p), p};
}

struct StabilityReport {
  bool stable = false;
  bool marginal = false;  // abscissa in (-1e-6 kappa_m, 0)
  double abscissa = 0.0;  // max real part of the eigenvalues, rad/s
  Eigen::VectorXcd eigenvalues;
};

/// Relative width of the "marginal" band below the stability edge, in units
/// of kappa_m.
inline constexpr double kMarginalFraction = 1e-6;

inline StabilityReport is_stable(const Eigen::MatrixXd& a, double kappa_scale = 0.0) {
  if (a.rows() != a.cols()) throw DomainError("is_stable: matrix must be square");
  Eigen::EigenSolver<Eigen::MatrixXd> es(a, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) throw NumericalError("is_stable: eigenvalue iteration failed");
  StabilityReport r;
  r.eigenvalues = es.eigenvalues();
  r.abscissa = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < r.eigenvalues.size(); ++i)
    r.abscissa = std::max(r.abscissa, r.eigenvalues[i].real());
  r.stable = r.abscissa < 0.0;
  r.marginal = r.stable && kappa_scale > 0.0 && r.abscissa > -kMarginalFraction * kappa_scale;
  return r;
}

inline StabilityReport is_stable(const LinearModel& m) {
  return is_stable(Eigen::MatrixXd(m.drift), m.params.kappa_m);
}

/// Solves A X + X A^T + Q = 0 by Bartels-Stewart on the complex Schur form
/// A = U S U^H: the transformed equation S Y + Y S^H = -U^H Q U is
/// triangular and is solved entry by entry from the bottom-right corner.
inline Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& a, const Eigen::MatrixXd& q) {
  using Cd = std::complex<double>;
  const Eigen::Index n = a.rows();
  Eigen::ComplexSchur<Eigen::MatrixXd> schur(a);
  if (schur.info() != Eigen::Success) throw NumericalError("solve_lyapunov: Schur decomposition failed");
  const Eigen::MatrixXcd& u = schur.matrixU();
  const Eigen::MatrixXcd& s = schur.matrixT();
  const Eigen::MatrixXcd c = -(u.adjoint() * q.cast<Cd>() * u);

  Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    for (Eigen::Index j = n - 1; j >= 0; --j) {
      Cd acc = c(i, j);
      for (Eigen::Index k = i + 1; k < n; ++k) acc -= s(i, k) * y(k, j);
      for (Eigen::Index k = j + 1; k < n; ++k) acc -= y(i, k) * std::conj(s(j, k));
      const Cd denom = s(i, i) + std::conj(s(j, j));
      if (std::abs(denom) == 0.0) throw NumericalError("solve_lyapunov: singular Sylvester operator");
      y(i, j) = acc / denom;
    }
  }
  const Eigen::MatrixXd x = (u * y * u.adjoint()).real();
  return 0.5 * (x + x.transpose());
}

/// Stationary intracavity covariance matrix: A V + V A^T + D = 0.
inline CovMat solve_lyapunov(const LinearModel& m) {
  const auto st = is_stable(m);
  if (!st.stable) throw StabilityError("solve_lyapunov: drift matrix is unstable", st.abscissa);
  const Eigen::MatrixXd v = solve_lyapunov(Eigen::MatrixXd(m.drift), Eigen::MatrixXd(m.diffusion_matrix()));
  return CovMat(v, {Mode::magnon, Mode::a2, Mode::b1});
}

}  // namespace optomag
