#pragma once
// Gaussian-state measures in the vacuum-variance-1/2 convention.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "optomag/covmat.hpp"
#include "optomag/errors.hpp"

namespace optomag {

/// Block-diagonal [[0, 1], [-1, 0]] on n modes.
inline Eigen::MatrixXd symplectic_form(int n_modes) {
  Eigen::MatrixXd om = Eigen::MatrixXd::Zero(2 * n_modes, 2 * n_modes);
  for (int i = 0; i < n_modes; ++i) {
    om(2 * i, 2 * i + 1) = 1.0;
    om(2 * i + 1, 2 * i) = -1.0;
  }
  return om;
}

/// Ascending symplectic spectrum. Uses the Hermitian matrix i L^T Omega L,
/// V = L L^T, whose eigenvalues are +/- the symplectic eigenvalues.
inline std::vector<double> symplectic_eigenvalues(const Eigen::MatrixXd& v) {
  if (v.rows() != v.cols() || v.rows() % 2 != 0)
    throw DomainError("symplectic_eigenvalues: matrix must be square with even dimension");
  Eigen::LLT<Eigen::MatrixXd> llt(v);
  if (llt.info() != Eigen::Success) throw DomainError("symplectic_eigenvalues: matrix is not positive definite");
  const int n = static_cast<int>(v.rows() / 2);
  const Eigen::MatrixXd l = llt.matrixL();
  const Eigen::MatrixXcd h = std::complex<double>(0.0, 1.0) * (l.transpose() * symplectic_form(n) * l).cast<std::complex<double>>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("symplectic_eigenvalues: eigen solver failed");
  // eigenvalues come sorted ascending as -nu_max..-nu_min, nu_min..nu_max
  std::vector<double> nu(n);
  for (int i = 0; i < n; ++i) nu[i] = es.eigenvalues()[n + i];
  return nu;
}

inline std::vector<double> symplectic_eigenvalues(const CovMat& v) { return symplectic_eigenvalues(v.matrix()); }

/// Smallest symplectic eigenvalue of the partially transposed two-mode CM,
/// eta^- = 2^{-1/2} {Sigma - [Sigma^2 - 4 det V]^{1/2}}^{1/2},
/// Sigma = det V_A + det V_B - 2 det V_AB.
inline double eta_minus(const Eigen::Matrix4d& v) {
  const double sigma = v.block<2, 2>(0, 0).determinant() + v.block<2, 2>(2, 2).determinant() -
                       2.0 * v.block<2, 2>(0, 2).determinant();
  double disc = sigma * sigma - 4.0 * v.determinant();
  if (disc < 0.0) {
    if (disc < -1e-12 * std::max(1.0, sigma * sigma))
      throw DomainError("log_negativity: covariance matrix is unphysical (Sigma^2 < 4 det V)");
    disc = 0.0;
  }
  const double inner = sigma - std::sqrt(disc);
  if (inner < 0.0) throw DomainError("log_negativity: covariance matrix is unphysical");
  return std::sqrt(inner) / std::sqrt(2.0);
}

/// E_N = max(0, -ln 2 eta^-). States with det V_AB >= 0 are separable
/// (Simon's criterion) and return exactly 0, which the closed form only
/// reproduces up to roundoff.
inline double log_negativity(const Eigen::Matrix4d& v) {
  const double eta = eta_minus(v);
  if (v.block<2, 2>(0, 2).determinant() >= 0.0) return 0.0;
  return std::max(0.0, -std::log(2.0 * eta));
}

inline double log_negativity(const CovMat& v) {
  if (v.dim() != 4) throw DomainError("log_negativity: expected a two-mode (4x4) covariance matrix");
  return log_negativity(Eigen::Matrix4d(v.matrix()));
}

struct Physicality {
  bool physical = false;
  double margin = 0.0;  // min eigenvalue of V + (i/2) Omega
};

inline constexpr double kPhysicalityTolerance = 1e-9;

/// Uncertainty principle V + (i/2) Omega >= 0, up to `tol`.
inline Physicality physicality(const Eigen::MatrixXd& v, double tol = kPhysicalityTolerance) {
  if (v.rows() != v.cols() || v.rows() % 2 != 0)
    throw DomainError("physicality: matrix must be square with even dimension");
  const int n = static_cast<int>(v.rows() / 2);
  const Eigen::MatrixXcd h = v.cast<std::complex<double>>() +
                             std::complex<double>(0.0, 0.5) * symplectic_form(n).cast<std::complex<double>>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  const double margin = es.eigenvalues().minCoeff();
  return {margin >= -tol, margin};
}

inline Physicality physicality(const CovMat& v, double tol = kPhysicalityTolerance) {
  return physicality(v.matrix(), tol);
}

}  // namespace optomag
