#pragma once
// Independent reference computations for the unit tests.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <random>

#include "optomag/core.hpp"

namespace oracle {

using Cd = std::complex<double>;

/// Drift matrix rebuilt from the complex-amplitude Langevin equations
///   m'  = -km m  - i Ga a2 - i Gb b1^dag
///   a2' = -ka a2 - i Ga m
///   b1' = -kb b1 - i Gb m^dag
/// by the change of variables X = (c + c^dag)/sqrt2, Y = (c - c^dag)/(i sqrt2).
inline Eigen::Matrix<double, 6, 6> drift_from_langevin(const optomag::SystemParams& p) {
  const Cd I(0.0, 1.0);
  // vector c = (m, m^dag, a2, a2^dag, b1, b1^dag)
  Eigen::Matrix<Cd, 6, 6> L = Eigen::Matrix<Cd, 6, 6>::Zero();
  L(0, 0) = -p.kappa_m;
  L(0, 2) = -I * p.G_a;
  L(0, 5) = -I * p.G_b;
  L(2, 2) = -p.kappa_a2;
  L(2, 0) = -I * p.G_a;
  L(4, 4) = -p.kappa_b1;
  L(4, 1) = -I * p.G_b;
  for (int r : {0, 2, 4})  // hermitian-conjugate rows
    for (int c = 0; c < 6; ++c) L(r + 1, c ^ 1) = std::conj(L(r, c));

  Eigen::Matrix<Cd, 6, 6> S = Eigen::Matrix<Cd, 6, 6>::Zero();
  const double h = 1.0 / std::sqrt(2.0);
  for (int k = 0; k < 3; ++k) {
    S(2 * k, 2 * k) = h;
    S(2 * k, 2 * k + 1) = h;
    S(2 * k + 1, 2 * k) = -I * h;
    S(2 * k + 1, 2 * k + 1) = I * h;
  }
  const Eigen::Matrix<Cd, 6, 6> A = S * L * S.inverse();
  return A.real();
}

/// Solves A X + X A^T + Q = 0 through the Kronecker form.
inline Eigen::MatrixXd lyapunov_kron(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q) {
  const Eigen::Index n = A.rows();
  const Eigen::MatrixXd Id = Eigen::MatrixXd::Identity(n, n);
  // column-major vec: vec(A X) = (I kron A) vec X, vec(X A^T) = (A kron I) vec X
  Eigen::MatrixXd Kc = Eigen::MatrixXd::Zero(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) Kc.block(i * n, i * n, n, n) += A;
      Kc.block(i * n, j * n, n, n) += A(i, j) * Id;
    }
  const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(Q.data(), n * n);
  const Eigen::VectorXd x = Kc.fullPivLu().solve(rhs);
  return Eigen::Map<const Eigen::MatrixXd>(x.data(), n, n);
}

/// Bose-Einstein occupation written out directly.
inline double bose(double omega, double T) {
  const long double x = static_cast<long double>(optomag::PhysicalConstants::hbar) * omega /
                        (static_cast<long double>(optomag::PhysicalConstants::kB) * T);
  return static_cast<double>(1.0L / (std::exp(x) - 1.0L));
}

/// Two-mode squeezed vacuum CM with squeezing r.
inline Eigen::Matrix4d tmsv(double r) {
  const double c = std::cosh(2 * r) / 2, s = std::sinh(2 * r) / 2;
  Eigen::Matrix4d v;
  v << c, 0, s, 0,
       0, c, 0, -s,
       s, 0, c, 0,
       0, -s, 0, c;
  return v;
}

inline Eigen::Matrix2d rotation(double th) {
  Eigen::Matrix2d r;
  r << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  return r;
}

/// Random two-mode symplectic matrix: local rotations and squeezers around
/// a beam splitter and a two-mode squeezer.
inline Eigen::Matrix4d random_symplectic(std::mt19937_64& g, double max_r = 1.0) {
  std::uniform_real_distribution<double> ang(0.0, 2.0 * M_PI), sq(-max_r, max_r);
  auto local = [&] {
    Eigen::Matrix4d L = Eigen::Matrix4d::Zero();
    for (int k = 0; k < 2; ++k) {
      const double r = sq(g);
      Eigen::Matrix2d s = Eigen::Vector2d(std::exp(-r), std::exp(r)).asDiagonal();
      L.block<2, 2>(2 * k, 2 * k) = rotation(ang(g)) * s * rotation(ang(g));
    }
    return L;
  };
  const double t = ang(g), r = sq(g);
  Eigen::Matrix4d bs = Eigen::Matrix4d::Zero();
  bs.block<2, 2>(0, 0) = bs.block<2, 2>(2, 2) = std::cos(t) * Eigen::Matrix2d::Identity();
  bs.block<2, 2>(0, 2) = std::sin(t) * Eigen::Matrix2d::Identity();
  bs.block<2, 2>(2, 0) = -std::sin(t) * Eigen::Matrix2d::Identity();
  Eigen::Matrix4d tms;
  const Eigen::Matrix2d z = Eigen::Vector2d(1.0, -1.0).asDiagonal();
  tms << std::cosh(r) * Eigen::Matrix2d::Identity(), std::sinh(r) * z, std::sinh(r) * z,
      std::cosh(r) * Eigen::Matrix2d::Identity();
  return local() * bs * tms * local();
}

/// Random physical two-mode CM: S diag(n1, n1, n2, n2) S^T with n >= 1/2.
inline Eigen::Matrix4d random_cm(std::mt19937_64& g, double max_r = 1.0, double max_thermal = 2.0) {
  std::uniform_real_distribution<double> th(0.0, max_thermal);
  const double n1 = 0.5 + th(g), n2 = 0.5 + th(g);
  const Eigen::Matrix4d S = random_symplectic(g, max_r);
  const Eigen::Matrix4d d = Eigen::Vector4d(n1, n1, n2, n2).asDiagonal();
  return S * d * S.transpose();
}

/// Symplectic eigenvalues of the partial transpose, from |eig(i Omega V~)|.
inline double min_pt_symplectic(const Eigen::Matrix4d& v) {
  const Eigen::Matrix4d P = Eigen::Vector4d(1, 1, 1, -1).asDiagonal();
  const Eigen::Matrix4d vt = P * v * P;
  Eigen::Matrix4d omega = Eigen::Matrix4d::Zero();
  omega(0, 1) = omega(2, 3) = 1;
  omega(1, 0) = omega(3, 2) = -1;
  Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(Eigen::Matrix4cd(Cd(0, 1) * (omega * vt).cast<Cd>()));
  double m = 1e300;
  for (int i = 0; i < 4; ++i) m = std::min(m, std::abs(es.eigenvalues()(i)));
  return m;
}

}  // namespace oracle

namespace oracle {

/// Output V4 for zero-detuning, zero-delay square filters computed in the
/// time domain. The state (u, \int u, W) starts from the stationary u and is
/// propagated over the window in `steps` exact steps; the filtered
/// quadratures are (sqrt(2k) \int u - W / sqrt(2k)) / sqrt(tau).
inline Eigen::Matrix4d filtered_v4_time_domain(const Eigen::Matrix<double, 6, 6>& A, const Eigen::Matrix<double, 6, 1>& d,
                                               double ka, double kb, double tau, int steps) {
  using M18 = Eigen::Matrix<double, 18, 18>;
  const double h = tau / steps;
  // generator with the integral stored as I / h to keep the blocks balanced
  M18 G = M18::Zero();
  G.block<6, 6>(0, 0) = A;
  G.block<6, 6>(6, 0) = Eigen::Matrix<double, 6, 6>::Identity() / h;
  M18 Q = M18::Zero();
  for (int i = 0; i < 6; ++i) {
    Q(i, i) = Q(12 + i, 12 + i) = d(i);
    Q(i, 12 + i) = Q(12 + i, i) = d(i);
  }
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(36, 36);
  C.block(0, 0, 18, 18) = -G * h;
  C.block(0, 18, 18, 18) = Q * h;
  C.block(18, 18, 18, 18) = G.transpose() * h;
  // scaling and squaring on a Taylor series, kept separate from the library
  int s = 0;
  double norm = C.cwiseAbs().rowwise().sum().maxCoeff();
  while (norm > 0.5) { norm /= 2; ++s; }
  const Eigen::MatrixXd Cs = C / std::pow(2.0, s);
  Eigen::MatrixXd E = Eigen::MatrixXd::Identity(36, 36), term = E;
  for (int k = 1; k < 30; ++k) {
    term = term * Cs / k;
    E += term;
  }
  for (int k = 0; k < s; ++k) E = E * E;
  M18 phi = E.block(18, 18, 18, 18).transpose();
  M18 qd = phi * E.block(0, 18, 18, 18);
  // undo the I / h scaling
  Eigen::Matrix<double, 18, 1> scale = Eigen::Matrix<double, 18, 1>::Ones();
  scale.segment<6>(6).setConstant(h);
  qd = scale.asDiagonal() * qd * scale.asDiagonal();
  phi = scale.asDiagonal() * phi * scale.cwiseInverse().asDiagonal();
  qd = 0.5 * (qd + qd.transpose()).eval();

  M18 cov = M18::Zero();
  cov.block<6, 6>(0, 0) = lyapunov_kron(A, Eigen::MatrixXd(d.asDiagonal()));
  for (int k = 0; k < steps; ++k) cov = phi * cov * phi.transpose() + qd;

  Eigen::Matrix<double, 4, 18> out = Eigen::Matrix<double, 4, 18>::Zero();
  const double ra = std::sqrt(2 * ka), rb = std::sqrt(2 * kb), n = 1.0 / std::sqrt(tau);
  for (int q = 0; q < 2; ++q) {
    out(q, 6 + 2 + q) = ra * n;
    out(q, 12 + 2 + q) = -n / ra;
    out(2 + q, 6 + 4 + q) = rb * n;
    out(2 + q, 12 + 4 + q) = -n / rb;
  }
  return out * cov * out.transpose();
}

}  // namespace oracle
