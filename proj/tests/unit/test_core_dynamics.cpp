#include <gtest/gtest.h>

#include <random>

#include "optomag/core.hpp"
#include "optomag/dynamics.hpp"
#include "support.hpp"

using namespace optomag;

TEST(Core, ThermalOccupationMatchesBoseEinstein) {
  const double w = angular(6.8e9);
  EXPECT_NEAR(thermal_occupation(w, 0.1), oracle::bose(w, 0.1), 1e-15);
  EXPECT_NEAR(thermal_occupation(w, 0.1), 0.0398, 5e-5);
  EXPECT_NEAR(thermal_occupation(w, 300.0), oracle::bose(w, 300.0), 1e-9);
  EXPECT_EQ(thermal_occupation(w, 0.0), 0.0);
  // classical limit kT / hbar w - 1/2
  const double T = 5000.0;
  const double cl = PhysicalConstants::kB * T / (PhysicalConstants::hbar * w) - 0.5;
  EXPECT_NEAR(thermal_occupation(w, T) / cl, 1.0, 1e-6);
  // optical modes stay empty at room temperature
  EXPECT_LT(thermal_occupation(angular(193e12), 300.0), 1e-13);
}

TEST(Core, ThermalOccupationRejectsBadInput) {
  EXPECT_THROW(thermal_occupation(-1.0, 1.0), DomainError);
  EXPECT_THROW(thermal_occupation(1.0, -1.0), DomainError);
  EXPECT_THROW(thermal_occupation(0.0, 1.0), DomainError);
}

TEST(Core, PumpConversionRoundTrip) {
  PumpSpec p{0.01, angular(193.1e12), angular(10.0), angular(100e6)};
  const double G = pump_to_coupling(p);
  // alpha = sqrt(2 P kappa / hbar w) / kappa, written out
  const double alpha = std::sqrt(2 * p.power * p.kappa_drive / (PhysicalConstants::hbar * p.omega_p)) / p.kappa_drive;
  EXPECT_NEAR(G, p.g * alpha, 1e-9 * G);
  EXPECT_NEAR(power_for_amplitude(alpha, p.omega_p, p.kappa_drive), p.power, 1e-15);
  EXPECT_EQ(pump_to_coupling({0.0, p.omega_p, p.g, p.kappa_drive}), 0.0);
  EXPECT_THROW(pump_to_coupling({-1.0, p.omega_p, p.g, p.kappa_drive}), DomainError);
}

TEST(Core, BaselineIsValidAndDerivedFrequencies) {
  const auto p = SystemParams::baseline();
  EXPECT_TRUE(validate(p).empty());
  EXPECT_DOUBLE_EQ(p.omega_a1(), p.omega_a2 - p.omega_m);
  EXPECT_DOUBLE_EQ(p.omega_b2(), p.omega_b1 + p.omega_m);
  EXPECT_NEAR(cyclic(p.G_b), 6.5e6, 1e-6);
}

TEST(Core, ValidateFlagsEachField) {
  auto p = SystemParams::baseline();
  p.kappa_m = -1;
  auto v = validate(p);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].field, "kappa_m");
  EXPECT_TRUE(has_errors(v));

  p = SystemParams::baseline();
  p.G_a = p.G_b = 0.0;
  p.T = 0.0;
  EXPECT_TRUE(validate(p).empty());

  p.omega_b1 = 2 * p.omega_m;
  v = validate(p);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].severity, Violation::Severity::warning);
  EXPECT_FALSE(has_errors(v));

  p = SystemParams::baseline();
  p.T = std::nan("");
  EXPECT_TRUE(has_errors(validate(p)));
}

TEST(Dynamics, DriftMatchesLangevinEquations) {
  std::mt19937_64 g(11);
  std::uniform_real_distribution<double> u(0.0, 2e8);
  for (int i = 0; i < 10; ++i) {
    auto p = SystemParams::baseline();
    p.kappa_m = 1 + u(g) / 10;
    p.kappa_a2 = 1 + u(g);
    p.kappa_b1 = 1 + u(g);
    p.G_a = u(g) / 5;
    p.G_b = u(g) / 5;
    const Mat6 ref = oracle::drift_from_langevin(p);
    EXPECT_LT((build_drift(p) - ref).cwiseAbs().maxCoeff(), 1e-6) << "draw " << i;
  }
}

TEST(Dynamics, DiffusionUsesModeOccupations) {
  auto p = SystemParams::baseline();
  p.T = 2.0;
  const auto d = build_diffusion(p);
  const double nm = oracle::bose(p.omega_m, p.T);
  EXPECT_NEAR(d(0), p.kappa_m * (2 * nm + 1), 1e-6);
  EXPECT_EQ(d(0), d(1));
  EXPECT_NEAR(d(2), p.kappa_a2, 1e-6);
  EXPECT_NEAR(d(5), p.kappa_b1, 1e-6);
}

TEST(Dynamics, MakeModelRejectsInvalid) {
  auto p = SystemParams::baseline();
  p.kappa_a2 = 0;
  EXPECT_THROW(make_model(p), UsageError);
}

TEST(Dynamics, StabilityThresholdWithoutStateSwap) {
  auto p = SystemParams::baseline();
  p.G_a = 0.0;
  const double thr = std::sqrt(p.kappa_m * p.kappa_b1);
  p.G_b = 0.99 * thr;
  EXPECT_TRUE(is_stable(make_model(p)).stable);
  p.G_b = 1.01 * thr;
  const auto rep = is_stable(make_model(p));
  EXPECT_FALSE(rep.stable);
  EXPECT_GT(rep.abscissa, 0.0);
}

TEST(Dynamics, MarginalFlagNearThreshold) {
  auto p = SystemParams::baseline();
  p.G_a = 0.0;
  const double thr = std::sqrt(p.kappa_m * p.kappa_b1);
  // abscissa = -(km + kb)/2 + sqrt((kb - km)^2/4 + G^2); pick G so it sits just below 0
  const double half = 0.5 * (p.kappa_m + p.kappa_b1), diff = 0.5 * (p.kappa_b1 - p.kappa_m);
  const double target = -1e-8 * p.kappa_m;
  p.G_b = std::sqrt((half + target) * (half + target) - diff * diff);
  EXPECT_LT(p.G_b, thr);
  const auto rep = is_stable(make_model(p));
  EXPECT_TRUE(rep.stable);
  EXPECT_TRUE(rep.marginal);
  EXPECT_NEAR(rep.abscissa, target, 1e-3 * std::abs(target) + 1e-6);
}

TEST(Dynamics, LyapunovMatchesKroneckerSolve) {
  std::mt19937_64 g(5);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int dim = 2 + trial % 5;
    Eigen::MatrixXd A(dim, dim);
    for (int i = 0; i < dim * dim; ++i) A.data()[i] = n(g);
    // shift into the stable half plane
    const double shift = is_stable(A).abscissa + 0.5;
    A -= shift * Eigen::MatrixXd::Identity(dim, dim);
    Eigen::MatrixXd B(dim, dim);
    for (int i = 0; i < dim * dim; ++i) B.data()[i] = n(g);
    const Eigen::MatrixXd Q = B * B.transpose();
    const Eigen::MatrixXd X = solve_lyapunov(A, Q);
    const Eigen::MatrixXd ref = oracle::lyapunov_kron(A, Q);
    EXPECT_LT((X - ref).cwiseAbs().maxCoeff(), 1e-9 * ref.cwiseAbs().maxCoeff()) << "trial " << trial;
    EXPECT_LT((A * X + X * A.transpose() + Q).norm(), 1e-10 * Q.norm());
  }
}

TEST(Dynamics, LyapunovUncoupledIsThermal) {
  auto p = SystemParams::baseline();
  p.G_a = p.G_b = 0.0;
  p.T = 0.5;
  const auto v = solve_lyapunov(make_model(p));
  const double nm = oracle::bose(p.omega_m, p.T);
  EXPECT_NEAR(v(0, 0), nm + 0.5, 1e-12);
  EXPECT_NEAR(v(2, 2), 0.5, 1e-12);
  EXPECT_NEAR(v(0, 2), 0.0, 1e-15);
  EXPECT_EQ(v.modes()[0], Mode::magnon);
}

TEST(Dynamics, LyapunovRejectsUnstable) {
  auto p = SystemParams::baseline();
  p.G_a = 0.0;
  p.G_b = angular(11e6);
  EXPECT_THROW(solve_lyapunov(make_model(p)), StabilityError);
}
