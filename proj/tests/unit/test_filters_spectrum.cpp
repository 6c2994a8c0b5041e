#include <gtest/gtest.h>

#include <random>

#include "optomag/dynamics.hpp"
#include "optomag/entanglement.hpp"
#include "optomag/filters.hpp"
#include "optomag/spectrum.hpp"
#include "support.hpp"

using namespace optomag;

namespace {

// F~(w) by direct trapezoid quadrature of the time-domain filter.
std::complex<double> numeric_ft(double w, const FilterSpec& f, int n = 20000) {
  std::complex<double> acc = 0.0;
  const double h = f.tau / n;
  for (int k = 0; k <= n; ++k) {
    const double t = f.delay + k * h;
    const std::complex<double> ft = std::polar(1.0 / std::sqrt(f.tau), -f.detuning * (t - f.delay));
    acc += (k == 0 || k == n ? 0.5 : 1.0) * ft * std::polar(1.0, w * t);
  }
  return acc * h;
}

}  // namespace

TEST(Filters, TimeDomainWindow) {
  FilterSpec f;
  f.tau = 2e-6;
  f.delay = 1e-6;
  f.detuning = 3e6;
  EXPECT_EQ(filter_time(0.5e-6, f), std::complex<double>(0.0));
  EXPECT_EQ(filter_time(3e-6, f), std::complex<double>(0.0));
  EXPECT_NEAR(std::abs(filter_time(2e-6, f)), 1 / std::sqrt(f.tau), 1e-9);
}

TEST(Filters, FrequencyResponseMatchesNumericTransform) {
  FilterSpec f;
  f.tau = 1e-6;
  for (double det : {0.0, 2e6, -7e6})
    for (double delay : {0.0, 3e-7}) {
      f.detuning = det;
      f.delay = delay;
      for (double w : {-4e7, -1e6, 0.0, 3.3e6, 2.5e7}) {
        const auto a = filter_freq(w, f), b = numeric_ft(w, f);
        EXPECT_LT(std::abs(a - b), 1e-6 * std::sqrt(f.tau)) << det << " " << delay << " " << w;
      }
    }
}

TEST(Filters, PeakAndZeros) {
  FilterSpec f;
  f.tau = 1e-6;
  f.detuning = 1e6;
  EXPECT_NEAR(std::abs(filter_freq(f.detuning, f)), std::sqrt(f.tau), 1e-15);
  EXPECT_LT(std::abs(filter_freq(f.detuning + kTwoPi / f.tau, f)), 1e-15);
}

TEST(Filters, UnitNormInFrequency) {
  FilterSpec f;
  f.tau = 1e-6;
  // \int |F~|^2 dw / 2pi = 1; the sinc^2 tail beyond W contributes ~ 2 / (pi W tau)
  const double W = 4000.0 * kTwoPi / f.tau;
  const int n = 4'000'000;
  double acc = 0.0;
  for (int k = 0; k < n; ++k) {
    const double w = -W + (k + 0.5) * 2 * W / n;
    acc += std::norm(filter_freq(w, f));
  }
  acc *= 2 * W / n / kTwoPi;
  EXPECT_NEAR(acc, 1.0, 2e-4);
}

TEST(Filters, BadSpecs) {
  FilterSpec f;
  f.tau = 0.0;
  EXPECT_THROW(f.check(), DomainError);
  EXPECT_THROW(parse_filter_shape("gaussian"), UsageError);
  EXPECT_EQ(parse_filter_shape("square"), FilterShape::square);
  EXPECT_THROW(parse_tau_convention("hz"), UsageError);
}

TEST(Filters, CyclicConventionDividesTau) {
  FilterPair f;
  f.a2.tau = 1e-6;
  f.b1.tau = 1e-5;
  const auto e = effective_filters(f, TauConvention::cyclic);
  EXPECT_DOUBLE_EQ(e.a2.tau, 1e-6 / kTwoPi);
  EXPECT_DOUBLE_EQ(e.b1.tau, 1e-5 / kTwoPi);
  EXPECT_DOUBLE_EQ(effective_filters(f, TauConvention::si).b1.tau, 1e-5);
}

TEST(Spectrum, UncoupledOutputIsVacuum) {
  auto p = SystemParams::baseline();
  p.G_a = p.G_b = 0.0;
  const auto out = output_cm(make_model(p), FilterPair{});
  Eigen::VectorXd expect(6);
  const double nm = oracle::bose(p.omega_m, p.T);
  expect << nm + 0.5, nm + 0.5, 0.5, 0.5, 0.5, 0.5;
  EXPECT_LT((out.cm.matrix() - Eigen::MatrixXd(expect.asDiagonal())).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Spectrum, MatchesTimeDomainOracle) {
  for (double gb : {0.0, 3e6, 6.5e6, 9e6}) {
    auto p = SystemParams::baseline();
    p.G_b = angular(gb);
    const auto model = make_model(p);
    FilterPair f;
    f.a2.tau = f.b1.tau = 0.3e-6;
    const Eigen::Matrix4d ref = oracle::filtered_v4_time_domain(model.drift, model.diffusion, p.kappa_a2, p.kappa_b1,
                                                                f.a2.tau, 3000);
    const Eigen::Matrix4d v4 = extract_bipartite(output_cm(model, f).cm).matrix();
    EXPECT_LT((v4 - ref).cwiseAbs().maxCoeff(), 1e-7) << "G_b " << gb << "\n" << v4 << "\n\n" << ref;
  }
}

TEST(Spectrum, IntracavityMatchesLyapunov) {
  std::mt19937_64 g(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 5; ++i) {
    auto p = SystemParams::baseline();
    p.kappa_m = angular(0.2e6 + 2e6 * u(g));
    p.G_a = angular(15e6 * u(g));
    p.G_b = angular(8e6 * u(g));
    p.T = 5 * u(g);
    const auto model = make_model(p);
    if (!is_stable(model).stable) continue;
    const Eigen::MatrixXd ref = solve_lyapunov(model).matrix();
    const Eigen::MatrixXd spec = intracavity_spectral_cm(model).cm.matrix();
    for (int r = 0; r < 6; ++r)
      for (int c = 0; c < 6; ++c)
        EXPECT_NEAR(spec(r, c), ref(r, c), 1e-8 * std::max(1.0, std::abs(ref(r, c))));
  }
}

TEST(Spectrum, IntegrandAgreesWithReferenceExpression) {
  const auto p = SystemParams::baseline();
  const auto model = make_model(p);
  FilterPair f;
  f.a2.detuning = angular(0.3e6);
  const detail::IntegrandKernel k(model, f);
  const Vec6 proj = output_projector(p);
  for (double w : {-3e8, -1e7, 0.0, 2.2e6, 5e8}) {
    // the kernel drops the exactly integrable P D P term
    const Mat6c t = build_T_tilde(w, f.a2, f.b1, p.kappa_a2, p.kappa_b1);
    const Mat6c pdp = t * (proj.cwiseProduct(model.diffusion).cwiseProduct(proj)).cast<std::complex<double>>().asDiagonal() * t.adjoint();
    const Mat6c full = output_integrand(w, model, f);
    EXPECT_LT((k.remainder(w) + pdp - full).cwiseAbs().maxCoeff(), 1e-12 * full.cwiseAbs().maxCoeff()) << w;
  }
}

TEST(Spectrum, CommonDelayLeavesV4Unchanged) {
  const auto model = make_model(SystemParams::baseline());
  FilterPair f, g;
  g.a2.delay = g.b1.delay = 0.37e-6;
  const auto a = extract_bipartite(output_cm(model, f).cm).matrix();
  const auto b = extract_bipartite(output_cm(model, g).cm).matrix();
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-7);
}

TEST(Spectrum, FarDetunedFiltersSeeVacuum) {
  const auto model = make_model(SystemParams::baseline());
  FilterPair f;
  f.a2.detuning = f.b1.detuning = angular(5e9);
  const auto v4 = extract_bipartite(output_cm(model, f).cm).matrix();
  EXPECT_LT((v4 - 0.5 * Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff(), 1e-4);
}

TEST(Spectrum, BaselineIsPhysicalAndRealValued) {
  const auto out = output_cm(make_model(SystemParams::baseline()), FilterPair{});
  EXPECT_TRUE(physicality(out.cm).physical);
  EXPECT_LT(out.diagnostics.imag_residual, 1e-10);
  EXPECT_TRUE(out.diagnostics.converged);
  // regression value for the SI-duration baseline
  EXPECT_NEAR(log_negativity(extract_bipartite(out.cm)), 0.707298209741, 1e-9);
}

TEST(Spectrum, TighterToleranceConverges) {
  const auto model = make_model(SystemParams::baseline());
  QuadratureSettings loose;
  loose.rel_tol = 1e-6;
  const double a = log_negativity(extract_bipartite(output_cm(model, FilterPair{}, loose).cm));
  const double b = log_negativity(extract_bipartite(output_cm(model, FilterPair{}).cm));
  EXPECT_NEAR(a, b, 1e-8);
}

TEST(Spectrum, UnstableAndStarvedQuadrature) {
  auto p = SystemParams::baseline();
  p.G_a = 0.0;
  p.G_b = angular(11e6);
  EXPECT_THROW(output_cm(make_model(p), FilterPair{}), StabilityError);

  QuadratureSettings starved;
  starved.max_panels = 8;
  try {
    output_cm(make_model(SystemParams::baseline()), FilterPair{}, starved);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_FALSE(e.best().diagnostics.converged);
    EXPECT_EQ(e.best().cm.dim(), 6);
  }
  starved.rel_tol = 0.0;
  EXPECT_THROW(starved.check(), UsageError);
}

TEST(Spectrum, BipartiteExtraction) {
  Eigen::MatrixXd m(6, 6);
  for (int i = 0; i < 36; ++i) m.data()[i] = i;
  const CovMat v(m + m.transpose().eval(), {Mode::magnon, Mode::a2_out, Mode::b1_out});
  const auto v4 = extract_bipartite(v, ModePair::m_b1);
  EXPECT_EQ(v4(0, 2), v(0, 4));
  EXPECT_EQ(v4(3, 1), v(5, 1));
  EXPECT_EQ(v4.modes()[1], Mode::b1_out);
  const auto back = embed_bipartite(v, v4, ModePair::m_b1);
  EXPECT_EQ(back.matrix(), v.matrix());
  EXPECT_THROW(parse_mode_pair("a1-b2"), UsageError);
  EXPECT_THROW(extract_bipartite(vacuum_cm(2)), DomainError);
}
