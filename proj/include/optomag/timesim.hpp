#pragma once
// Stochastic time-domain estimate of the filtered output covariance matrix.
//
// The quadrature vector obeys du = A u dt + dW with <dW dW^T> = D dt. The
// output record over one step is y = sqrt(2 kappa) \int u ds - dW / sqrt(2 kappa)
// (input-output relation with u_in dt = dW / sqrt(2 kappa)), and each output
// mode is the filter-weighted sum of these records over its window.

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "optomag/covmat.hpp"
#include "optomag/dynamics.hpp"
#include "optomag/entanglement.hpp"
#include "optomag/errors.hpp"
#include "optomag/filters.hpp"
#include "optomag/rng.hpp"

namespace optomag {

enum class Integrator { euler_maruyama, exact };

inline Integrator parse_integrator(const std::string& s) {
  if (s == "euler" || s == "euler_maruyama" || s == "em") return Integrator::euler_maruyama;
  if (s == "exact") return Integrator::exact;
  throw UsageError("unknown integrator '" + s + "' (expected euler or exact)");
}

inline const char* integrator_name(Integrator i) {
  return i == Integrator::exact ? "exact" : "euler";
}

struct SimSettings {
  double dt = 5e-11;       // s
  double t_relax = 0.0;    // s; 0 selects 20 / |spectral abscissa|
  std::size_t n_traj = 2000;
  std::uint64_t seed = 1;
  Integrator integrator = Integrator::euler_maruyama;
  unsigned workers = 1;
  // Euler only: Brownian increments drawn per step. A run with dt and k
  // substeps follows the same noise path as a run with dt / k and 1.
  unsigned noise_substeps = 1;
};

/// Largest admissible dt * max(rate).
inline constexpr double kMaxStepRatio = 0.05;
/// Burn-in must cover this many relaxation times.
inline constexpr double kMinRelaxTimes = 10.0;

inline double fastest_rate(const SystemParams& p) {
  return std::max({p.kappa_m, p.kappa_a2, p.kappa_b1, p.G_a, p.G_b});
}

/// Fills in the automatic burn-in and checks the settings against the model.
inline SimSettings resolve(SimSettings s, const LinearModel& model) {
  const auto st = is_stable(model);
  if (!st.stable) throw StabilityError("timesim: drift matrix is unstable", st.abscissa);
  if (!(s.dt > 0.0)) throw UsageError("timesim: dt must be > 0");
  if (s.dt * fastest_rate(model.params) > kMaxStepRatio)
    throw UsageError("timesim: dt too coarse, need dt * max(kappa, G) <= 0.05");
  const double relax_min = kMinRelaxTimes / std::abs(st.abscissa);
  if (s.t_relax == 0.0) s.t_relax = 2.0 * relax_min;
  if (s.t_relax < relax_min) throw UsageError("timesim: t_relax must be >= 10 / |spectral abscissa|");
  if (s.n_traj < 2) throw UsageError("timesim: need at least 2 trajectories");
  if (s.workers == 0) s.workers = 1;
  if (s.noise_substeps == 0) throw UsageError("timesim: noise_substeps must be >= 1");
  if (s.noise_substeps > 1 && s.integrator == Integrator::exact)
    throw UsageError("timesim: noise_substeps applies to the euler integrator only");
  return s;
}

/// One row per trajectory.
struct OutputSamples {
  Eigen::MatrixXd outputs;  // X_A2, Y_A2, X_B1, Y_B1
  Eigen::MatrixXd magnon;   // X_m, Y_m at the sampling time
};

namespace detail {

// Per-step propagation for the "exact" integrator. The augmented state
// z = (u, \int u ds / dt, W) is linear with noise entering u and W, so its
// transition over dt is Phi z + eta with eta ~ N(0, Q) from Van Loan's
// block exponential. Dividing the integral by dt keeps all blocks of Q at
// comparable scale; without it the integral block drowns in roundoff.
struct ExactStep {
  using Noise = Eigen::Matrix<double, 14, 14>;
  Mat6 phi;                // u -> u
  Eigen::Matrix<double, 4, 6> psi;  // u -> \int u ds on the cavity quadratures
  // Joint noise factor of (u, \int u ds, W), keeping only the cavity
  // quadratures of the last two since nothing else reaches the output.
  Noise noise_sqrt;

  ExactStep(const LinearModel& m, double dt) {
    using M18 = Eigen::Matrix<double, 18, 18>;
    using M36 = Eigen::Matrix<double, 36, 36>;
    M18 a = M18::Zero();
    a.block<6, 6>(0, 0) = m.drift;
    a.block<6, 6>(6, 0) = Mat6::Identity() / dt;
    Eigen::Matrix<double, 18, 6> b = Eigen::Matrix<double, 18, 6>::Zero();
    b.block<6, 6>(0, 0) = Mat6::Identity();
    b.block<6, 6>(12, 0) = Mat6::Identity();
    const M18 q = b * m.diffusion_matrix() * b.transpose();

    M36 c = M36::Zero();
    c.block<18, 18>(0, 0) = -a * dt;
    c.block<18, 18>(0, 18) = q * dt;
    c.block<18, 18>(18, 18) = a.transpose() * dt;
    const M36 e = c.exp();
    const M18 phi18 = e.block<18, 18>(18, 18).transpose();
    const M18 cov = phi18 * e.block<18, 18>(0, 18);
    phi = phi18.block<6, 6>(0, 0);
    psi = phi18.block<4, 6>(8, 0) * dt;

    static constexpr int keep[14] = {0, 1, 2, 3, 4, 5, 8, 9, 10, 11, 14, 15, 16, 17};
    Noise sub;
    for (int i = 0; i < 14; ++i)
      for (int j = 0; j < 14; ++j) sub(i, j) = 0.5 * (cov(keep[i], keep[j]) + cov(keep[j], keep[i]));
    noise_sqrt = psd_sqrt(sub);
    noise_sqrt.middleRows<4>(6) *= dt;
  }

  template <class M>
  static M psd_sqrt(const M& cov) {
    Eigen::SelfAdjointEigenSolver<M> es(cov);
    const auto ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * ev.asDiagonal();
  }
};

struct WindowWeights {
  // Per step index counted back from the sampling time: 2x2 real kernel
  // [[Re F, -Im F], [Im F, Re F]] * dt, for each filter (zero outside).
  std::vector<Eigen::Matrix2d> a2, b1;
  std::size_t steps = 0;
};

inline WindowWeights window_weights(const FilterPair& f, double dt) {
  const double span = std::max(f.a2.delay + f.a2.tau, f.b1.delay + f.b1.tau);
  WindowWeights w;
  w.steps = static_cast<std::size_t>(std::ceil(span / dt - 1e-9));
  w.a2.resize(w.steps);
  w.b1.resize(w.steps);
  for (std::size_t j = 0; j < w.steps; ++j) {
    // Step j covers lags [j dt, (j+1) dt); the kernel is sampled mid-step.
    const double lag = (static_cast<double>(j) + 0.5) * dt;
    auto kernel = [&](const FilterSpec& fs) {
      const std::complex<double> v = filter_time(lag, fs) * dt;
      Eigen::Matrix2d k;
      k << v.real(), -v.imag(), v.imag(), v.real();
      return k;
    };
    w.a2[j] = kernel(f.a2);
    w.b1[j] = kernel(f.b1);
  }
  return w;
}

}  // namespace detail

/// Runs `n_traj` independent trajectories, each keyed by (seed, index).
inline OutputSamples simulate_output_samples(const LinearModel& model, const FilterPair& filters,
                                             const SimSettings& requested) {
  filters.a2.check();
  filters.b1.check();
  const SimSettings s = resolve(requested, model);
  const double dt = s.dt;
  const auto weights = detail::window_weights(filters, dt);
  // Burn-in uses the exact transition from u = 0 over t_relax in one draw.
  const Mat6 relax_phi = (model.drift * s.t_relax).exp();
  const Mat6 stationary = solve_lyapunov(model.drift, model.diffusion_matrix());
  const Mat6 relax_sqrt =
      detail::ExactStep::psd_sqrt(Mat6(stationary - relax_phi * stationary * relax_phi.transpose()));

  const SystemParams& p = model.params;
  const double ra = std::sqrt(2.0 * p.kappa_a2), rb = std::sqrt(2.0 * p.kappa_b1);
  const Vec6 noise_sd = (model.diffusion * dt).cwiseSqrt();
  const Mat6 em_step = Mat6::Identity() + model.drift * dt;

  std::unique_ptr<detail::ExactStep> exact;
  if (s.integrator == Integrator::exact) exact = std::make_unique<detail::ExactStep>(model, dt);

  OutputSamples out;
  out.outputs.resize(static_cast<Eigen::Index>(s.n_traj), 4);
  out.magnon.resize(static_cast<Eigen::Index>(s.n_traj), 2);

  auto run_one = [&](std::size_t traj) {
    Philox4x32 rng(s.seed, traj);
    Vec6 xi;
    Eigen::Matrix<double, 14, 1> z;
    for (int i = 0; i < 6; ++i) xi(i) = rng.normal();
    Vec6 u = relax_sqrt * xi;
    Eigen::Vector2d xa = Eigen::Vector2d::Zero(), xb = Eigen::Vector2d::Zero();
    for (std::size_t k = 0; k < weights.steps; ++k) {
      const std::size_t j = weights.steps - 1 - k;  // lag index of this step
      // integral and noise increment of the four cavity quadratures
      Eigen::Vector4d integral, dw;
      if (exact) {
        for (int i = 0; i < 14; ++i) z(i) = rng.normal();
        const Eigen::Matrix<double, 14, 1> eta = exact->noise_sqrt * z;
        integral = exact->psi * u + eta.segment<4>(6);
        dw = eta.segment<4>(10);
        u = exact->phi * u + eta.segment<6>(0);
      } else {
        xi.setZero();
        for (unsigned sub = 0; sub < s.noise_substeps; ++sub)
          for (int i = 0; i < 6; ++i) xi(i) += rng.normal();
        xi /= std::sqrt(static_cast<double>(s.noise_substeps));
        const Vec6 inc = noise_sd.cwiseProduct(xi);
        integral = u.segment<4>(2) * dt;
        dw = inc.segment<4>(2);
        u = em_step * u + inc;
      }
      // step records divided by dt: the kernels already carry the factor dt
      const Eigen::Vector2d ya = (ra * integral.segment<2>(0) - dw.segment<2>(0) / ra) / dt;
      const Eigen::Vector2d yb = (rb * integral.segment<2>(2) - dw.segment<2>(2) / rb) / dt;
      xa += weights.a2[j] * ya;
      xb += weights.b1[j] * yb;
    }
    const auto row = static_cast<Eigen::Index>(traj);
    out.outputs.row(row) << xa(0), xa(1), xb(0), xb(1);
    out.magnon.row(row) << u(0), u(1);
  };

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < s.n_traj; t = next++) run_one(t);
  };
  const unsigned n_workers = std::min<unsigned>(s.workers, static_cast<unsigned>(s.n_traj));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return out;
}

struct CmEstimate {
  CovMat cm;
  Eigen::MatrixXd std_error;  // jackknife, entrywise
  std::size_t samples = 0;
};

namespace detail {
struct SampleMoments {
  Eigen::VectorXd sum;
  Eigen::MatrixXd outer;
  std::size_t n = 0;

  explicit SampleMoments(const Eigen::MatrixXd& x)
      : sum(x.colwise().sum().transpose()), outer(x.transpose() * x), n(static_cast<std::size_t>(x.rows())) {}

  static Eigen::MatrixXd cov(const Eigen::VectorXd& s, const Eigen::MatrixXd& o, double n) {
    const Eigen::VectorXd mean = s / n;
    Eigen::MatrixXd c = (o - n * mean * mean.transpose()) / (n - 1.0);
    return 0.5 * (c + c.transpose());
  }
  Eigen::MatrixXd full() const { return cov(sum, outer, static_cast<double>(n)); }
  Eigen::MatrixXd leave_out(const Eigen::VectorXd& x) const {
    return cov(sum - x, outer - x * x.transpose(), static_cast<double>(n - 1));
  }
};
}  // namespace detail

/// Jackknife standard error of a scalar statistic of the sample covariance.
inline double jackknife_stderr(const Eigen::MatrixXd& samples,
                               const std::function<double(const Eigen::MatrixXd&)>& stat) {
  const auto n = static_cast<std::size_t>(samples.rows());
  if (n < 3) return std::numeric_limits<double>::infinity();
  const detail::SampleMoments mom(samples);
  std::vector<double> loo(n);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    loo[i] = stat(mom.leave_out(samples.row(static_cast<Eigen::Index>(i)).transpose()));
    mean += loo[i];
  }
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : loo) ss += (v - mean) * (v - mean);
  return std::sqrt(ss * static_cast<double>(n - 1) / static_cast<double>(n));
}

/// Sample covariance of the rows with jackknife standard errors.
inline CmEstimate estimate_cm(const Eigen::MatrixXd& samples) {
  const auto n = static_cast<std::size_t>(samples.rows());
  if (n < 2) throw UsageError("estimate_cm: need at least 2 samples");
  if (samples.cols() % 2 != 0) throw UsageError("estimate_cm: need an even number of quadrature columns");
  const detail::SampleMoments mom(samples);
  CmEstimate est{CovMat(mom.full()), Eigen::MatrixXd::Zero(samples.cols(), samples.cols()), n};
  if (n < 3) {
    est.std_error.setConstant(std::numeric_limits<double>::infinity());
    return est;
  }
  std::vector<Eigen::MatrixXd> loo(n);
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(samples.cols(), samples.cols());
  for (std::size_t i = 0; i < n; ++i) {
    loo[i] = mom.leave_out(samples.row(static_cast<Eigen::Index>(i)).transpose());
    mean += loo[i];
  }
  mean /= static_cast<double>(n);
  for (const auto& c : loo) est.std_error += (c - mean).cwiseAbs2();
  est.std_error = (est.std_error * (static_cast<double>(n - 1) / static_cast<double>(n))).cwiseSqrt();
  return est;
}

}  // namespace optomag
