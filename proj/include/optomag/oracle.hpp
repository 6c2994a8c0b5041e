#pragma once
// Cross-check of the spectral output CM against the stochastic simulation.

#include <Eigen/Dense>
#include <cmath>

#include "optomag/entanglement.hpp"
#include "optomag/spectrum.hpp"
#include "optomag/timesim.hpp"

namespace optomag {

struct OracleResult {
  double E_N_spectral = 0.0;
  double E_N_mc = 0.0;
  double sigma = 0.0;    // jackknife standard error of E_N_mc
  double z_score = 0.0;
  Eigen::Matrix4d V4_spectral;
  Eigen::Matrix4d V4_mc;
  Eigen::Matrix4d V4_sigma;
  Eigen::Matrix4d V4_z;
  double max_entry_z = 0.0;
  bool pass = false;     // |z| <= 3 for E_N
  bool entries_pass = false;  // |z| <= 3 for every V4 entry
  SimSettings settings;  // as resolved (burn-in filled in)
};

inline constexpr double kOracleZ = 3.0;

namespace detail {
// z-score that treats a zero difference with zero spread as agreement.
inline double z_of(double diff, double sigma) {
  if (diff == 0.0) return 0.0;
  return diff / sigma;
}
}  // namespace detail

inline OracleResult run_oracle(const LinearModel& model, const FilterPair& filters, const SimSettings& sim,
                               const QuadratureSettings& quad = {}) {
  OracleResult r;
  r.settings = resolve(sim, model);
  const CovMat v4 = extract_bipartite(output_cm(model, filters, quad).cm);
  r.V4_spectral = v4.matrix();
  r.E_N_spectral = log_negativity(v4);

  const auto samples = simulate_output_samples(model, filters, r.settings);
  const auto est = estimate_cm(samples.outputs);
  r.V4_mc = est.cm.matrix();
  r.V4_sigma = est.std_error;
  r.E_N_mc = log_negativity(Eigen::Matrix4d(r.V4_mc));
  r.sigma = jackknife_stderr(samples.outputs, [](const Eigen::MatrixXd& c) {
    return log_negativity(Eigen::Matrix4d(c));
  });

  r.z_score = detail::z_of(r.E_N_mc - r.E_N_spectral, r.sigma);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      r.V4_z(i, j) = detail::z_of(r.V4_mc(i, j) - r.V4_spectral(i, j), r.V4_sigma(i, j));
      r.max_entry_z = std::max(r.max_entry_z, std::abs(r.V4_z(i, j)));
    }
  r.pass = std::abs(r.z_score) <= kOracleZ;
  r.entries_pass = r.max_entry_z <= kOracleZ;
  return r;
}

}  // namespace optomag
