#pragma once
// Physical parameters of the three-mode optomagnonic model (magnon m,
// anti-Stokes WGM a2, Stokes WGM b1) and derived quantities.
//
// Units: every frequency, decay rate and coupling is angular (rad/s).
// Configuration files carry ordinary frequencies in Hz; the conversion by
// 2*pi happens once, at parse time (see config.hpp).

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "optomag/errors.hpp"

namespace optomag {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Hz -> rad/s
constexpr double angular(double hz) { return kTwoPi * hz; }
/// rad/s -> Hz
constexpr double cyclic(double rad_per_s) { return rad_per_s / kTwoPi; }

/// CODATA 2018 exact values.
struct PhysicalConstants {
  static constexpr double hbar = 1.054571817e-34;  // J s
  static constexpr double kB = 1.380649e-23;       // J/K
};

struct SystemParams {
  double omega_m = 0.0;   // magnon
  double omega_a2 = 0.0;  // anti-Stokes sideband WGM (TM)
  double omega_b1 = 0.0;  // Stokes sideband WGM (TE)
  double kappa_m = 0.0;
  double kappa_a2 = 0.0;
  double kappa_b1 = 0.0;
  double kappa_a1 = 0.0;  // pumped WGMs; only enter pump-power conversion
  double kappa_b2 = 0.0;
  double G_a = 0.0;  // beam-splitter (state-swap) coupling a2 <-> m
  double G_b = 0.0;  // two-mode-squeezing coupling b1 <-> m
  double T = 0.0;    // bath temperature, K

  // Pumped modes follow from triple resonance:
  // omega_a2 - omega_a1 = omega_b2 - omega_b1 = omega_m.
  double omega_a1() const { return omega_a2 - omega_m; }
  double omega_b2() const { return omega_b1 + omega_m; }

  /// Operating point used throughout the figures: 6.8 GHz magnon,
  /// 1 MHz magnon damping, 100 MHz optical damping, G_a = 10 MHz,
  /// G_b = 6.5 MHz, T = 0.1 K (all over 2*pi).
  static SystemParams baseline() {
    SystemParams p;
    p.omega_m = angular(6.8e9);
    p.omega_a2 = angular(193067.9e9);
    p.omega_b1 = angular(193123.2e9);
    p.kappa_m = angular(1e6);
    p.kappa_a2 = angular(100e6);
    p.kappa_b1 = angular(100e6);
    p.kappa_a1 = p.kappa_a2;
    p.kappa_b2 = p.kappa_b1;
    p.G_a = angular(10e6);
    p.G_b = angular(6.5e6);
    p.T = 0.1;
    return p;
  }
};

/// Classical pump driving one WGM of a pair.
struct PumpSpec {
  double power = 0.0;        // W
  double omega_p = 0.0;      // rad/s
  double g = 0.0;            // bare single-photon coupling, rad/s
  double kappa_drive = 0.0;  // decay rate of the driven WGM, rad/s
};

/// Bose-Einstein occupation [exp(hbar*omega/kB*T) - 1]^-1; exactly 0 at T = 0.
/// Underflows cleanly to 0 for optical frequencies at laboratory temperatures.
inline double thermal_occupation(double omega, double T) {
  if (!(omega > 0.0)) throw DomainError("thermal_occupation: omega must be > 0");
  if (!(T >= 0.0)) throw DomainError("thermal_occupation: T must be >= 0");
  if (T == 0.0) return 0.0;
  const double x = PhysicalConstants::hbar * omega / (PhysicalConstants::kB * T);
  return 1.0 / std::expm1(x);  // expm1 overflows to +inf -> 0
}

/// Pump-enhanced coupling G = g * alpha, alpha = E / kappa,
/// E = sqrt(2 P kappa / (hbar omega_p)).
inline double pump_to_coupling(const PumpSpec& pump) {
  if (pump.power < 0.0 || !(pump.omega_p > 0.0) || !(pump.kappa_drive > 0.0) ||
      pump.g < 0.0)
    throw DomainError("pump_to_coupling: invalid pump specification");
  const double drive = std::sqrt(2.0 * pump.power * pump.kappa_drive /
                                 (PhysicalConstants::hbar * pump.omega_p));
  return pump.g * drive / pump.kappa_drive;
}

/// Pump power needed for an intracavity amplitude alpha.
inline double power_for_amplitude(double alpha, double omega_p, double kappa_drive) {
  return alpha * alpha * PhysicalConstants::hbar * omega_p * kappa_drive / 2.0;
}

struct Violation {
  enum class Severity { error, warning };
  std::string field;
  std::string rule;
  Severity severity = Severity::error;
};

/// Ratio below which an optical frequency is not treated as "far above" the
/// magnon frequency.
inline constexpr double kOpticalScaleRatio = 100.0;

/// All invariant violations of `params`. Scale-separation issues are reported
/// as warnings; everything else is an error.
inline std::vector<Violation> validate(const SystemParams& p) {
  std::vector<Violation> out;
  auto positive = [&](const char* name, double v) {
    if (!(v > 0.0) || !std::isfinite(v)) out.push_back({name, "must be finite and > 0"});
  };
  positive("omega_m", p.omega_m);
  positive("omega_a2", p.omega_a2);
  positive("omega_b1", p.omega_b1);
  positive("kappa_m", p.kappa_m);
  positive("kappa_a2", p.kappa_a2);
  positive("kappa_b1", p.kappa_b1);
  positive("kappa_a1", p.kappa_a1);
  positive("kappa_b2", p.kappa_b2);
  // Couplings are allowed to vanish: the uncoupled model is a valid test case.
  if (!(p.G_a >= 0.0) || !std::isfinite(p.G_a)) out.push_back({"G_a", "must be finite and >= 0"});
  if (!(p.G_b >= 0.0) || !std::isfinite(p.G_b)) out.push_back({"G_b", "must be finite and >= 0"});
  if (!(p.T >= 0.0) || !std::isfinite(p.T)) out.push_back({"T", "must be finite and >= 0"});

  if (p.omega_m > 0.0) {
    if (p.omega_a2 > 0.0 && p.omega_a2 < kOpticalScaleRatio * p.omega_m)
      out.push_back({"omega_a2", "should be much larger than omega_m",
                     Violation::Severity::warning});
    if (p.omega_b1 > 0.0 && p.omega_b1 < kOpticalScaleRatio * p.omega_m)
      out.push_back({"omega_b1", "should be much larger than omega_m",
                     Violation::Severity::warning});
  }
  return out;
}

inline bool has_errors(const std::vector<Violation>& v) {
  for (const auto& x : v)
    if (x.severity == Violation::Severity::error) return true;
  return false;
}

}  // namespace optomag
