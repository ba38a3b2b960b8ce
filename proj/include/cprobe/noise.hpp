#pragma once

// Deleterious effects: intracavity filtering of the drive pulse, per-pulse
// distortion of the interaction strength, thermal attenuation of the optical
// mean and bath-induced decoherence between pulses.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "cprobe/deformations.hpp"
#include "cprobe/fock.hpp"

namespace cprobe {

enum class PulseKind { Square, Gaussian, Exponential, Tabulated };

/// Real drive envelope alpha_in(t) in units of 1/sqrt(s), normalised so that
/// the integral of alpha_in^2 is 1.
class PulseShape {
 public:
  /// Constant on [start, start + duration).
  static PulseShape square(double duration, double start = 0.0);
  /// alpha^2 is a normal density of standard deviation `width`.
  static PulseShape gaussian(double width, double center = 0.0);
  /// sqrt(2/tau) exp(-(t - start)/tau) for t >= start.
  static PulseShape exponential(double tau, double start = 0.0);
  /// Piecewise-linear through the samples, zero outside them. Throws unless
  /// normalised to 1e-8, or rescales when `normalize` is set.
  static PulseShape from_table(std::vector<double> times, std::vector<double> amplitudes,
                               bool normalize = false);
  /// Two whitespace-separated columns (time, amplitude); '#' starts a comment.
  static PulseShape from_text(std::istream& in, bool normalize = false);
  static PulseShape from_file(const std::filesystem::path& path, bool normalize = false);

  PulseKind kind() const { return kind_; }
  /// Characteristic duration tau.
  double duration() const { return tau_; }
  double support_begin() const;
  double support_end() const;
  /// Points where the envelope or its slope may jump (support ends included).
  std::vector<double> breakpoints() const;

  double value(double t) const;
  double left_limit(double t) const;
  double right_limit(double t) const;

  /// Integral of alpha_in^2, exact for every kind.
  double energy() const;

  PulseShape shifted(double dt) const;

 private:
  PulseShape(PulseKind kind, double tau, double origin) : kind_(kind), tau_(tau), origin_(origin) {}
  double eval(double t, int side) const;

  PulseKind kind_;
  double tau_;
  double origin_;
  std::vector<double> times_;
  std::vector<double> amps_;
};

struct ZetaResult {
  double zeta = 0.0;
  double last_change = 0.0;  // |zeta(h) - zeta(2h)|
  long long steps = 0;
};

/// zeta = int dt kappa^2 [int_{-inf}^t dt' e^{-kappa (t - t')} alpha_in(t')]^2,
/// so that lambda = zeta g0 / kappa. Composite quadrature with step halving
/// until the change drops below `tolerance`.
ZetaResult intracavity_zeta_report(const PulseShape& pulse, double kappa,
                                   double tolerance = 1e-6);
double intracavity_zeta(const PulseShape& pulse, double kappa, double tolerance = 1e-6);

/// Reduction of Theta when successive interaction strengths shrink by eta:
/// eta^7 (beta), eta^5 (gamma), eta^3 (mu), 1 (none).
double eta_reduction(DeformationKind kind, double eta);

/// exp(-nbar lambda^2 (1 - eta^2)(1 - eta^4) / 2).
double thermal_attenuation(double nbar, double lambda, double eta);

/// Numerical check of the factorisation of the distorted loop
/// exp(i l4 n P) exp(-i l3 n X) exp(-i l2 n P) exp(i l1 n X), l_{i+1} = eta l_i,
/// into a closed loop xi'_0 (sides l2, l3) times residual displacements.
struct EtaFactorizationReport {
  // Residual displacements exp(+i eta lambda (1-eta^2) n P) exp(i lambda (1-eta^2) n X).
  std::vector<double> residual_as_printed;
  // Same with the momentum exponent sign that follows from the loop
  // algebra, exp(-i eta lambda (1-eta^2) n P).
  std::vector<double> residual_sign_corrected;
  double max_residual_as_printed = 0.0;
  double max_residual_sign_corrected = 0.0;
};

EtaFactorizationReport xi_eta_check(double lambda, double eta, int opt_dim, int mech_dim);

/// 1 - lambda^2 k_B T / (hbar omega_m Q); throws OutOfRegime if the
/// correction reaches 1.
double decoherence_factor(double lambda, double temperature_K, double omega_m,
                          double quality_factor, const Constants& constants = kConstants);

/// Delta-correlated strength gamma_m coth(hbar omega_m / 2 k_B T), gamma_m = omega_m / Q.
double bath_noise_strength(double temperature_K, double omega_m, double quality_factor,
                           const Constants& constants = kConstants);

/// Exact average of exp(i lambda (B1 + B2 + B3)) for Gaussian white noise of
/// the given strength: exp(-lambda^2 D (pi + 1) / (2 omega_m)).
double bath_phase_average(double lambda, double temperature_K, double omega_m,
                          double quality_factor, const Constants& constants = kConstants);

struct MonteCarloEstimate {
  Complex mean;
  double std_error_real = 0.0;
  double std_error_imag = 0.0;
  long long samples = 0;
};

struct BathSampling {
  long long samples = 10000;
  std::uint64_t seed = 1;
  int jobs = 1;
  int steps_per_period = 200;
};

/// Samples classical white-noise bath records B(t), forms the phase factor
/// exp(i lambda (B1 + B2 + B3)) per record and averages it. Results depend only
/// on the seed, not on `jobs`.
MonteCarloEstimate bath_monte_carlo(double lambda, double temperature_K, double omega_m,
                                    double quality_factor, const BathSampling& sampling,
                                    const Constants& constants = kConstants);

/// Multiplicative reductions of the deformation signal; every factor in (0, 1].
struct NoiseBudget {
  double zeta = 1.0;
  double eta = 1.0;
  double thermal_factor = 1.0;
  double decoherence_factor = 1.0;

  double theta_reduction(DeformationKind kind) const { return eta_reduction(kind, eta); }
  double composite(DeformationKind kind) const {
    return theta_reduction(kind) * thermal_factor * decoherence_factor;
  }

  static NoiseBudget unit() { return {}; }
};

struct NoiseInputs {
  double eta = 1.0;
  double nbar = 0.0;
  double lambda = 0.0;
  double temperature_K = 0.0;
  double omega_m = 1.0;
  double quality_factor = 1.0;
  double zeta = 1.0;
};

NoiseBudget make_noise_budget(const NoiseInputs& in, const Constants& constants = kConstants);

}  // namespace cprobe
