#pragma once

// Commutator-deformation models and the experimental configuration that turns
// a bare (Planck-unit) deformation parameter into a dimensionless strength.

#include <array>
#include <limits>
#include <string>
#include <string_view>

#include "cprobe/fock.hpp"

namespace cprobe {

/// Physical constants in SI units. Planck mass and length are the rounded
/// values the sensitivity numbers are quoted with, not CODATA values.
struct Constants {
  double hbar = 1.054571817e-34;        // J s
  double c = 2.99792458e8;              // m / s
  double k_B = 1.380649e-23;            // J / K
  double planck_mass = 2.2e-8;          // kg
  double planck_length = 1.6e-35;       // m

  bool operator==(const Constants&) const = default;
};

inline constexpr Constants kConstants{};

enum class DeformationKind { None, Beta, Gamma, Mu };

std::string_view to_string(DeformationKind kind);
/// Accepts "none", "beta", "gamma", "mu" (case-insensitive).
DeformationKind parse_deformation_kind(std::string_view name);

/// A deformation choice with its bare, dimensionless strength
/// (beta_0, gamma_0 or mu_0). `None` carries strength 0.
struct DeformationModel {
  DeformationKind kind = DeformationKind::None;
  double bare_strength = 0.0;

  static DeformationModel none() { return {}; }
  static DeformationModel beta(double beta0);
  static DeformationModel gamma(double gamma0);
  static DeformationModel mu(double mu0);

  bool operator==(const DeformationModel&) const = default;
};

/// A deformation expressed in oscillator units: the strength that multiplies
/// the quadrature-level commutator polynomial (beta, gamma or mu).
struct Deformation {
  DeformationKind kind = DeformationKind::None;
  double strength = 0.0;

  static Deformation none() { return {}; }
};

/// Raw experimental configuration; validated when wrapped in PhysicalParams.
struct ExperimentSpec {
  double mass_kg = 0.0;
  double omega_m = 0.0;              // rad / s
  double finesse = 0.0;
  double wavelength_m = 0.0;
  double photons_per_pulse = 0.0;    // N_p
  double runs = 1.0;                 // N_r
  double nbar = 0.0;                 // mechanical thermal occupation
  double eta = 1.0;                  // per-pulse distortion factor, (0, 1]
  double temperature_K = 0.0;
  double quality_factor = std::numeric_limits<double>::infinity();
  double sigma_out = 0.5;            // output quadrature width

  bool operator==(const ExperimentSpec&) const = default;
};

class PhysicalParams {
 public:
  explicit PhysicalParams(const ExperimentSpec& spec, const Constants& constants = kConstants);

  const ExperimentSpec& spec() const { return spec_; }
  const Constants& constants() const { return constants_; }

  /// Zero-point position scale sqrt(hbar / (m omega_m)), metres.
  double x0() const { return x0_; }
  /// Zero-point momentum scale sqrt(hbar m omega_m), kg m / s.
  double p0() const { return p0_; }
  /// Optomechanical coupling per photon, 4 F x0 / lambda_L.
  double lambda() const { return lambda_; }

 private:
  ExperimentSpec spec_;
  Constants constants_;
  double x0_;
  double p0_;
  double lambda_;
};

/// beta = beta0 hbar omega m / (M_P c)^2, gamma = gamma0 sqrt(hbar m omega) / (M_P c),
/// mu = mu0 m^2 / M_P^2.
double dimensionless_strength(const DeformationModel& model, const PhysicalParams& params);
Deformation to_dimensionless(const DeformationModel& model, const PhysicalParams& params);

/// Real polynomial c[0] + c[1] P + c[2] P^2 in the momentum quadrature.
struct MomentumPolynomial {
  std::array<double, 3> c{};

  bool is_zero() const { return c[0] == 0.0 && c[1] == 0.0 && c[2] == 0.0; }
  double operator()(double p) const { return c[0] + p * (c[1] + p * c[2]); }
};

/// First-order nested commutators iC_k = [X, C_{k-1}], C_0 = P.
/// All C_k with k >= 4 vanish at first order for every supported model.
struct NestedCommutators {
  MomentumPolynomial c1;
  MomentumPolynomial c2;
  MomentumPolynomial c3;
};

NestedCommutators nested_commutators(const Deformation& deformation);

/// Phase generator of the four-displacement block at displacement a = lambda n,
/// -a sum_k a^k C_k / k!, as a polynomial in P.
MomentumPolynomial loop_phase_polynomial(const Deformation& deformation, double a);

/// Commutator [X, P'] implied by the model, as a polynomial in P, to first order.
MomentumPolynomial commutator_polynomial(const Deformation& deformation);

/// Perturbative guard: strengths at or above `error_limit` are rejected.
struct StrengthRegime {
  double error_limit = 1.0;
  double warn_limit = 0.1;
};

/// Momentum operator realising the deformed commutator with canonical X:
/// Beta P(1 + beta P^2/3), Gamma P - gamma P^2/2, Mu (1 + mu) P.
FockOperator deformed_momentum(const FockOperator& p, const Deformation& deformation,
                               const StrengthRegime& regime = {});
SparseMatrix deformed_momentum(const SparseMatrix& p, const Deformation& deformation,
                               const StrengthRegime& regime = {});

/// Scalar form of the same map, P'(p).
double deformed_momentum_value(double p, const Deformation& deformation);

/// Throws OutOfRegime when the perturbative representation is invalid.
void check_strength_regime(const Deformation& deformation, const StrengthRegime& regime = {});
bool strength_needs_warning(const Deformation& deformation, const StrengthRegime& regime = {});

enum class CorrelationRegime { Uncorrelated, FullyCorrelated };

/// Rescaling beta_0 -> chi beta_0 for an N-particle centre-of-mass mode.
double composite_chi(long long particles, CorrelationRegime regime);
/// Validates a user-chosen chi in [1/N^2, 1/N].
double checked_chi(long long particles, double chi);

}  // namespace cprobe
