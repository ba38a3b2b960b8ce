#pragma once

// Shot-noise-limited resolution of the deformation parameters, the reference
// parameter sets, the modified uncertainty curve and the experimental
// requirement checklist.

#include <optional>
#include <string>
#include <vector>

#include "cprobe/deformations.hpp"
#include "cprobe/noise.hpp"
#include "cprobe/protocol.hpp"

namespace cprobe {

/// sigma_out / sqrt(N_p N_r).
double phase_imprecision(double photons, double runs, double sigma_out = 0.5);
double phase_imprecision(const PhysicalParams& params);

/// |Theta| per unit bare strength written directly in the experimental
/// parameters:
///   mu:    32 hbar F^2 m N_p / (M_P^2 lambda_L^2 omega_m)
///   gamma: 96 hbar^2 F^3 N_p^2 / (M_P c lambda_L^3 m omega_m)
///   beta:  1024 hbar^3 F^4 N_p^3 / (3 M_P^2 c^2 lambda_L^4 m omega_m)
double theta_parametric(DeformationKind kind, const PhysicalParams& params);

struct RequirementCheck {
  std::string name;
  double bound = 0.0;
  double actual = 0.0;
  bool pass = false;
};

struct SensitivityReport {
  DeformationKind kind = DeformationKind::None;
  double phase_imprecision = 0.0;
  double theta_magnitude = 0.0;  // |Theta| per unit bare strength
  double theta_real = 0.0;       // Re Theta per unit bare strength
  double resolvable_strength = 0.0;
  std::vector<RequirementCheck> requirement_checks;
};

/// delta(bare strength) = phase_imprecision / |Theta per unit bare strength|.
/// The regime guards of `theta` are evaluated at the resolvable strength.
double resolvable_strength(DeformationKind kind, const PhysicalParams& params,
                           const RegimeThresholds& thresholds = {});

SensitivityReport sensitivity_report(DeformationKind kind, const PhysicalParams& params,
                                     const RegimeThresholds& thresholds = {});

/// Scales theta_magnitude by the composite noise reduction for the report's
/// model and recomputes the resolvable strength.
SensitivityReport apply_noise_budget(const SensitivityReport& report, const NoiseBudget& budget);

/// n < 30, T < 0.1 K, Q >= 1e6, lambda < 1 and nbar << lambda N_p.
std::vector<RequirementCheck> requirement_budget(const PhysicalParams& params,
                                                 const RegimeThresholds& thresholds = {});
bool all_pass(const std::vector<RequirementCheck>& checks);

// ---- reference parameter sets ---------------------------------------------

struct ReferenceColumn {
  std::string label;
  DeformationKind kind = DeformationKind::None;
  ExperimentSpec spec;
  double quoted_phase_imprecision = 0.0;  // value listed with the set
  double target_low = 0.0;                 // accepted band for the resolvable strength
  double target_high = 0.0;
};

/// The three columns designed for unit resolution of mu_0, gamma_0, beta_0.
std::vector<ReferenceColumn> table2_columns();

/// Small-scale set: F = 1e5, m = 1e-11 kg, omega_m = 2 pi 1e5, lambda_L = 1064 nm,
/// N_p = 1e8, N_r = 1.
ExperimentSpec first_parameter_set();
/// F = 2e5, m = 1e-9 kg, N_p = 5e10, N_r = 1e5, otherwise as the first set.
ExperimentSpec gamma_enhanced_parameter_set();

struct Table2Row {
  std::string label;
  DeformationKind kind = DeformationKind::None;
  ExperimentSpec spec;
  double lambda = 0.0;
  double theta_per_unit = 0.0;
  double phase_imprecision = 0.0;
  double resolvable_strength = 0.0;
  double quoted_phase_imprecision = 0.0;
  bool phase_within_factor2 = false;
  bool strength_in_band = false;
};

Table2Row evaluate_column(const ReferenceColumn& column);
std::vector<Table2Row> reproduce_table2();

// ---- modified uncertainty relation -----------------------------------------

/// Momentum spread in units of M_P c, position spread in units of the Planck
/// length (taken as hbar / (M_P c)).
struct UncertaintyPoint {
  double dp = 0.0;
  double dx = 0.0;           // (1 + beta0 dp^2) / (2 dp)
  double dx_standard = 0.0;  // 1 / (2 dp)
};

struct UncertaintyGrid {
  double dp_min = 1e-2;
  double dp_max = 1e2;
  int points = 201;
  bool logarithmic = true;
};

std::vector<UncertaintyPoint> uncertainty_curve(double beta0, const UncertaintyGrid& grid = {});

/// Closed-form minimum (1/sqrt(beta0), sqrt(beta0)); empty for beta0 = 0.
std::optional<UncertaintyPoint> uncertainty_minimum(double beta0);

/// Minimum of the sampled curve, refined by bracketing the root of its slope
/// between neighbouring grid points. Empty if the curve is monotone on the grid.
std::optional<UncertaintyPoint> locate_curve_minimum(double beta0, const UncertaintyGrid& grid);

}  // namespace cprobe
