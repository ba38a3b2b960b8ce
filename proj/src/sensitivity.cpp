#include "cprobe/sensitivity.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>

#include <boost/math/tools/roots.hpp>

#include "cprobe/errors.hpp"

namespace cprobe {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Requirement thresholds for neglecting noise.
constexpr double kMaxThermalOccupation = 30.0;
constexpr double kMaxTemperature = 0.1;  // K
constexpr double kMinQuality = 1e6;

DeformationModel unit_model(DeformationKind kind) {
  switch (kind) {
    case DeformationKind::Beta:
      return DeformationModel::beta(1.0);
    case DeformationKind::Gamma:
      return DeformationModel::gamma(1.0);
    case DeformationKind::Mu:
      return DeformationModel::mu(1.0);
    case DeformationKind::None:
      break;
  }
  throw InvalidArgument("a deformation model (beta, gamma or mu) is required");
}

DeformationModel scaled_model(DeformationKind kind, double strength) {
  DeformationModel m = unit_model(kind);
  m.bare_strength = strength;
  return m;
}

ExperimentSpec base_spec() {
  ExperimentSpec s;
  s.mass_kg = 1e-11;
  s.omega_m = kTwoPi * 1e5;
  s.finesse = 1e5;
  s.wavelength_m = 1064e-9;
  s.photons_per_pulse = 1e8;
  s.runs = 1.0;
  return s;
}

}  // namespace

double phase_imprecision(double photons, double runs, double sigma_out) {
  if (!(photons > 0.0) || !(runs > 0.0) || !(sigma_out > 0.0)) {
    throw InvalidArgument("phase_imprecision: N_p, N_r and sigma_out must be > 0");
  }
  return sigma_out / std::sqrt(photons * runs);
}

double phase_imprecision(const PhysicalParams& params) {
  const auto& s = params.spec();
  return phase_imprecision(s.photons_per_pulse, s.runs, s.sigma_out);
}

double theta_parametric(DeformationKind kind, const PhysicalParams& params) {
  const auto& s = params.spec();
  const auto& k = params.constants();
  const double hbar = k.hbar, mp = k.planck_mass, c = k.c;
  const double f = s.finesse, m = s.mass_kg, w = s.omega_m, ll = s.wavelength_m;
  const double n = s.photons_per_pulse;
  switch (kind) {
    case DeformationKind::Mu:
      return 32.0 * hbar * f * f * m * n / (mp * mp * ll * ll * w);
    case DeformationKind::Gamma:
      return 96.0 * hbar * hbar * f * f * f * n * n / (mp * c * ll * ll * ll * m * w);
    case DeformationKind::Beta:
      return 1024.0 * hbar * hbar * hbar * std::pow(f, 4) * n * n * n /
             (3.0 * mp * mp * c * c * std::pow(ll, 4) * m * w);
    case DeformationKind::None:
      return 0.0;
  }
  return 0.0;
}

double resolvable_strength(DeformationKind kind, const PhysicalParams& params,
                           const RegimeThresholds& thresholds) {
  return sensitivity_report(kind, params, thresholds).resolvable_strength;
}

SensitivityReport sensitivity_report(DeformationKind kind, const PhysicalParams& params,
                                     const RegimeThresholds& thresholds) {
  const DeformationModel unit = unit_model(kind);
  const Complex per_unit =
      theta_closed_form(to_dimensionless(unit, params), params.spec().photons_per_pulse,
                        params.lambda());
  SensitivityReport r;
  r.kind = kind;
  r.phase_imprecision = phase_imprecision(params);
  r.theta_magnitude = std::abs(per_unit);
  r.theta_real = per_unit.real();
  r.resolvable_strength = r.phase_imprecision / r.theta_magnitude;
  // The closed form has to hold where the signal equals the imprecision.
  theta(scaled_model(kind, r.resolvable_strength), params, thresholds);
  r.requirement_checks = requirement_budget(params, thresholds);
  return r;
}

SensitivityReport apply_noise_budget(const SensitivityReport& report, const NoiseBudget& budget) {
  SensitivityReport out = report;
  out.theta_magnitude = report.theta_magnitude * budget.composite(report.kind);
  out.theta_real = report.theta_real * budget.composite(report.kind);
  out.resolvable_strength = out.phase_imprecision / out.theta_magnitude;
  return out;
}

std::vector<RequirementCheck> requirement_budget(const PhysicalParams& params,
                                                 const RegimeThresholds& thresholds) {
  const auto& s = params.spec();
  const double lambda = params.lambda();
  std::vector<RequirementCheck> checks;
  checks.push_back({"thermal occupation n < 30", kMaxThermalOccupation, s.nbar,
                    s.nbar < kMaxThermalOccupation});
  checks.push_back({"bath temperature T < 0.1 K", kMaxTemperature, s.temperature_K,
                    s.temperature_K < kMaxTemperature});
  checks.push_back({"quality factor Q >= 1e6", kMinQuality, s.quality_factor,
                    s.quality_factor >= kMinQuality});
  checks.push_back({"interaction strength lambda < 1", 1.0, lambda, lambda < 1.0});
  const double occupancy_bound = thresholds.much_less * lambda * s.photons_per_pulse;
  checks.push_back({"occupation n << lambda N_p", occupancy_bound, s.nbar,
                    s.nbar <= occupancy_bound});
  return checks;
}

bool all_pass(const std::vector<RequirementCheck>& checks) {
  for (const auto& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

ExperimentSpec first_parameter_set() { return base_spec(); }

ExperimentSpec gamma_enhanced_parameter_set() {
  ExperimentSpec s = base_spec();
  s.finesse = 2e5;
  s.mass_kg = 1e-9;
  s.photons_per_pulse = 5e10;
  s.runs = 1e5;
  return s;
}

std::vector<ReferenceColumn> table2_columns() {
  ExperimentSpec beta = base_spec();
  beta.finesse = 4e5;
  beta.mass_kg = 1e-7;
  beta.wavelength_m = 532e-9;
  beta.photons_per_pulse = 1e14;
  beta.runs = 1e6;
  return {
      {"mu", DeformationKind::Mu, base_spec(), 1e-4, 0.3, 3.0},
      {"gamma", DeformationKind::Gamma, gamma_enhanced_parameter_set(), 1e-8, 0.2, 5.0},
      {"beta", DeformationKind::Beta, beta, 1e-10, 0.2, 5.0},
  };
}

Table2Row evaluate_column(const ReferenceColumn& column) {
  const PhysicalParams params(column.spec);
  const SensitivityReport r = sensitivity_report(column.kind, params);
  Table2Row row;
  row.label = column.label;
  row.kind = column.kind;
  row.spec = column.spec;
  row.lambda = params.lambda();
  row.theta_per_unit = r.theta_magnitude;
  row.phase_imprecision = r.phase_imprecision;
  row.resolvable_strength = r.resolvable_strength;
  row.quoted_phase_imprecision = column.quoted_phase_imprecision;
  const double ratio = r.phase_imprecision / column.quoted_phase_imprecision;
  row.phase_within_factor2 = ratio >= 0.5 && ratio <= 2.0;
  row.strength_in_band =
      r.resolvable_strength >= column.target_low && r.resolvable_strength <= column.target_high;
  return row;
}

std::vector<Table2Row> reproduce_table2() {
  std::vector<Table2Row> rows;
  for (const auto& c : table2_columns()) rows.push_back(evaluate_column(c));
  return rows;
}

// ---- modified uncertainty relation -----------------------------------------

namespace {

UncertaintyPoint uncertainty_point(double beta0, double dp) {
  return {dp, (1.0 + beta0 * dp * dp) / (2.0 * dp), 1.0 / (2.0 * dp)};
}

void check_curve_inputs(double beta0, const UncertaintyGrid& grid) {
  if (!(beta0 >= 0.0) || !std::isfinite(beta0)) throw InvalidArgument("beta0 must be >= 0");
  if (!(grid.dp_min > 0.0) || !(grid.dp_max > grid.dp_min) || !std::isfinite(grid.dp_max)) {
    throw InvalidArgument("uncertainty grid needs 0 < dp_min < dp_max");
  }
  if (grid.points < 2) throw InvalidArgument("uncertainty grid needs >= 2 points");
}

}  // namespace

std::vector<UncertaintyPoint> uncertainty_curve(double beta0, const UncertaintyGrid& grid) {
  check_curve_inputs(beta0, grid);
  std::vector<UncertaintyPoint> out;
  out.reserve(static_cast<std::size_t>(grid.points));
  const double span = grid.points - 1;
  for (int i = 0; i < grid.points; ++i) {
    const double f = i / span;
    const double dp = grid.logarithmic
                          ? grid.dp_min * std::pow(grid.dp_max / grid.dp_min, f)
                          : grid.dp_min + f * (grid.dp_max - grid.dp_min);
    out.push_back(uncertainty_point(beta0, dp));
  }
  return out;
}

std::optional<UncertaintyPoint> uncertainty_minimum(double beta0) {
  if (!(beta0 >= 0.0)) throw InvalidArgument("beta0 must be >= 0");
  if (beta0 == 0.0) return std::nullopt;
  const double dp = 1.0 / std::sqrt(beta0);
  return UncertaintyPoint{dp, std::sqrt(beta0), 1.0 / (2.0 * dp)};
}

std::optional<UncertaintyPoint> locate_curve_minimum(double beta0, const UncertaintyGrid& grid) {
  const auto curve = uncertainty_curve(beta0, grid);
  std::size_t best = 0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    if (curve[i].dx < curve[best].dx) best = i;
  }
  if (best == 0 || best + 1 == curve.size()) return std::nullopt;

  // d(dx)/d(dp) = (beta0 - 1/dp^2) / 2 changes sign across the sampled minimum.
  const auto slope = [beta0](double dp) { return 0.5 * (beta0 - 1.0 / (dp * dp)); };
  std::uintmax_t iterations = 200;
  const auto [lo, hi] = boost::math::tools::toms748_solve(
      slope, curve[best - 1].dp, curve[best + 1].dp, boost::math::tools::eps_tolerance<double>(),
      iterations);
  return uncertainty_point(beta0, 0.5 * (lo + hi));
}

}  // namespace cprobe
