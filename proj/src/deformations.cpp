#include "cprobe/deformations.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <string>

#include "cprobe/errors.hpp"

namespace cprobe {
namespace {

std::string compact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

void require_nonnegative(double v, const char* what) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw InvalidArgument(std::string(what) + " must be finite and >= 0");
  }
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw InvalidArgument(std::string(what) + " must be finite and > 0");
  }
}

}  // namespace

std::string_view to_string(DeformationKind kind) {
  switch (kind) {
    case DeformationKind::None: return "none";
    case DeformationKind::Beta: return "beta";
    case DeformationKind::Gamma: return "gamma";
    case DeformationKind::Mu: return "mu";
  }
  return "none";
}

DeformationKind parse_deformation_kind(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (lower == "none") return DeformationKind::None;
  if (lower == "beta") return DeformationKind::Beta;
  if (lower == "gamma") return DeformationKind::Gamma;
  if (lower == "mu") return DeformationKind::Mu;
  throw InvalidArgument("unknown deformation model '" + std::string(name) + "'");
}

DeformationModel DeformationModel::beta(double beta0) {
  require_nonnegative(beta0, "beta_0");
  return {DeformationKind::Beta, beta0};
}

DeformationModel DeformationModel::gamma(double gamma0) {
  require_nonnegative(gamma0, "gamma_0");
  return {DeformationKind::Gamma, gamma0};
}

DeformationModel DeformationModel::mu(double mu0) {
  require_nonnegative(mu0, "mu_0");
  return {DeformationKind::Mu, mu0};
}

PhysicalParams::PhysicalParams(const ExperimentSpec& spec, const Constants& constants)
    : spec_(spec), constants_(constants) {
  require_positive(spec.mass_kg, "mass m");
  require_positive(spec.omega_m, "omega_m");
  require_positive(spec.finesse, "finesse F");
  require_positive(spec.wavelength_m, "wavelength lambda_L");
  require_positive(spec.photons_per_pulse, "photons per pulse N_p");
  require_positive(spec.runs, "runs N_r");
  require_nonnegative(spec.nbar, "nbar");
  require_nonnegative(spec.temperature_K, "temperature T");
  require_positive(spec.sigma_out, "sigma_out");
  if (!(spec.quality_factor > 0.0)) throw InvalidArgument("quality factor Q must be > 0");
  if (!(spec.eta > 0.0 && spec.eta <= 1.0)) throw InvalidArgument("eta must lie in (0, 1]");
  for (double c : {constants.hbar, constants.c, constants.k_B, constants.planck_mass,
                   constants.planck_length}) {
    require_positive(c, "physical constant");
  }
  x0_ = std::sqrt(constants_.hbar / (spec_.mass_kg * spec_.omega_m));
  p0_ = std::sqrt(constants_.hbar * spec_.mass_kg * spec_.omega_m);
  lambda_ = 4.0 * spec_.finesse * x0_ / spec_.wavelength_m;
}

double dimensionless_strength(const DeformationModel& model, const PhysicalParams& params) {
  require_nonnegative(model.bare_strength, "deformation strength");
  const auto& k = params.constants();
  const auto& s = params.spec();
  const double mpc = k.planck_mass * k.c;
  switch (model.kind) {
    case DeformationKind::None:
      return 0.0;
    case DeformationKind::Beta:
      return model.bare_strength * k.hbar * s.omega_m * s.mass_kg / (mpc * mpc);
    case DeformationKind::Gamma:
      return model.bare_strength * params.p0() / mpc;
    case DeformationKind::Mu: {
      const double r = s.mass_kg / k.planck_mass;
      return model.bare_strength * r * r;
    }
  }
  return 0.0;
}

Deformation to_dimensionless(const DeformationModel& model, const PhysicalParams& params) {
  return {model.kind, dimensionless_strength(model, params)};
}

NestedCommutators nested_commutators(const Deformation& d) {
  NestedCommutators out;
  const double s = d.strength;
  switch (d.kind) {
    case DeformationKind::None:
      out.c1.c = {1.0, 0.0, 0.0};
      break;
    case DeformationKind::Beta:
      out.c1.c = {1.0, 0.0, s};
      out.c2.c = {0.0, 2.0 * s, 0.0};
      out.c3.c = {2.0 * s, 0.0, 0.0};
      break;
    case DeformationKind::Gamma:
      out.c1.c = {1.0, -s, 0.0};
      out.c2.c = {-s, 0.0, 0.0};
      break;
    case DeformationKind::Mu:
      out.c1.c = {1.0 + s, 0.0, 0.0};
      break;
  }
  return out;
}

MomentumPolynomial loop_phase_polynomial(const Deformation& d, double a) {
  const auto nc = nested_commutators(d);
  MomentumPolynomial out;
  for (int j = 0; j < 3; ++j) {
    out.c[j] = -a * (a * nc.c1.c[j] + a * a * nc.c2.c[j] / 2.0 + a * a * a * nc.c3.c[j] / 6.0);
  }
  return out;
}

MomentumPolynomial commutator_polynomial(const Deformation& d) {
  return nested_commutators(d).c1;
}

void check_strength_regime(const Deformation& d, const StrengthRegime& regime) {
  require_nonnegative(d.strength, "dimensionless strength");
  if (d.kind == DeformationKind::None || d.kind == DeformationKind::Mu) return;
  if (d.strength >= regime.error_limit) {
    throw OutOfRegime("strength < " + compact(regime.error_limit),
                      std::string(to_string(d.kind)) + " = " + compact(d.strength));
  }
}

bool strength_needs_warning(const Deformation& d, const StrengthRegime& regime) {
  return d.kind != DeformationKind::None && d.strength >= regime.warn_limit;
}

FockOperator deformed_momentum(const FockOperator& p, const Deformation& d,
                               const StrengthRegime& regime) {
  check_strength_regime(d, regime);
  const double s = d.strength;
  if (s == 0.0) return p;
  switch (d.kind) {
    case DeformationKind::None:
      return p;
    case DeformationKind::Beta:
      return FockOperator(p.matrix() + (s / 3.0) * (p.matrix() * p.matrix() * p.matrix()),
                          p.hermitian());
    case DeformationKind::Gamma:
      return FockOperator(p.matrix() - (s / 2.0) * (p.matrix() * p.matrix()), p.hermitian());
    case DeformationKind::Mu:
      return (1.0 + s) * p;
  }
  return p;
}

SparseMatrix deformed_momentum(const SparseMatrix& p, const Deformation& d,
                               const StrengthRegime& regime) {
  check_strength_regime(d, regime);
  const double s = d.strength;
  switch (d.kind) {
    case DeformationKind::None:
      return p;
    case DeformationKind::Beta: {
      SparseMatrix p2 = p * p;
      SparseMatrix p3 = p2 * p;
      return SparseMatrix(p + Complex(s / 3.0) * p3);
    }
    case DeformationKind::Gamma: {
      SparseMatrix p2 = p * p;
      return SparseMatrix(p - Complex(s / 2.0) * p2);
    }
    case DeformationKind::Mu:
      return SparseMatrix(Complex(1.0 + s) * p);
  }
  return p;
}

double deformed_momentum_value(double p, const Deformation& d) {
  const double s = d.strength;
  switch (d.kind) {
    case DeformationKind::None: return p;
    case DeformationKind::Beta: return p + s * p * p * p / 3.0;
    case DeformationKind::Gamma: return p - s * p * p / 2.0;
    case DeformationKind::Mu: return (1.0 + s) * p;
  }
  return p;
}

double composite_chi(long long particles, CorrelationRegime regime) {
  if (particles < 1) throw InvalidArgument("composite_chi: particle number must be >= 1");
  const double n = static_cast<double>(particles);
  return regime == CorrelationRegime::Uncorrelated ? 1.0 / n : 1.0 / (n * n);
}

double checked_chi(long long particles, double chi) {
  const double lo = composite_chi(particles, CorrelationRegime::FullyCorrelated);
  const double hi = composite_chi(particles, CorrelationRegime::Uncorrelated);
  if (!(chi >= lo && chi <= hi)) {
    throw InvalidArgument("chi must lie in [1/N^2, 1/N] = [" + std::to_string(lo) + ", " +
                          std::to_string(hi) + "]");
  }
  return chi;
}

}  // namespace cprobe
