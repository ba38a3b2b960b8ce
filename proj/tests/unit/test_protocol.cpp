#include <doctest.h>

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "cprobe/errors.hpp"
#include "cprobe/fit.hpp"
#include "cprobe/protocol.hpp"

using namespace cprobe;

namespace {

ExperimentSpec mu_column() {
  ExperimentSpec s;
  s.mass_kg = 1e-11;
  s.omega_m = 2.0 * std::numbers::pi * 1e5;
  s.finesse = 1e5;
  s.wavelength_m = 1064e-9;
  s.photons_per_pulse = 1e8;
  return s;
}

ExperimentSpec beta_column() {
  ExperimentSpec s = mu_column();
  s.mass_kg = 1e-7;
  s.finesse = 4e5;
  s.wavelength_m = 532e-9;
  s.photons_per_pulse = 1e14;
  s.runs = 1e6;
  return s;
}

Complex relative_shift(const Deformation& d, double alpha, double lambda, double nbar, int opt,
                       int mech) {
  const Complex num = mean_field_numeric(alpha, nbar, lambda, d, opt, mech);
  const Complex ref = mean_field_numeric(alpha, nbar, lambda, Deformation::none(), opt, mech);
  return num / ref;
}

}  // namespace

TEST_CASE("undeformed mean field closed form") {
  CHECK(std::abs(mean_field_qm(2.0, 0.0) - Complex(2.0, 0.0)) < 1e-15);
  // Kerr revival: lambda^2 = pi brings the magnitude back to alpha.
  const double lambda = std::sqrt(std::numbers::pi);
  CHECK(std::abs(mean_field_qm(3.0, lambda)) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(std::abs(mean_field_qm(2.0, 0.3, 4.0) - mean_field_qm(2.0, 0.3)) < 1e-15);
  CHECK(consistent_photon_number(2.0, 4.0) == 4.0);
  CHECK_THROWS_AS(consistent_photon_number(2.0, 4.1), InvalidArgument);
}

TEST_CASE("oracle matches the undeformed closed form") {
  const Complex num = mean_field_numeric(2.0, 0.0, 0.3, Deformation::none(), 48, 8);
  const Complex ref = mean_field_qm(2.0, 0.3, 4.0);
  CHECK(std::abs(num - ref) / std::abs(ref) < 1e-8);

  CHECK(std::abs(mean_field_numeric(1.5, 1.0, 0.0, Deformation::none(), 32, 40) -
                 Complex(1.5, 0.0)) < 1e-10);

  for (double nbar : {0.0, 1.0, 2.0}) {
    const Complex n2 = mean_field_numeric(4.0, nbar, 0.5, Deformation::none(), 48, 64);
    const Complex r2 = mean_field_qm(4.0, 0.5, 16.0);
    CHECK(std::abs(n2 - r2) / std::abs(r2) < 1e-8);
  }
}

TEST_CASE("xi family structure") {
  const double lambda = 0.3;
  const XiFamily none = xi_exact(Deformation::none(), lambda, 8, 24);
  REQUIRE(none.blocks.size() == 8);
  CHECK(max_abs_diff(none.blocks[0], Matrix::Identity(24, 24), 24) < 1e-12);
  for (int n = 1; n < 8; ++n) {
    const Matrix expected =
        std::polar(1.0, -lambda * lambda * n * n) * Matrix::Identity(24, 24);
    CHECK(max_abs_diff(none.blocks[n], expected, 20) < 1e-10);
  }

  // Reduced and literal constructions agree.
  const Deformation beta{DeformationKind::Beta, 1e-3};
  OracleOptions literal;
  literal.method = XiMethod::Literal;
  const XiFamily a = xi_exact(beta, lambda, 6, 12);
  const XiFamily b = xi_exact(beta, lambda, 6, 12, literal);
  // The literal product loses accuracy near the truncation edge, so compare the lower half.
  for (int n = 0; n < 6; ++n) CHECK(max_abs_diff(a.blocks[n], b.blocks[n], 6) < 1e-12);

  // Block unitarity on the interior.
  for (const auto& blk : a.blocks) {
    CHECK(max_abs_diff(blk.adjoint() * blk, Matrix::Identity(12, 12), 8) < 1e-8);
  }

  // Results do not depend on the worker count.
  OracleOptions parallel;
  parallel.jobs = 3;
  const XiFamily c = xi_exact(beta, lambda, 6, 12, parallel);
  for (int n = 0; n < 6; ++n) CHECK(max_abs_diff(a.blocks[n], c.blocks[n], 12) == 0.0);
}

TEST_CASE("vacuum phase follows the nested-commutator expansion") {
  const double lambda = 0.2;
  for (auto kind : {DeformationKind::Beta, DeformationKind::Gamma, DeformationKind::Mu}) {
    const double s = 1e-4;
    for (int n : {2, 5, 8}) {
      const double a = lambda * n;
      const double phase = xi_vacuum_phase({kind, s}, lambda, n, 48);
      const double predicted = expansion_phase({kind, s}, a, 0.0) + a * a;
      CHECK(std::abs(phase - predicted) < 10.0 * s * s * std::pow(1.0 + a, 8) + 1e-12);
    }
  }
}

TEST_CASE("first-order response is linear and matches the linear-response theta") {
  const double alpha = 3.0, lambda = 0.2;
  const Deformation beta{DeformationKind::Beta, 1e-3};
  const Complex r1 = relative_shift(beta, alpha, lambda, 0.0, 40, 24);
  const Complex r2 = relative_shift({DeformationKind::Beta, 2e-3}, alpha, lambda, 0.0, 40, 24);
  const double phase1 = std::arg(r1), phase2 = std::arg(r2);
  CHECK(std::abs(phase2 / phase1 - 2.0) < 0.02);

  const Complex th = theta_linear_response(beta, alpha, lambda, 0.0);
  CHECK(phase1 == doctest::Approx(-th.real()).epsilon(0.02));

  for (auto kind : {DeformationKind::Gamma, DeformationKind::Mu}) {
    const Deformation d{kind, 1e-3};
    const Complex rr = relative_shift(d, alpha, lambda, 1.0, 40, 40);
    const Complex lr = std::exp(Complex(0.0, -1.0) * theta_linear_response(d, alpha, lambda, 1.0));
    CHECK(std::abs((rr - 1.0) - (lr - 1.0)) / std::abs(lr - 1.0) < 0.02);
  }
}

TEST_CASE("linear-response theta approaches the closed forms at large N") {
  const double lambda = 0.01;
  const double alpha = 100.0;
  for (auto kind : {DeformationKind::Beta, DeformationKind::Mu}) {
    const Deformation d{kind, 1e-6};
    const Complex lr = theta_linear_response(d, alpha, lambda, 0.0);
    const Complex cf = theta_closed_form(d, alpha * alpha, lambda);
    CHECK(std::abs(lr - cf) / std::abs(cf) < 0.01);
  }
  // The constant +gamma a^3 / 2 in xi_gamma rotates the mean the other way
  // from the quoted closed form; magnitudes agree.
  const Deformation g{DeformationKind::Gamma, 1e-6};
  const Complex lr = theta_linear_response(g, alpha, lambda, 0.0);
  const Complex cf = theta_closed_form(g, alpha * alpha, lambda);
  CHECK(std::abs(lr + cf) / std::abs(cf) < 0.01);
}

TEST_CASE("closed-form photon-number scaling") {
  const double lambda = 0.1;
  const Deformation b{DeformationKind::Beta, 1e-6}, g{DeformationKind::Gamma, 1e-6},
      m{DeformationKind::Mu, 1e-6};
  CHECK(std::abs(theta_closed_form(b, 2e4, lambda) / theta_closed_form(b, 1e4, lambda)) ==
        doctest::Approx(8.0).epsilon(1e-14));
  CHECK(std::abs(theta_closed_form(g, 2e4, lambda) / theta_closed_form(g, 1e4, lambda)) ==
        doctest::Approx(4.0).epsilon(1e-14));
  CHECK(std::abs(theta_closed_form(m, 2e4, lambda) / theta_closed_form(m, 1e4, lambda)) ==
        doctest::Approx(2.0).epsilon(1e-14));
  CHECK(theta_closed_form(Deformation::none(), 1e4, lambda) == Complex(0.0, 0.0));
  // Phase factors e^{-6i lambda^2}, e^{-4i lambda^2}, e^{-2i lambda^2}.
  CHECK(std::arg(theta_closed_form(b, 1e4, lambda)) == doctest::Approx(-6.0 * lambda * lambda));
  CHECK(std::arg(theta_closed_form(g, 1e4, lambda)) == doctest::Approx(-4.0 * lambda * lambda));
  CHECK(std::arg(theta_closed_form(m, 1e4, lambda)) == doctest::Approx(-2.0 * lambda * lambda));
}

TEST_CASE("theta on experimental parameters and its regime guards") {
  const PhysicalParams mu(mu_column());
  const Complex t = theta(DeformationModel::mu(1.0), mu);
  CHECK(std::abs(t) > 0.5e-4);
  CHECK(std::abs(t) < 2e-4);
  CHECK(theta(DeformationModel::mu(0.0), mu) == Complex(0.0, 0.0));

  const PhysicalParams beta(beta_column());
  const double tb = std::abs(theta(DeformationModel::beta(1.0), beta));
  CHECK(tb > 1e-10 / 3.0);
  CHECK(tb < 3e-10);

  const ProtocolOutcome out = analytic_outcome(DeformationModel::none(), mu);
  CHECK(out.theta == Complex(0.0, 0.0));
  CHECK(out.mean_field == out.mean_field_qm);

  const auto expect_violation = [](const ExperimentSpec& spec, const DeformationModel& model,
                                   const std::string& inequality) {
    try {
      theta(model, PhysicalParams(spec));
      FAIL("expected OutOfRegime for " << inequality);
    } catch (const OutOfRegime& e) {
      CHECK(e.inequality() == inequality);
    }
  };
  ExperimentSpec strong = mu_column();
  strong.finesse = 1e8;  // lambda ~ 1.5
  expect_violation(strong, DeformationModel::mu(1.0), "λ < 1");
  ExperimentSpec few = mu_column();
  few.photons_per_pulse = 5.0;
  expect_violation(few, DeformationModel::mu(1.0), "N_p ≫ 1");
  ExperimentSpec hot = mu_column();
  hot.nbar = 1e5;
  expect_violation(hot, DeformationModel::mu(1.0), "n̄ ≪ λN_p");
  expect_violation(mu_column(), DeformationModel::mu(1e4), "|Θ| ≪ 1");
  expect_violation(mu_column(), DeformationModel::beta(1e80), "strength < 1");
}

TEST_CASE("mechanical state is unaffected without deformation") {
  const Matrix out = mechanical_output_state(2.0, 1.0, 0.3, Deformation::none(), 40, 40);
  const Matrix in = thermal_state(1.0, 40).density();
  CHECK(trace_distance(out, in) < 1e-8);
}

TEST_CASE("cutoff insufficiency is reported") {
  CHECK_THROWS_AS(mean_field_numeric(2.0, 2.0, 0.3, Deformation::none(), 40, 4), CutoffInsufficient);
  CHECK_THROWS_AS(mean_field_numeric(4.0, 0.0, 0.3, Deformation::none(), 8, 16), CutoffInsufficient);
}

TEST_CASE("harmonic variant") {
  // beta = 0 collapses to the undeformed loop up to the free-evolution phase.
  const HarmonicVariant zero = xi_harmonic_variant(0.2, 0.0, 5, 8);
  for (int n = 0; n < 5; ++n) {
    const Matrix blk = zero.family.blocks[n];
    CHECK(max_abs_diff(blk.adjoint() * blk, Matrix::Identity(8, 8), 6) < 1e-8);
  }
  CHECK(std::abs(harmonic_vacuum_phase(0.2, 0.0, 6)) < 1e-10);

  // Linear in beta.
  const double p1 = harmonic_vacuum_phase(0.2, 1e-4, 8);
  const double p2 = harmonic_vacuum_phase(0.2, 2e-4, 8);
  CHECK(std::abs(p2 / p1 - 2.0) < 0.02);

  // The dense family and the sparse vacuum propagation agree.
  const HarmonicVariant v = xi_harmonic_variant(0.2, 1e-4, 6, 6);
  const Complex vac = v.family.blocks[5](0, 0) * std::polar(1.0, 0.04 * 25.0);
  CHECK(std::arg(vac) == doctest::Approx(harmonic_vacuum_phase(0.2, 1e-4, 5)).epsilon(1e-3));
  CHECK(v.printed_phase[5] == doctest::Approx(1e-4 * std::numbers::pi * 5.0 / 3.0 * 1.0));

  CHECK_THROWS_AS(harmonic_vacuum_phase(0.2, 1.5, 4), OutOfRegime);
}

TEST_CASE("fit helpers") {
  std::vector<double> x{1, 2, 4, 8}, y;
  for (double v : x) y.push_back(3.0 * v * v * v);
  CHECK(fit_power_exponent(x, y) == doctest::Approx(3.0).epsilon(1e-12));
  std::vector<double> z;
  for (double v : x) z.push_back(2.0 * v * v - 0.5 * v * v * v * v);
  const auto f = fit_even_quartic(x, z);
  CHECK(f.c2 == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(f.c4 == doctest::Approx(-0.5).epsilon(1e-9));
}
