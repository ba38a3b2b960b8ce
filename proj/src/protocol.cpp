#include "cprobe/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "cprobe/errors.hpp"
#include "parallel.hpp"

namespace cprobe {
namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double log_poisson(double mean, int n) {
  if (mean == 0.0) return n == 0 ? 0.0 : -INFINITY;
  return -mean + n * std::log(mean) - std::lgamma(n + 1.0);
}

void require_lambda(double lambda) {
  if (!std::isfinite(lambda) || lambda < 0.0) {
    throw InvalidArgument("interaction strength lambda must be finite and >= 0");
  }
}

// Spectral data of the truncated momentum quadrature, shared by every block
// of the reduced representation.
struct MomentumSpectrum {
  Eigen::VectorXd p;
  Matrix v;

  explicit MomentumSpectrum(int dim) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(quadratures(dim).p.matrix());
    if (solver.info() != Eigen::Success) throw NumericError("momentum eigensolver failed");
    p = solver.eigenvalues();
    v = solver.eigenvectors();
  }

  // Phase of the reduced block at displacement a for each momentum eigenvalue.
  Eigen::VectorXd loop_phases(const Deformation& d, double a) const {
    Eigen::VectorXd out(p.size());
    for (Eigen::Index k = 0; k < p.size(); ++k) {
      out(k) = a * (deformed_momentum_value(p(k), d) - deformed_momentum_value(p(k) + a, d));
    }
    return out;
  }

  Matrix block(const Deformation& d, double a) const {
    const Eigen::VectorXd g = loop_phases(d, a);
    Vector phases(g.size());
    for (Eigen::Index k = 0; k < g.size(); ++k) phases(k) = std::polar(1.0, g(k));
    return v * phases.asDiagonal() * v.adjoint();
  }
};

// Spectral data of a Hermitian generator for repeated exp(i t H).
struct Spectrum {
  Eigen::VectorXd w;
  Matrix v;

  explicit Spectrum(const Matrix& h) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
    if (solver.info() != Eigen::Success) throw NumericError("eigensolver failed");
    w = solver.eigenvalues();
    v = solver.eigenvectors();
  }

  Matrix expi(double t) const {
    Vector phases(w.size());
    for (Eigen::Index k = 0; k < w.size(); ++k) phases(k) = std::polar(1.0, t * w(k));
    return v * phases.asDiagonal() * v.adjoint();
  }
};

int literal_working_dim(int mech_dim, double a_max) {
  const double r = std::sqrt(static_cast<double>(mech_dim)) + a_max;
  return static_cast<int>(std::ceil(r * r + 8.0 * r + 20.0));
}

std::vector<Matrix> literal_blocks(const Deformation& d, double lambda, int opt_dim, int mech_dim,
                                   int working_dim, int jobs) {
  const auto q = quadratures(working_dim);
  const Spectrum sx(q.x.matrix());
  const Spectrum sp(deformed_momentum(q.p, d).matrix());
  std::vector<Matrix> blocks(opt_dim);
  detail::parallel_for(opt_dim, jobs, [&](int n) {
    const double a = lambda * n;
    const Matrix u = sp.expi(a) * sx.expi(-a) * sp.expi(-a) * sx.expi(a);
    blocks[n] = u.topLeftCorner(mech_dim, mech_dim);
  });
  return blocks;
}

std::vector<Matrix> reduced_blocks(const Deformation& d, double lambda, int opt_dim,
                                   int mech_dim, int jobs) {
  const MomentumSpectrum spec(mech_dim);
  std::vector<Matrix> blocks(opt_dim);
  detail::parallel_for(opt_dim, jobs,
                       [&](int n) { blocks[n] = spec.block(d, lambda * n); });
  return blocks;
}

void validate_dims(int opt_dim, int mech_dim) {
  if (opt_dim < 2 || mech_dim < 2) {
    throw InvalidDimension("opt_dim and mech_dim must be >= 2");
  }
}

// Sum over photon numbers of sqrt(n+1) conj(c_n) c_{n+1} tr(xi(n+1) rho xi(n)^dagger).
Complex mean_field_once(Complex alpha, double nbar, double lambda, const Deformation& d,
                        int opt_dim, int mech_dim, const OracleOptions& options) {
  const Vector c = coherent_state(alpha, opt_dim).amplitudes();
  const Matrix rho = thermal_state(nbar, mech_dim).density();

  Complex total = 0.0;
  if (options.method == XiMethod::Reduced) {
    const MomentumSpectrum spec(mech_dim);
    // rho is diagonal in the number basis; weights in the momentum eigenbasis.
    Eigen::VectorXd q(mech_dim);
    for (int k = 0; k < mech_dim; ++k) {
      double s = 0.0;
      for (int j = 0; j < mech_dim; ++j) s += rho(j, j).real() * std::norm(spec.v(j, k));
      q(k) = s;
    }
    std::vector<Eigen::VectorXd> phases(opt_dim);
    detail::parallel_for(opt_dim, options.jobs,
                         [&](int n) { phases[n] = spec.loop_phases(d, lambda * n); });
    for (int n = 0; n + 1 < opt_dim; ++n) {
      Complex tr = 0.0;
      for (int k = 0; k < mech_dim; ++k) tr += q(k) * std::polar(1.0, phases[n + 1](k) - phases[n](k));
      total += std::sqrt(n + 1.0) * std::conj(c(n)) * c(n + 1) * tr;
    }
    return total;
  }

  const XiFamily fam = xi_exact(d, lambda, opt_dim, mech_dim,
                                {XiMethod::Literal, options.check_convergence,
                                 options.convergence_tolerance, options.jobs});
  for (int n = 0; n + 1 < opt_dim; ++n) {
    const Complex tr = (fam.blocks[n + 1] * rho * fam.blocks[n].adjoint()).trace();
    total += std::sqrt(n + 1.0) * std::conj(c(n)) * c(n + 1) * tr;
  }
  return total;
}

}  // namespace

Complex mean_field_qm(double alpha, double lambda, double photons) {
  const double l2 = lambda * lambda;
  const double s = std::sin(l2);
  // 1 - exp(-2 i l2) = 2 sin^2(l2) + i sin(2 l2), written to avoid cancellation.
  const Complex one_minus = {2.0 * s * s, std::sin(2.0 * l2)};
  return alpha * std::exp(Complex(0.0, -l2) - photons * one_minus);
}

Complex mean_field_qm(double alpha, double lambda) {
  return mean_field_qm(alpha, lambda, alpha * alpha);
}

double consistent_photon_number(double alpha, double photons) {
  if (std::abs(photons - alpha * alpha) >= 1e-6 * photons) {
    throw InvalidArgument("photon number N_p = " + fmt(photons) +
                          " is inconsistent with alpha^2 = " + fmt(alpha * alpha));
  }
  return photons;
}

Complex theta_closed_form(const Deformation& d, double photons, double lambda) {
  const double s = d.strength;
  const double l2 = lambda * lambda;
  switch (d.kind) {
    case DeformationKind::None:
      return 0.0;
    case DeformationKind::Beta:
      return (4.0 / 3.0) * s * std::pow(photons, 3) * l2 * l2 * std::polar(1.0, -6.0 * l2);
    case DeformationKind::Gamma:
      return 1.5 * s * photons * photons * l2 * lambda * std::polar(1.0, -4.0 * l2);
    case DeformationKind::Mu:
      return 2.0 * s * photons * l2 * std::polar(1.0, -2.0 * l2);
  }
  return 0.0;
}

Complex theta(const DeformationModel& model, const PhysicalParams& params,
              const RegimeThresholds& thr) {
  const Deformation d = to_dimensionless(model, params);
  check_strength_regime(d, thr.strength);
  const double lambda = params.lambda();
  const double photons = params.spec().photons_per_pulse;
  const double nbar = params.spec().nbar;
  if (!(lambda < 1.0)) throw OutOfRegime("λ < 1", "lambda = " + fmt(lambda));
  if (!(1.0 <= thr.much_less * photons)) {
    throw OutOfRegime("N_p ≫ 1", "N_p = " + fmt(photons));
  }
  if (!(nbar <= thr.much_less * lambda * photons)) {
    throw OutOfRegime("n̄ ≪ λN_p",
                      "nbar = " + fmt(nbar) + ", lambda N_p = " + fmt(lambda * photons));
  }
  const Complex t = theta_closed_form(d, photons, lambda);
  if (!(std::abs(t) <= thr.much_less)) {
    throw OutOfRegime("|Θ| ≪ 1", "|Theta| = " + fmt(std::abs(t)));
  }
  return t;
}

ProtocolOutcome analytic_outcome(const DeformationModel& model, const PhysicalParams& params,
                                 const RegimeThresholds& thr) {
  const double photons = params.spec().photons_per_pulse;
  const double alpha = std::sqrt(photons);
  ProtocolOutcome out;
  out.theta = theta(model, params, thr);
  out.mean_field_qm = mean_field_qm(alpha, params.lambda(), photons);
  out.mean_field = out.mean_field_qm * std::exp(Complex(0.0, -1.0) * out.theta);
  out.phi = -std::arg(out.mean_field / alpha);
  return out;
}

double expansion_phase(const Deformation& d, double a, double nbar) {
  const MomentumPolynomial poly = loop_phase_polynomial(d, a);
  // Thermal state: <P> = 0, <P^2> = nbar + 1/2.
  return poly.c[0] + poly.c[2] * (nbar + 0.5);
}

Complex theta_linear_response(const Deformation& d, double alpha, double lambda, double nbar) {
  require_lambda(lambda);
  const double mean = alpha * alpha;
  const int n_max = static_cast<int>(std::ceil(mean + 12.0 * std::sqrt(mean) + 60.0));
  const double l2 = lambda * lambda;
  Complex sum_w = 0.0;
  Complex sum_wd = 0.0;
  for (int n = 0; n <= n_max; ++n) {
    const Complex w = std::exp(log_poisson(mean, n)) * std::polar(1.0, -l2 * (2.0 * n + 1.0));
    const double delta = expansion_phase(d, lambda * (n + 1), nbar) -
                         expansion_phase(d, lambda * n, nbar) + l2 * (2.0 * n + 1.0);
    sum_w += w;
    sum_wd += w * delta;
  }
  return -sum_wd / sum_w;
}

XiFamily xi_exact(const Deformation& d, double lambda, int opt_dim, int mech_dim,
                  const OracleOptions& options) {
  require_lambda(lambda);
  validate_dims(opt_dim, mech_dim);
  check_strength_regime(d);
  XiFamily fam;
  fam.lambda = lambda;
  const double a_max = lambda * (opt_dim - 1);

  if (options.method == XiMethod::Reduced) {
    fam.blocks = reduced_blocks(d, lambda, opt_dim, mech_dim, options.jobs);
    if (options.check_convergence) {
      const MomentumSpectrum wide(2 * mech_dim);
      const Matrix ref = wide.block(d, a_max);
      const double diff = max_abs_diff(fam.blocks.back(), ref, mech_dim / 2);
      if (diff > options.convergence_tolerance) {
        throw CutoffInsufficient("xi_exact: block changes by " + fmt(diff) +
                                     " when mech_dim is doubled",
                                 2 * mech_dim);
      }
    }
    return fam;
  }

  const int working = literal_working_dim(mech_dim, a_max);
  fam.blocks = literal_blocks(d, lambda, opt_dim, mech_dim, working, options.jobs);
  if (options.check_convergence) {
    const auto q = quadratures(2 * working);
    const Spectrum sx(q.x.matrix());
    const Spectrum sp(deformed_momentum(q.p, d).matrix());
    const Matrix ref = sp.expi(a_max) * sx.expi(-a_max) * sp.expi(-a_max) * sx.expi(a_max);
    const double diff = max_abs_diff(fam.blocks.back(), ref, mech_dim);
    if (diff > options.convergence_tolerance) {
      throw CutoffInsufficient("xi_exact: literal block changes by " + fmt(diff) +
                                   " when the working space is doubled",
                               2 * working);
    }
  }
  return fam;
}

double xi_vacuum_phase(const Deformation& d, double lambda, int n, int mech_dim,
                       XiMethod method) {
  require_lambda(lambda);
  check_strength_regime(d);
  if (n < 0) throw InvalidArgument("photon number must be >= 0");
  const double a = lambda * n;
  Complex z;
  if (method == XiMethod::Reduced) {
    const MomentumSpectrum spec(mech_dim);
    const Eigen::VectorXd g = spec.loop_phases(d, a);
    z = 0.0;
    for (int k = 0; k < mech_dim; ++k) z += std::norm(spec.v(0, k)) * std::polar(1.0, g(k));
  } else {
    const int working = literal_working_dim(mech_dim, a);
    const auto q = quadratures(working);
    const Spectrum sx(q.x.matrix());
    const Spectrum sp(deformed_momentum(q.p, d).matrix());
    const Matrix u = sp.expi(a) * sx.expi(-a) * sp.expi(-a) * sx.expi(a);
    z = u(0, 0);
  }
  return std::arg(z * std::polar(1.0, a * a));
}

Complex mean_field_numeric(Complex alpha, double nbar, double lambda, const Deformation& d,
                           int opt_dim, int mech_dim, const OracleOptions& options) {
  require_lambda(lambda);
  validate_dims(opt_dim, mech_dim);
  check_strength_regime(d);
  OracleOptions inner = options;
  inner.check_convergence = false;
  const Complex value = mean_field_once(alpha, nbar, lambda, d, opt_dim, mech_dim, inner);
  if (options.check_convergence) {
    const Complex wide =
        mean_field_once(alpha, nbar, lambda, d, 2 * opt_dim, 2 * mech_dim, inner);
    const double scale = std::max(std::abs(value), 1e-300);
    const double change = std::abs(wide - value) / scale;
    if (change > options.convergence_tolerance) {
      throw CutoffInsufficient("mean_field_numeric: relative change " + fmt(change) +
                                   " when both cutoffs are doubled",
                               2 * std::max(opt_dim, mech_dim));
    }
  }
  return value;
}

Matrix mechanical_output_state(Complex alpha, double nbar, double lambda, const Deformation& d,
                               int opt_dim, int mech_dim, const OracleOptions& options) {
  const Vector c = coherent_state(alpha, opt_dim).amplitudes();
  const Matrix rho = thermal_state(nbar, mech_dim).density();
  const XiFamily fam = xi_exact(d, lambda, opt_dim, mech_dim, options);
  Matrix out = Matrix::Zero(mech_dim, mech_dim);
  for (int n = 0; n < opt_dim; ++n) {
    out += std::norm(c(n)) * fam.blocks[n] * rho * fam.blocks[n].adjoint();
  }
  return out;
}

}  // namespace cprobe
