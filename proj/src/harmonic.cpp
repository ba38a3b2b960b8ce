// Harmonic-evolution variant of the four-displacement protocol (beta model).
// The momentum coupling is replaced by quarter-period free evolution, which
// under the deformed Hamiltonian adds cubic corrections to each pulse.

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "cprobe/errors.hpp"
#include "cprobe/fit.hpp"
#include "cprobe/protocol.hpp"

namespace cprobe {
namespace {

constexpr double kPrintedCoefficient = std::numbers::pi * 5.0 / 3.0;
constexpr double kAmplitudeTolerance = 1e-8;
constexpr int kMaxWorkingDim = 8192;

void check_beta(double beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw InvalidArgument("beta must be finite and >= 0");
  }
  if (beta >= 1.0) throw OutOfRegime("β < 1", "beta = " + std::to_string(beta));
}

int working_dim(int mech_dim, double a_max) {
  const double r = std::sqrt(static_cast<double>(mech_dim)) + a_max;
  return static_cast<int>(std::ceil(r * r + 8.0 * r + 20.0));
}

// Generators H1..H4 of the pulse sequence, applied right to left.
template <typename M>
std::vector<M> generators(const M& x, const M& p, double beta) {
  const double b = 2.0 * std::numbers::pi * beta;
  const M x3 = x * x * x;
  const M p3 = p * p * p;
  return {x, M(-p + Complex(b / 3.0) * x3), M(-x - Complex(2.0 * b / 3.0) * p3),
          M(p - Complex(b) * x3)};
}

Matrix dense_sequence(const std::vector<Matrix>& gens, double a) {
  Matrix u = hermitian_expi(gens[0], a);
  for (std::size_t k = 1; k < gens.size(); ++k) u = hermitian_expi(gens[k], a) * u;
  return u;
}

Complex vacuum_amplitude(double lambda, double beta, int n, int dim) {
  const auto q = sparse_quadratures(dim);
  const auto gens = generators<SparseMatrix>(q.x, q.p, beta);
  const double a = lambda * n;
  Vector v = Vector::Zero(dim);
  v(0) = 1.0;
  for (const auto& h : gens) v = expi_multiply(h, a, v);
  return v(0) * std::polar(1.0, a * a);
}

}  // namespace

double harmonic_printed_phase(double lambda, double beta, int n) {
  const double a = lambda * n;
  return beta * kPrintedCoefficient * a * a * a * a;
}

HarmonicVariant xi_harmonic_variant(double lambda, double beta, int opt_dim, int mech_dim,
                                    bool check_convergence) {
  check_beta(beta);
  if (opt_dim < 2 || mech_dim < 2) throw InvalidDimension("opt_dim and mech_dim must be >= 2");
  const double a_max = lambda * (opt_dim - 1);
  const int dim = working_dim(mech_dim, a_max);

  std::vector<Matrix> gens;
  {
    const auto q = quadratures(dim);
    gens = generators<Matrix>(q.x.matrix(), q.p.matrix(), beta);
  }
  // One eigendecomposition per generator; blocks differ only in the time a.
  std::vector<Eigen::SelfAdjointEigenSolver<Matrix>> spectra;
  for (const auto& h : gens) spectra.emplace_back(h);

  HarmonicVariant out;
  out.family.lambda = lambda;
  for (int n = 0; n < opt_dim; ++n) {
    const double a = lambda * n;
    Matrix u = Matrix::Identity(dim, dim);
    for (const auto& s : spectra) {
      Vector ph(dim);
      for (int k = 0; k < dim; ++k) ph(k) = std::polar(1.0, a * s.eigenvalues()(k));
      u = s.eigenvectors() * ph.asDiagonal() * s.eigenvectors().adjoint() * u;
    }
    out.family.blocks.push_back(u.topLeftCorner(mech_dim, mech_dim));
    out.printed_phase.push_back(harmonic_printed_phase(lambda, beta, n));
  }

  if (check_convergence) {
    const auto q = quadratures(2 * dim);
    const Matrix ref = dense_sequence(generators<Matrix>(q.x.matrix(), q.p.matrix(), beta), a_max);
    const double diff = max_abs_diff(out.family.blocks.back(), ref, mech_dim);
    if (diff > kAmplitudeTolerance) {
      throw CutoffInsufficient("xi_harmonic_variant: block changes by " + std::to_string(diff) +
                                   " when the working space is doubled",
                               2 * dim);
    }
  }
  return out;
}

double harmonic_vacuum_phase(double lambda, double beta, int n, int dim) {
  check_beta(beta);
  return std::arg(vacuum_amplitude(lambda, beta, n, dim));
}

double harmonic_vacuum_phase(double lambda, double beta, int n) {
  check_beta(beta);
  int dim = working_dim(1, lambda * n);
  Complex z = vacuum_amplitude(lambda, beta, n, dim);
  while (true) {
    const int wider = 2 * dim;
    if (wider > kMaxWorkingDim) {
      throw CutoffInsufficient("harmonic_vacuum_phase: no convergence below working dim " +
                                   std::to_string(kMaxWorkingDim),
                               wider);
    }
    const Complex zw = vacuum_amplitude(lambda, beta, n, wider);
    const bool converged = std::abs(zw - z) < kAmplitudeTolerance;
    z = zw;
    dim = wider;
    if (converged) break;
  }
  return std::arg(z);
}

HarmonicFit fit_harmonic_phase(double lambda, double beta, int n_min, int n_max) {
  if (n_min < 1 || n_max <= n_min) throw InvalidArgument("need 1 <= n_min < n_max");
  std::vector<double> ns, as, phases, scaled;
  for (int n = n_min; n <= n_max; ++n) {
    const double phi = harmonic_vacuum_phase(lambda, beta, n);
    ns.push_back(n);
    as.push_back(lambda * n);
    phases.push_back(phi);
    scaled.push_back(phi / beta);
  }
  HarmonicFit fit;
  fit.exponent = fit_power_exponent(ns, phases);
  const EvenQuarticFit poly = fit_even_quartic(as, scaled);
  fit.quadratic_coefficient = poly.c2;
  fit.quartic_coefficient = poly.c4;
  fit.printed_coefficient = kPrintedCoefficient;
  fit.relative_discrepancy =
      std::abs(fit.quartic_coefficient - kPrintedCoefficient) / kPrintedCoefficient;
  fit.flagged = fit.relative_discrepancy > 0.1;
  return fit;
}

}  // namespace cprobe
