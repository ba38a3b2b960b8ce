#include "cprobe/fock.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "cprobe/errors.hpp"

namespace cprobe {
namespace {

void require_dim(int dim) {
  if (dim < 2) throw InvalidDimension("Fock dimension must be >= 2, got " + std::to_string(dim));
}

void require_same_dim(int a, int b, const char* where) {
  if (a != b) {
    throw DimensionMismatch(std::string(where) + ": dimension mismatch (" + std::to_string(a) +
                            " vs " + std::to_string(b) + ")");
  }
}

// log of the Poisson weight e^{-N} N^n / n!
double log_poisson(double mean, int n) {
  if (mean == 0.0) return n == 0 ? 0.0 : -INFINITY;
  return -mean + n * std::log(mean) - std::lgamma(n + 1.0);
}

double poisson_tail(double mean, int from) {
  double tail = 0.0;
  for (int n = from;; ++n) {
    const double w = std::exp(log_poisson(mean, n));
    tail += w;
    if (n > mean && w < 1e-20 * std::max(tail, 1e-300)) break;
    if (n > from + 100000) break;
  }
  return tail;
}

}  // namespace

FockOperator::FockOperator(Matrix entries, bool hermitian)
    : m_(std::move(entries)), hermitian_(hermitian) {
  if (m_.rows() != m_.cols()) throw InvalidDimension("FockOperator: matrix is not square");
  require_dim(static_cast<int>(m_.rows()));
  if (hermitian_) {
    const double dev = (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
    if (dev > kHermitianTolerance) {
      throw InvalidArgument("FockOperator flagged Hermitian deviates by " + std::to_string(dev));
    }
  }
}

FockOperator FockOperator::identity(int dim) {
  require_dim(dim);
  return FockOperator(Matrix::Identity(dim, dim), true);
}

FockOperator FockOperator::adjoint() const { return FockOperator(m_.adjoint(), hermitian_); }

FockOperator operator+(const FockOperator& a, const FockOperator& b) {
  require_same_dim(a.dim(), b.dim(), "operator+");
  return FockOperator(a.m_ + b.m_, a.hermitian_ && b.hermitian_);
}

FockOperator operator-(const FockOperator& a, const FockOperator& b) {
  require_same_dim(a.dim(), b.dim(), "operator-");
  return FockOperator(a.m_ - b.m_, a.hermitian_ && b.hermitian_);
}

FockOperator operator*(const FockOperator& a, const FockOperator& b) {
  require_same_dim(a.dim(), b.dim(), "operator*");
  return FockOperator(a.m_ * b.m_);
}

FockOperator operator*(double s, const FockOperator& a) {
  return FockOperator(s * a.m_, a.hermitian_);
}

FockOperator operator*(Complex s, const FockOperator& a) { return FockOperator(s * a.m_); }

FockOperator commutator(const FockOperator& a, const FockOperator& b) { return a * b - b * a; }

FockState FockState::pure(Vector amplitudes) {
  require_dim(static_cast<int>(amplitudes.size()));
  const double defect = std::abs(amplitudes.norm() - 1.0);
  if (defect > kStateTailTolerance) {
    throw InvalidArgument("pure state norm deviates from 1 by " + std::to_string(defect));
  }
  return FockState(std::move(amplitudes));
}

FockState FockState::mixed(Matrix density) {
  if (density.rows() != density.cols()) throw DimensionMismatch("density matrix is not square");
  require_dim(static_cast<int>(density.rows()));
  const double trace_defect = std::abs(density.trace() - Complex(1.0));
  if (trace_defect > kStateTailTolerance) {
    throw InvalidArgument("density matrix trace deviates from 1 by " +
                          std::to_string(trace_defect));
  }
  if ((density - density.adjoint()).cwiseAbs().maxCoeff() > kStateTailTolerance) {
    throw InvalidArgument("density matrix is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(density, Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < -kStateTailTolerance) {
    throw InvalidArgument("density matrix has a negative eigenvalue");
  }
  return FockState(std::move(density));
}

int FockState::dim() const {
  return std::visit([](const auto& d) { return static_cast<int>(d.rows()); }, data_);
}

const Vector& FockState::amplitudes() const {
  if (!is_pure()) throw InvalidArgument("amplitudes() called on a mixed state");
  return std::get<Vector>(data_);
}

Matrix FockState::density() const {
  if (is_pure()) {
    const auto& v = std::get<Vector>(data_);
    return v * v.adjoint();
  }
  return std::get<Matrix>(data_);
}

std::pair<FockOperator, FockOperator> ladder(int dim) {
  require_dim(dim);
  Matrix a = Matrix::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  Matrix ad = a.adjoint();
  return {FockOperator(std::move(a)), FockOperator(std::move(ad))};
}

FockOperator number_operator(int dim) {
  require_dim(dim);
  Matrix n = Matrix::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) n(k, k) = static_cast<double>(k);
  return FockOperator(std::move(n), true);
}

Quadratures quadratures(int dim) {
  const auto [a, ad] = ladder(dim);
  const double r = 1.0 / std::sqrt(2.0);
  Matrix x = r * (a.matrix() + ad.matrix());
  Matrix p = (-kI * r) * (a.matrix() - ad.matrix());
  return {FockOperator(std::move(x), true), FockOperator(std::move(p), true)};
}

int coherent_cutoff(Complex alpha) {
  const double r = std::abs(alpha);
  return static_cast<int>(std::ceil(r * r + 8.0 * r + 20.0));
}

int thermal_cutoff(double nbar) { return static_cast<int>(std::ceil(20.0 * (nbar + 1.0))); }

FockState coherent_state(Complex alpha, int dim) {
  require_dim(dim);
  if (!std::isfinite(alpha.real()) || !std::isfinite(alpha.imag())) {
    throw InvalidArgument("coherent_state: non-finite amplitude");
  }
  const double mean = std::norm(alpha);
  const double tail = poisson_tail(mean, dim);
  if (tail > kStateTailTolerance) {
    int needed = dim;
    while (poisson_tail(mean, needed) > kStateTailTolerance) ++needed;
    throw CutoffInsufficient("coherent_state: truncated norm defect " + std::to_string(tail) +
                                 " for |alpha|^2 = " + std::to_string(mean),
                             needed);
  }
  Vector c = Vector::Zero(dim);
  const double phase = std::arg(alpha);
  for (int n = 0; n < dim; ++n) {
    const double mag = std::exp(0.5 * log_poisson(mean, n));
    c(n) = std::polar(mag, n * phase);
  }
  c /= c.norm();
  return FockState::pure(std::move(c));
}

FockState thermal_state(double nbar, int dim) {
  require_dim(dim);
  if (!(nbar >= 0.0) || !std::isfinite(nbar)) {
    throw InvalidArgument("thermal_state: occupation must be finite and >= 0");
  }
  Matrix rho = Matrix::Zero(dim, dim);
  if (nbar == 0.0) {
    rho(0, 0) = 1.0;
    return FockState::mixed(std::move(rho));
  }
  const double ratio = nbar / (1.0 + nbar);
  const double tail = std::pow(ratio, dim);
  if (tail > kStateTailTolerance) {
    const int needed =
        static_cast<int>(std::ceil(std::log(kStateTailTolerance) / std::log(ratio)));
    throw CutoffInsufficient("thermal_state: tail weight " + std::to_string(tail) +
                                 " for nbar = " + std::to_string(nbar),
                             needed);
  }
  double total = 0.0;
  std::vector<double> w(dim);
  for (int n = 0; n < dim; ++n) {
    w[n] = std::pow(ratio, n);
    total += w[n];
  }
  for (int n = 0; n < dim; ++n) rho(n, n) = w[n] / total;
  return FockState::mixed(std::move(rho));
}

FockOperator matrix_exp(const FockOperator& m) { return FockOperator(expm(m.matrix())); }

Matrix hermitian_expi(const Matrix& h, double t) {
  if (!h.allFinite()) throw NumericError("hermitian_expi: non-finite entries");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
  if (solver.info() != Eigen::Success) throw NumericError("hermitian_expi: eigensolver failed");
  const Eigen::VectorXd& w = solver.eigenvalues();
  Vector phases(w.size());
  for (Eigen::Index k = 0; k < w.size(); ++k) phases(k) = std::polar(1.0, t * w(k));
  const Matrix& v = solver.eigenvectors();
  return v * phases.asDiagonal() * v.adjoint();
}

FockOperator displacement(Complex z, int dim) {
  const auto q = quadratures(dim);
  const Matrix gen = z.real() * q.x.matrix() - z.imag() * q.p.matrix();
  return FockOperator(expm(kI * gen));
}

Complex expect(const FockOperator& op, const FockState& state) {
  require_same_dim(op.dim(), state.dim(), "expect");
  if (state.is_pure()) {
    const auto& v = state.amplitudes();
    return v.dot(op.matrix() * v);
  }
  return (state.density() * op.matrix()).trace();
}

double trace_distance(const Matrix& a, const Matrix& b) {
  require_same_dim(static_cast<int>(a.rows()), static_cast<int>(b.rows()), "trace_distance");
  const Matrix d = a - b;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (d + d.adjoint()), Eigen::EigenvaluesOnly);
  return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

double max_abs_diff(const Matrix& a, const Matrix& b, int block) {
  const Eigen::Index k = std::min<Eigen::Index>({block, a.rows(), b.rows()});
  return (a.topLeftCorner(k, k) - b.topLeftCorner(k, k)).cwiseAbs().maxCoeff();
}

SparseQuadratures sparse_quadratures(int dim) {
  require_dim(dim);
  std::vector<Eigen::Triplet<Complex>> xt, pt;
  const double r = 1.0 / std::sqrt(2.0);
  for (int n = 1; n < dim; ++n) {
    const double s = r * std::sqrt(static_cast<double>(n));
    xt.emplace_back(n - 1, n, s);
    xt.emplace_back(n, n - 1, s);
    pt.emplace_back(n - 1, n, -kI * s);
    pt.emplace_back(n, n - 1, kI * s);
  }
  SparseQuadratures q{SparseMatrix(dim, dim), SparseMatrix(dim, dim)};
  q.x.setFromTriplets(xt.begin(), xt.end());
  q.p.setFromTriplets(pt.begin(), pt.end());
  return q;
}

Vector expi_multiply(const SparseMatrix& h, double t, const Vector& v) {
  if (h.rows() != h.cols() || h.cols() != v.size()) {
    throw DimensionMismatch("expi_multiply: operand dimensions disagree");
  }
  double norm = 0.0;
  for (int k = 0; k < h.outerSize(); ++k) {
    double col = 0.0;
    for (SparseMatrix::InnerIterator it(h, k); it; ++it) col += std::abs(it.value());
    norm = std::max(norm, col);
  }
  norm *= std::abs(t);
  if (!std::isfinite(norm)) throw NumericError("expi_multiply: non-finite generator");
  // Each sub-step has ||i t H / steps||_1 <= 2, so the series needs at most ~40 terms.
  const int steps = std::max(1, static_cast<int>(std::ceil(norm / 2.0)));
  const Complex factor = kI * (t / steps);
  Vector w = v;
  for (int s = 0; s < steps; ++s) {
    Vector term = w;
    Vector acc = w;
    int small = 0;
    for (int k = 1; k <= 80; ++k) {
      term = (factor / static_cast<double>(k)) * (h * term);
      acc += term;
      small = term.norm() <= 1e-17 * acc.norm() ? small + 1 : 0;
      if (small == 2) break;
    }
    w = std::move(acc);
  }
  return w;
}

}  // namespace cprobe
