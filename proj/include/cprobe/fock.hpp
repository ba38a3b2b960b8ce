#pragma once

// Truncated Fock-space linear algebra. All operators are dense complex
// matrices on span{|0>, ..., |dim-1>}, dimensionless.

#include <complex>
#include <utility>
#include <variant>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace cprobe {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using SparseMatrix = Eigen::SparseMatrix<Complex>;

inline constexpr Complex kI{0.0, 1.0};

/// Largest allowed truncated-norm (or trace) defect of a prepared state.
inline constexpr double kStateTailTolerance = 1e-10;
inline constexpr double kHermitianTolerance = 1e-12;

class FockOperator {
 public:
  /// Wraps a square matrix. When `hermitian` is set the matrix is checked
  /// entrywise against its adjoint.
  explicit FockOperator(Matrix entries, bool hermitian = false);

  static FockOperator identity(int dim);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const { return m_; }
  bool hermitian() const { return hermitian_; }
  Complex operator()(int row, int col) const { return m_(row, col); }

  FockOperator adjoint() const;

  friend FockOperator operator+(const FockOperator& a, const FockOperator& b);
  friend FockOperator operator-(const FockOperator& a, const FockOperator& b);
  friend FockOperator operator*(const FockOperator& a, const FockOperator& b);
  friend FockOperator operator*(double s, const FockOperator& a);
  friend FockOperator operator*(Complex s, const FockOperator& a);

 private:
  Matrix m_;
  bool hermitian_ = false;
};

FockOperator commutator(const FockOperator& a, const FockOperator& b);

/// Pure (state vector) or mixed (density matrix) state on a truncated space.
class FockState {
 public:
  static FockState pure(Vector amplitudes);
  static FockState mixed(Matrix density);

  int dim() const;
  bool is_pure() const { return std::holds_alternative<Vector>(data_); }

  /// Throws InvalidArgument for mixed states.
  const Vector& amplitudes() const;
  Matrix density() const;

 private:
  explicit FockState(std::variant<Vector, Matrix> data) : data_(std::move(data)) {}
  std::variant<Vector, Matrix> data_;
};

/// Annihilation a (a[n-1,n] = sqrt(n)) and creation a^dagger.
std::pair<FockOperator, FockOperator> ladder(int dim);

FockOperator number_operator(int dim);

struct Quadratures {
  FockOperator x;
  FockOperator p;
};

/// X = (a + a^dagger)/sqrt(2), P = -i(a - a^dagger)/sqrt(2), [X, P] = i away
/// from the truncation edge.
Quadratures quadratures(int dim);

/// Default cutoffs; callers still validate by doubling.
int coherent_cutoff(Complex alpha);
int thermal_cutoff(double nbar);

FockState coherent_state(Complex alpha, int dim);
FockState thermal_state(double nbar, int dim);

/// Dense exponential by scaling and squaring with Pade approximants.
Matrix expm(const Matrix& a);
FockOperator matrix_exp(const FockOperator& m);

/// exp(i t H) for Hermitian H via its eigendecomposition.
Matrix hermitian_expi(const Matrix& h, double t);

/// D(z/sqrt 2) = exp(i(Re z X - Im z P)); shifts <X> by Im z and <P> by Re z.
FockOperator displacement(Complex z, int dim);

Complex expect(const FockOperator& op, const FockState& state);

/// Half the trace norm of a - b for Hermitian a, b.
double trace_distance(const Matrix& a, const Matrix& b);

/// max |a_ij - b_ij| over the leading `block` x `block` entries.
double max_abs_diff(const Matrix& a, const Matrix& b, int block);

struct SparseQuadratures {
  SparseMatrix x;
  SparseMatrix p;
};

SparseQuadratures sparse_quadratures(int dim);

/// exp(i t H) v by a scaled Taylor series; H sparse and Hermitian.
Vector expi_multiply(const SparseMatrix& h, double t, const Vector& v);

}  // namespace cprobe
