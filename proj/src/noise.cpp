#include "cprobe/noise.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>

#include "cprobe/errors.hpp"
#include "parallel.hpp"

namespace cprobe {
namespace {

constexpr double kNormTolerance = 1e-8;
constexpr double kGaussianReach = 8.0;
constexpr double kExponentialReach = 25.0;
constexpr int kMaxHalvings = 24;

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw InvalidArgument(std::string(name) + " must be finite and > 0");
  }
}

void require_eta(double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) throw InvalidArgument("eta must lie in (0, 1]");
}

// Exact integral of trapezoidal linear data against exp(-kappa (h - s)) over one step.
struct StepWeights {
  double decay;  // e^{-kappa h}
  double left;   // weight of alpha at the start of the step
  double right;  // weight of alpha at the end
};

StepWeights step_weights(double kappa, double h) {
  const double x = kappa * h;
  const double one_minus = -std::expm1(-x);  // 1 - e^{-x}
  // g = 1 - (1 - e^{-x}) / x, with a series near zero to avoid cancellation.
  double g;
  if (x < 1e-4) {
    g = x / 2.0 - x * x / 6.0 + x * x * x / 24.0;
  } else {
    g = 1.0 - one_minus / x;
  }
  const double right = g / kappa;
  return {1.0 - one_minus, one_minus / kappa - right, right};
}

struct Segment {
  double a;
  double b;
  int base_steps;
};

double zeta_on_grid(const PulseShape& pulse, double kappa, const std::vector<Segment>& segments,
                    int refinement, long long& steps) {
  double y = 0.0;
  double integral = 0.0;
  steps = 0;
  for (const auto& seg : segments) {
    const long long m = static_cast<long long>(seg.base_steps) << refinement;
    const double h = (seg.b - seg.a) / static_cast<double>(m);
    const StepWeights w = step_weights(kappa, h);
    double alpha_left = pulse.right_limit(seg.a);
    for (long long k = 0; k < m; ++k) {
      const double t1 = (k + 1 == m) ? seg.b : seg.a + h * static_cast<double>(k + 1);
      const double alpha_right = pulse.left_limit(t1);
      const double y_next = w.decay * y + w.left * alpha_left + w.right * alpha_right;
      integral += 0.5 * h * (y * y + y_next * y_next);
      y = y_next;
      alpha_left = pulse.value(t1);
    }
    steps += m;
  }
  return kappa * kappa * integral;
}

std::vector<Segment> zeta_segments(const PulseShape& pulse, double kappa) {
  const double tau = pulse.duration();
  const double center = pulse.kind() == PulseKind::Gaussian
                            ? 0.5 * (pulse.support_begin() + pulse.support_end())
                            : pulse.support_begin();
  const double lo = std::min(pulse.support_begin(), center - 5.0 * tau);
  const double tail = 12.0 / kappa;
  const double hi = std::max(pulse.support_end(), center + 5.0 * tau) + tail;

  std::vector<double> cuts{lo, hi};
  for (double t : pulse.breakpoints()) {
    if (t > lo && t < hi) cuts.push_back(t);
  }
  cuts.push_back(pulse.support_end() + tail);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  // Resolve both the pulse and the cavity response on the coarsest grid.
  const double scale = std::min(1.0 / kappa, tau);
  std::vector<Segment> out;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double len = cuts[i + 1] - cuts[i];
    if (!(len > 0.0)) continue;
    const double want = std::ceil(2.0 * len / scale);
    out.push_back({cuts[i], cuts[i + 1], static_cast<int>(std::clamp(want, 8.0, 1e6))});
  }
  return out;
}

}  // namespace

// ---- PulseShape -----------------------------------------------------------

PulseShape PulseShape::square(double duration, double start) {
  require_positive(duration, "square pulse duration");
  return PulseShape(PulseKind::Square, duration, start);
}

PulseShape PulseShape::gaussian(double width, double center) {
  require_positive(width, "gaussian pulse width");
  return PulseShape(PulseKind::Gaussian, width, center);
}

PulseShape PulseShape::exponential(double tau, double start) {
  require_positive(tau, "exponential pulse decay time");
  return PulseShape(PulseKind::Exponential, tau, start);
}

PulseShape PulseShape::from_table(std::vector<double> times, std::vector<double> amplitudes,
                                  bool normalize) {
  if (times.size() != amplitudes.size()) {
    throw InvalidArgument("pulse table: time and amplitude columns differ in length");
  }
  if (times.size() < 2) throw InvalidArgument("pulse table: need at least two samples");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i]) || !std::isfinite(amplitudes[i])) {
      throw InvalidArgument("pulse table: non-finite entry");
    }
    if (i > 0 && !(times[i] > times[i - 1])) {
      throw InvalidArgument("pulse table: times must be strictly increasing");
    }
  }
  PulseShape p(PulseKind::Tabulated, times.back() - times.front(), times.front());
  p.times_ = std::move(times);
  p.amps_ = std::move(amplitudes);
  const double e = p.energy();
  if (!(e > 0.0)) throw InvalidArgument("pulse table: envelope is identically zero");
  if (normalize) {
    const double s = 1.0 / std::sqrt(e);
    for (double& v : p.amps_) v *= s;
  } else if (std::abs(e - 1.0) > kNormTolerance) {
    throw InvalidArgument("unnormalized pulse: integral of alpha^2 is " + std::to_string(e));
  }
  return p;
}

PulseShape PulseShape::from_text(std::istream& in, bool normalize) {
  std::vector<double> t, a;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream row(line);
    double tv, av;
    if (!(row >> tv)) continue;
    if (!(row >> av)) {
      throw InvalidArgument("pulse table line " + std::to_string(lineno) +
                            ": expected two columns");
    }
    std::string extra;
    if (row >> extra) {
      throw InvalidArgument("pulse table line " + std::to_string(lineno) +
                            ": unexpected trailing field '" + extra + "'");
    }
    t.push_back(tv);
    a.push_back(av);
  }
  return from_table(std::move(t), std::move(a), normalize);
}

PulseShape PulseShape::from_file(const std::filesystem::path& path, bool normalize) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open pulse table " + path.string());
  return from_text(in, normalize);
}

double PulseShape::support_begin() const {
  switch (kind_) {
    case PulseKind::Gaussian:
      return origin_ - kGaussianReach * tau_;
    case PulseKind::Tabulated:
      return times_.front();
    default:
      return origin_;
  }
}

double PulseShape::support_end() const {
  switch (kind_) {
    case PulseKind::Square:
      return origin_ + tau_;
    case PulseKind::Gaussian:
      return origin_ + kGaussianReach * tau_;
    case PulseKind::Exponential:
      return origin_ + kExponentialReach * tau_;
    case PulseKind::Tabulated:
      return times_.back();
  }
  return origin_;
}

std::vector<double> PulseShape::breakpoints() const {
  if (kind_ == PulseKind::Tabulated) return times_;
  if (kind_ == PulseKind::Gaussian) return {support_begin(), origin_, support_end()};
  return {support_begin(), support_end()};
}

// side: -1 left limit, +1 right limit, 0 value (right-continuous).
double PulseShape::eval(double t, int side) const {
  const bool left = side < 0;
  switch (kind_) {
    case PulseKind::Square: {
      const double a = origin_, b = origin_ + tau_;
      const bool inside = left ? (t > a && t <= b) : (t >= a && t < b);
      return inside ? 1.0 / std::sqrt(tau_) : 0.0;
    }
    case PulseKind::Gaussian: {
      const double u = (t - origin_) / tau_;
      return std::pow(std::numbers::pi * tau_ * tau_, -0.25) * std::exp(-0.5 * u * u);
    }
    case PulseKind::Exponential: {
      const bool inside = left ? t > origin_ : t >= origin_;
      return inside ? std::sqrt(2.0 / tau_) * std::exp(-(t - origin_) / tau_) : 0.0;
    }
    case PulseKind::Tabulated: {
      const double a = times_.front(), b = times_.back();
      if (t < a || t > b) return 0.0;
      if (t == a) return left ? 0.0 : amps_.front();
      if (t == b) return left ? amps_.back() : 0.0;
      const auto it = std::upper_bound(times_.begin(), times_.end(), t);
      const std::size_t j = static_cast<std::size_t>(it - times_.begin());
      const double t0 = times_[j - 1], t1 = times_[j];
      const double w = (t - t0) / (t1 - t0);
      return (1.0 - w) * amps_[j - 1] + w * amps_[j];
    }
  }
  return 0.0;
}

double PulseShape::value(double t) const { return eval(t, 0); }
double PulseShape::left_limit(double t) const { return eval(t, -1); }
double PulseShape::right_limit(double t) const { return eval(t, +1); }

double PulseShape::energy() const {
  switch (kind_) {
    case PulseKind::Square:
    case PulseKind::Gaussian:
    case PulseKind::Exponential:
      return 1.0;
    case PulseKind::Tabulated: {
      double e = 0.0;
      for (std::size_t j = 0; j + 1 < times_.size(); ++j) {
        const double a = amps_[j], b = amps_[j + 1];
        e += (times_[j + 1] - times_[j]) * (a * a + a * b + b * b) / 3.0;
      }
      return e;
    }
  }
  return 0.0;
}

PulseShape PulseShape::shifted(double dt) const {
  PulseShape p = *this;
  p.origin_ += dt;
  for (double& t : p.times_) t += dt;
  return p;
}

// ---- intracavity filtering ----------------------------------------------

ZetaResult intracavity_zeta_report(const PulseShape& pulse, double kappa, double tolerance) {
  require_positive(kappa, "kappa");
  require_positive(tolerance, "tolerance");
  const double e = pulse.energy();
  if (std::abs(e - 1.0) > kNormTolerance) {
    throw InvalidArgument("unnormalized pulse: integral of alpha^2 is " + std::to_string(e));
  }
  const auto segments = zeta_segments(pulse, kappa);
  long long steps = 0;
  double prev = zeta_on_grid(pulse, kappa, segments, 0, steps);
  for (int r = 1; r <= kMaxHalvings; ++r) {
    const double cur = zeta_on_grid(pulse, kappa, segments, r, steps);
    const double change = std::abs(cur - prev);
    if (change < tolerance) return {cur, change, steps};
    prev = cur;
  }
  throw NumericError("grid too coarse (step-halving change > " + std::to_string(tolerance) + ")");
}

double intracavity_zeta(const PulseShape& pulse, double kappa, double tolerance) {
  return intracavity_zeta_report(pulse, kappa, tolerance).zeta;
}

// ---- pulse-to-pulse distortion ------------------------------------------

double eta_reduction(DeformationKind kind, double eta) {
  require_eta(eta);
  switch (kind) {
    case DeformationKind::Beta:
      return std::pow(eta, 7);
    case DeformationKind::Gamma:
      return std::pow(eta, 5);
    case DeformationKind::Mu:
      return std::pow(eta, 3);
    case DeformationKind::None:
      return 1.0;
  }
  return 1.0;
}

double thermal_attenuation(double nbar, double lambda, double eta) {
  if (!(nbar >= 0.0) || !std::isfinite(nbar)) throw InvalidArgument("nbar must be >= 0");
  if (!std::isfinite(lambda)) throw InvalidArgument("lambda must be finite");
  require_eta(eta);
  const double e2 = eta * eta;
  return std::exp(-0.5 * nbar * lambda * lambda * (1.0 - e2) * (1.0 - e2 * e2));
}

EtaFactorizationReport xi_eta_check(double lambda, double eta, int opt_dim, int mech_dim) {
  require_eta(eta);
  if (opt_dim < 1 || mech_dim < 2) throw InvalidDimension("need opt_dim >= 1, mech_dim >= 2");
  const double a_max = std::abs(lambda) * (opt_dim - 1);
  const double r = std::sqrt(static_cast<double>(mech_dim)) + 2.0 * a_max;
  const int dim = static_cast<int>(std::ceil(r * r + 8.0 * r + 20.0));

  const auto q = quadratures(dim);
  const Eigen::SelfAdjointEigenSolver<Matrix> xs(q.x.matrix());
  const Eigen::SelfAdjointEigenSolver<Matrix> ps(q.p.matrix());
  auto ex = [&](const Eigen::SelfAdjointEigenSolver<Matrix>& s, double t) {
    Vector ph(dim);
    for (int k = 0; k < dim; ++k) ph(k) = std::polar(1.0, t * s.eigenvalues()(k));
    return Matrix(s.eigenvectors() * ph.asDiagonal() * s.eigenvectors().adjoint());
  };

  const double l1 = lambda, l2 = eta * l1, l3 = eta * l2, l4 = eta * l3;
  const double shift = eta * lambda * (1.0 - eta * eta);
  EtaFactorizationReport rep;
  for (int n = 0; n < opt_dim; ++n) {
    const Matrix distorted = ex(ps, l4 * n) * ex(xs, -l3 * n) * ex(ps, -l2 * n) * ex(xs, l1 * n);
    const Matrix closed = ex(ps, l2 * n) * ex(xs, -l3 * n) * ex(ps, -l2 * n) * ex(xs, l3 * n);
    const Matrix xres = ex(xs, lambda * (1.0 - eta * eta) * n);
    const Matrix printed = closed * ex(ps, shift * n) * xres;
    const Matrix corrected = closed * ex(ps, -shift * n) * xres;
    rep.residual_as_printed.push_back(max_abs_diff(distorted, printed, mech_dim));
    rep.residual_sign_corrected.push_back(max_abs_diff(distorted, corrected, mech_dim));
  }
  rep.max_residual_as_printed =
      *std::max_element(rep.residual_as_printed.begin(), rep.residual_as_printed.end());
  rep.max_residual_sign_corrected =
      *std::max_element(rep.residual_sign_corrected.begin(), rep.residual_sign_corrected.end());
  return rep;
}

// ---- bath decoherence ---------------------------------------------------

namespace {

void check_bath_inputs(double temperature_K, double omega_m, double quality_factor) {
  if (!(temperature_K >= 0.0) || !std::isfinite(temperature_K)) {
    throw InvalidArgument("temperature must be finite and >= 0");
  }
  require_positive(omega_m, "omega_m");
  if (!(quality_factor > 0.0)) throw InvalidArgument("quality factor must be > 0");
}

}  // namespace

double decoherence_factor(double lambda, double temperature_K, double omega_m,
                          double quality_factor, const Constants& constants) {
  check_bath_inputs(temperature_K, omega_m, quality_factor);
  const double correction = lambda * lambda * constants.k_B * temperature_K /
                            (constants.hbar * omega_m * quality_factor);
  if (correction >= 1.0) {
    throw OutOfRegime("λ²k_BT/(ħω_mQ) < 1", "correction = " + std::to_string(correction));
  }
  return 1.0 - correction;
}

double bath_noise_strength(double temperature_K, double omega_m, double quality_factor,
                           const Constants& constants) {
  check_bath_inputs(temperature_K, omega_m, quality_factor);
  if (std::isinf(quality_factor)) return 0.0;
  const double gamma_m = omega_m / quality_factor;
  if (temperature_K == 0.0) return gamma_m;
  const double x = constants.hbar * omega_m / (2.0 * constants.k_B * temperature_K);
  return gamma_m / std::tanh(x);
}

double bath_phase_average(double lambda, double temperature_K, double omega_m,
                          double quality_factor, const Constants& constants) {
  const double d = bath_noise_strength(temperature_K, omega_m, quality_factor, constants);
  return std::exp(-lambda * lambda * d * (std::numbers::pi + 1.0) / (2.0 * omega_m));
}

MonteCarloEstimate bath_monte_carlo(double lambda, double temperature_K, double omega_m,
                                    double quality_factor, const BathSampling& sampling,
                                    const Constants& constants) {
  if (sampling.samples < 1000) throw InvalidArgument("bath_monte_carlo: need >= 1000 samples");
  if (sampling.steps_per_period < 4 || sampling.steps_per_period % 4 != 0) {
    throw InvalidArgument("bath_monte_carlo: steps_per_period must be a positive multiple of 4");
  }
  const double d = bath_noise_strength(temperature_K, omega_m, quality_factor, constants);

  // The three windows end at quarter, half and three-quarter period; the
  // record beyond 3T/4 does not enter.
  const double period = 2.0 * std::numbers::pi / omega_m;
  const int quarter = sampling.steps_per_period / 4;
  const int nsteps = 3 * quarter;
  const double dt = period / sampling.steps_per_period;
  std::vector<double> weight(nsteps);
  for (int k = 0; k < nsteps; ++k) {
    const double t = (k + 0.5) * dt;
    double w = 0.0;
    if (k < quarter) w += std::cos(omega_m * t);
    if (k < 2 * quarter) w += std::sin(omega_m * t);
    w -= std::cos(omega_m * t);
    weight[k] = w;
  }

  constexpr long long kChunk = 1024;
  const long long nchunks = (sampling.samples + kChunk - 1) / kChunk;
  struct Partial {
    double re = 0, im = 0, re2 = 0, im2 = 0;
  };
  std::vector<Partial> partials(static_cast<std::size_t>(nchunks));
  const double sd = std::sqrt(d * dt);

  detail::parallel_for(static_cast<int>(nchunks), sampling.jobs, [&](int c) {
    std::seed_seq seq{static_cast<std::uint32_t>(sampling.seed),
                      static_cast<std::uint32_t>(sampling.seed >> 32),
                      static_cast<std::uint32_t>(c)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal(0.0, 1.0);
    const long long first = static_cast<long long>(c) * kChunk;
    const long long count = std::min(kChunk, sampling.samples - first);
    Partial p;
    for (long long s = 0; s < count; ++s) {
      double phase = 0.0;
      for (int k = 0; k < nsteps; ++k) phase += weight[k] * sd * normal(rng);
      const double re = std::cos(lambda * phase), im = std::sin(lambda * phase);
      p.re += re;
      p.im += im;
      p.re2 += re * re;
      p.im2 += im * im;
    }
    partials[static_cast<std::size_t>(c)] = p;
  });

  Partial total;
  for (const auto& p : partials) {
    total.re += p.re;
    total.im += p.im;
    total.re2 += p.re2;
    total.im2 += p.im2;
  }
  const double n = static_cast<double>(sampling.samples);
  MonteCarloEstimate est;
  est.samples = sampling.samples;
  est.mean = Complex(total.re / n, total.im / n);
  const double var_re = std::max(0.0, (total.re2 - n * est.mean.real() * est.mean.real()) / (n - 1));
  const double var_im = std::max(0.0, (total.im2 - n * est.mean.imag() * est.mean.imag()) / (n - 1));
  est.std_error_real = std::sqrt(var_re / n);
  est.std_error_imag = std::sqrt(var_im / n);
  return est;
}

NoiseBudget make_noise_budget(const NoiseInputs& in, const Constants& constants) {
  if (!(in.zeta > 0.0 && in.zeta <= 1.0)) throw InvalidArgument("zeta must lie in (0, 1]");
  NoiseBudget b;
  b.zeta = in.zeta;
  b.eta = in.eta;
  b.thermal_factor = thermal_attenuation(in.nbar, in.lambda, in.eta);
  b.decoherence_factor = decoherence_factor(in.lambda, in.temperature_K, in.omega_m,
                                            in.quality_factor, constants);
  if (!(b.decoherence_factor > 0.0)) {
    throw OutOfRegime("λ²k_BT/(ħω_mQ) < 1", "decoherence factor is not positive");
  }
  return b;
}

}  // namespace cprobe
