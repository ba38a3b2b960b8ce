#pragma once

// The four-displacement protocol: closed forms for the optical mean field and
// the deformation-induced rotation Theta, and the truncated-Fock oracle that
// checks them.
//
// The joint operator xi = exp(i a P') exp(-i a X) exp(-i a P') exp(i a X),
// a = lambda n_L, commutes with n_L, so it is stored as one mechanical block
// per optical photon number n.

#include <vector>

#include "cprobe/deformations.hpp"
#include "cprobe/fock.hpp"

namespace cprobe {

struct ProtocolOutcome {
  Complex mean_field;     // <a_L>
  Complex mean_field_qm;  // undeformed reference
  Complex theta;          // deformation contribution
  double phi = 0.0;       // total mean rotation, -arg(<a_L> / alpha)
};

/// alpha exp(-i lambda^2 - N_p (1 - exp(-2 i lambda^2))), exact for a coherent input.
Complex mean_field_qm(double alpha, double lambda, double photons);
/// Same with N_p = alpha^2.
Complex mean_field_qm(double alpha, double lambda);

/// Returns N_p, enforcing |N_p - alpha^2| < 1e-6 N_p.
double consistent_photon_number(double alpha, double photons);

/// Thresholds for the asymptotic closed forms. "x << y" is read as
/// x <= much_less * y.
struct RegimeThresholds {
  double much_less = 0.1;
  StrengthRegime strength;
};

/// Theta(beta) = 4/3 beta N^3 lambda^4 e^{-6 i lambda^2},
/// Theta(gamma) = 3/2 gamma N^2 lambda^3 e^{-4 i lambda^2},
/// Theta(mu) = 2 mu N lambda^2 e^{-2 i lambda^2}. No regime checks.
Complex theta_closed_form(const Deformation& deformation, double photons, double lambda);

/// Theta for a bare model under an experimental configuration. Throws
/// OutOfRegime naming the first violated condition among: strength < 1,
/// lambda < 1, N_p >> 1, nbar << lambda N_p, |Theta| << 1.
Complex theta(const DeformationModel& model, const PhysicalParams& params,
              const RegimeThresholds& thresholds = {});

/// Closed-form outcome for alpha = sqrt(N_p).
ProtocolOutcome analytic_outcome(const DeformationModel& model, const PhysicalParams& params,
                                 const RegimeThresholds& thresholds = {});

/// First-order Theta for finite photon number: the Poisson sum the large-N
/// closed forms are the asymptote of. Linear in the strength.
Complex theta_linear_response(const Deformation& deformation, double alpha, double lambda,
                              double nbar);

/// First-order expectation of the loop phase (Kerr part included) in a
/// thermal mechanical state, from the nested-commutator expansion.
double expansion_phase(const Deformation& deformation, double a, double nbar);

enum class XiMethod {
  // Conjugation-reduced form exp(i a [P'(P) - P'(P + a)]), a function of P.
  Reduced,
  // Product of the four exponentials in a padded working space.
  Literal,
};

struct XiFamily {
  double lambda = 0.0;
  std::vector<Matrix> blocks;  // blocks[n], mech_dim x mech_dim
};

struct OracleOptions {
  XiMethod method = XiMethod::Reduced;
  bool check_convergence = true;
  double convergence_tolerance = 1e-8;
  int jobs = 1;
};

XiFamily xi_exact(const Deformation& deformation, double lambda, int opt_dim, int mech_dim,
                  const OracleOptions& options = {});

/// Deformation phase of block n on the mechanical vacuum,
/// arg(<0| xi_m(n) |0> e^{i lambda^2 n^2}).
double xi_vacuum_phase(const Deformation& deformation, double lambda, int n, int mech_dim,
                       XiMethod method = XiMethod::Reduced);

/// <a_L> after xi acting on |alpha><alpha| (x) rho_thermal(nbar), using the
/// block structure. Verifies convergence by doubling both cutoffs.
Complex mean_field_numeric(Complex alpha, double nbar, double lambda,
                           const Deformation& deformation, int opt_dim, int mech_dim,
                           const OracleOptions& options = {});

/// Reduced mechanical state after the protocol.
Matrix mechanical_output_state(Complex alpha, double nbar, double lambda,
                               const Deformation& deformation, int opt_dim, int mech_dim,
                               const OracleOptions& options = {});

// ---- harmonic-evolution variant -------------------------------------------

struct HarmonicVariant {
  XiFamily family;
  std::vector<double> printed_phase;  // beta pi (5/3) lambda^4 n^4 per block
};

/// Four pulses separated by quarter periods of beta-modified free evolution:
/// exp(ia(P - b X^3)) exp(ia(-X - 2b/3 P^3)) exp(ia(-P + b/3 X^3)) exp(iaX),
/// b = 2 pi beta, a = lambda n.
HarmonicVariant xi_harmonic_variant(double lambda, double beta, int opt_dim, int mech_dim,
                                    bool check_convergence = true);

/// Leading-order phase of the closed-form harmonic result, +beta pi 5/3 lambda^4 n^4.
double harmonic_printed_phase(double lambda, double beta, int n);

/// Deformation phase of the harmonic variant on the mechanical vacuum,
/// arg(<0|xi(n)|0> e^{i lambda^2 n^2}), computed with sparse propagation in a
/// working space of `working_dim` levels.
double harmonic_vacuum_phase(double lambda, double beta, int n, int working_dim);

/// As above with the working dimension chosen automatically and validated
/// by doubling (absolute phase change < tolerance).
double harmonic_vacuum_phase(double lambda, double beta, int n);

struct HarmonicFit {
  double exponent = 0.0;          // log-log slope of |phase| over the sampled n
  double quartic_coefficient = 0.0;  // c4 in phase / beta ~ c2 a^2 + c4 a^4
  double quadratic_coefficient = 0.0;
  double printed_coefficient = 0.0;  // 5 pi / 3
  double relative_discrepancy = 0.0;  // |c4 - printed| / |printed|
  bool flagged = false;               // discrepancy > 10 %
};

HarmonicFit fit_harmonic_phase(double lambda, double beta, int n_min, int n_max);

}  // namespace cprobe
