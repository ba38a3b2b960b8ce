#pragma once

// Run configuration for the command-line tool, read from an INI file:
//
//   [deformation]  model = beta|gamma|mu|none, strength = <bare strength>
//   [physical]     m_kg, omega_m_rad_s (or f_m_hz), finesse, lambda_L_m, N_p, N_r,
//                  nbar, T_K, Q, sigma_out
//   [noise]        eta, lambda, pulse, pulse_tau_s, pulse_table, normalize_pulse,
//                  kappa_per_s, mc_samples
//   [oracle]       alpha, nbar, opt_dim, mech_dim, lambda, strength, tolerance, method
//   [sweep]        parameter, grid
//   [figure1]      beta0, dp_min, dp_max, points
//   [output]       format = csv|json, path
//   [constants]    hbar, c, k_B, planck_mass, planck_length (needs --unsafe-constants)

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cprobe/deformations.hpp"

namespace cprobe::cli {

enum class OutputFormat { Csv, Json };

struct NoiseSection {
  double eta = 1.0;
  std::optional<double> lambda;  // overrides the value implied by [physical]
  std::string pulse;             // square, gaussian, exponential, table; empty = none
  double pulse_tau_s = 0.0;
  std::string pulse_table;
  bool normalize_pulse = false;
  double kappa_per_s = 0.0;
  long long mc_samples = 0;

  bool operator==(const NoiseSection&) const = default;
};

struct OracleSection {
  double alpha = 2.0;
  double nbar = 0.0;
  int opt_dim = 24;
  int mech_dim = 32;
  double lambda = 0.3;
  double strength = 0.0;  // dimensionless (beta, gamma or mu)
  std::optional<double> tolerance;
  std::string method = "reduced";

  bool operator==(const OracleSection&) const = default;
};

struct SweepSection {
  std::string parameter;
  std::vector<double> grid;

  bool operator==(const SweepSection&) const = default;
};

struct Figure1Section {
  std::vector<double> beta0{0.0, 0.25, 1.0, 4.0};
  double dp_min = 1e-2;
  double dp_max = 1e2;
  int points = 201;

  bool operator==(const Figure1Section&) const = default;
};

struct OutputSection {
  OutputFormat format = OutputFormat::Csv;
  std::string path;  // empty = standard output

  bool operator==(const OutputSection&) const = default;
};

struct RunConfig {
  DeformationModel deformation;
  std::optional<ExperimentSpec> physical;
  std::optional<NoiseSection> noise;
  std::optional<OracleSection> oracle;
  std::optional<SweepSection> sweep;
  std::optional<Figure1Section> figure1;
  OutputSection output;
  std::optional<Constants> constants;

  bool operator==(const RunConfig&) const = default;
  const Constants& effective_constants() const { return constants ? *constants : kConstants; }
};

struct ParseOptions {
  bool allow_unsafe_constants = false;
};

/// Parses and validates; throws ConfigError naming the offending key.
RunConfig parse_config(std::istream& in, const ParseOptions& options = {});
RunConfig parse_config_file(const std::filesystem::path& path, const ParseOptions& options = {});
RunConfig parse_config_string(const std::string& text, const ParseOptions& options = {});

/// INI text that parses back to an equal RunConfig.
std::string serialize_config(const RunConfig& config);

/// Shortest decimal form that round-trips exactly.
std::string format_number(double value);

/// Parses a sweep grid: "v1, v2, ...", "linspace a b n" or "logspace a b n".
std::vector<double> parse_grid(const std::string& text);

const ExperimentSpec& require_physical(const RunConfig& config);

}  // namespace cprobe::cli
