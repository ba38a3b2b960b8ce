#include "cprobe/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>

#include "cprobe/errors.hpp"
#include "cprobe/noise.hpp"
#include "cprobe/protocol.hpp"
#include "cprobe/sensitivity.hpp"
#include "parallel.hpp"

namespace cprobe::cli {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kUndeformedTolerance = 1e-6;
constexpr double kDeformedTolerance = 0.02;

std::ostream* diag(const CommandContext& ctx) { return ctx.diagnostics; }

void note(const CommandContext& ctx, const std::string& line) {
  if (auto* d = diag(ctx)) *d << line << '\n';
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string model_name(DeformationKind kind) { return std::string(to_string(kind)); }

double& sweep_field(ExperimentSpec& spec, const std::string& parameter) {
  if (parameter == "m") return spec.mass_kg;
  if (parameter == "F") return spec.finesse;
  if (parameter == "N_p") return spec.photons_per_pulse;
  if (parameter == "N_r") return spec.runs;
  if (parameter == "lambda_L") return spec.wavelength_m;
  if (parameter == "omega_m") return spec.omega_m;
  throw ConfigError("unknown sweep parameter '" + parameter + "'");
}

std::string sweep_column(const std::string& parameter) {
  if (parameter == "m") return "m_kg";
  if (parameter == "lambda_L") return "lambda_L_m";
  if (parameter == "omega_m") return "omega_m_rad_s";
  return parameter;
}

PulseShape make_pulse(const NoiseSection& n) {
  if (n.pulse == "square") return PulseShape::square(n.pulse_tau_s);
  if (n.pulse == "gaussian") return PulseShape::gaussian(n.pulse_tau_s);
  if (n.pulse == "exponential") return PulseShape::exponential(n.pulse_tau_s);
  return PulseShape::from_file(n.pulse_table, n.normalize_pulse);
}

}  // namespace

Table cmd_theta(const RunConfig& cfg, const CommandContext& ctx) {
  const PhysicalParams params(require_physical(cfg), cfg.effective_constants());
  const DeformationModel& model = cfg.deformation;
  const ProtocolOutcome outcome = analytic_outcome(model, params);
  if (strength_needs_warning(to_dimensionless(model, params))) {
    note(ctx, "warning: dimensionless strength is above the first-order comfort zone");
  }

  double per_unit = kNaN, resolvable = kNaN;
  const double imprecision = phase_imprecision(params);
  if (model.kind != DeformationKind::None) {
    const SensitivityReport r = sensitivity_report(model.kind, params);
    per_unit = r.theta_magnitude;
    resolvable = r.resolvable_strength;
  }

  Table t;
  t.columns = {"model",        "strength0",       "lambda",      "N_p",
               "N_r",          "theta_re_rad",    "theta_im_rad", "theta_abs_rad",
               "theta_per_unit_rad", "phi_rad",   "dPhi_rad",    "resolvable_strength"};
  const auto& s = params.spec();
  t.add_row({model_name(model.kind), model.bare_strength, params.lambda(), s.photons_per_pulse,
             s.runs, outcome.theta.real(), outcome.theta.imag(), std::abs(outcome.theta), per_unit,
             outcome.phi, imprecision, resolvable});
  note(ctx, "|Theta| = " + format_cell(std::abs(outcome.theta)) + " rad");
  return t;
}

OracleResult cmd_oracle(const RunConfig& cfg, const CommandContext& ctx) {
  if (!cfg.oracle) throw ConfigError("the oracle command needs an [oracle] section");
  const OracleSection& o = *cfg.oracle;
  const DeformationKind kind = o.strength > 0.0 ? cfg.deformation.kind : DeformationKind::None;
  if (o.strength > 0.0 && kind == DeformationKind::None) {
    throw ConfigError("[oracle] strength > 0 needs [deformation] model");
  }
  OracleOptions opts;
  opts.method = o.method == "literal" ? XiMethod::Literal : XiMethod::Reduced;
  opts.jobs = ctx.jobs;

  const Complex qm = mean_field_qm(o.alpha, o.lambda, o.alpha * o.alpha);
  const Deformation d{kind, o.strength};
  const Complex numeric = mean_field_numeric(o.alpha, o.nbar, o.lambda, d, o.opt_dim, o.mech_dim, opts);

  Complex analytic = qm;
  double rel_error = 0.0, exponent = kNaN, tolerance = 0.0;
  if (kind == DeformationKind::None) {
    tolerance = o.tolerance.value_or(kUndeformedTolerance);
    rel_error = std::abs(numeric - qm) / std::abs(qm);
  } else {
    // Compare the deformation-induced change of the mean field, not the mean
    // field itself, which is dominated by the undeformed part.
    tolerance = o.tolerance.value_or(kDeformedTolerance);
    const Complex th = theta_linear_response(d, o.alpha, o.lambda, o.nbar);
    analytic = qm * std::exp(Complex(0.0, -1.0) * th);
    const Complex shift_num = numeric / qm - 1.0;
    const Complex shift_an = analytic / qm - 1.0;
    rel_error = std::abs(shift_num - shift_an) / std::abs(shift_an);

    const Deformation half{kind, 0.5 * o.strength};
    const Complex numeric_half =
        mean_field_numeric(o.alpha, o.nbar, o.lambda, half, o.opt_dim, o.mech_dim, opts);
    exponent = std::log(std::abs(shift_num) / std::abs(numeric_half / qm - 1.0)) / std::log(2.0);
  }
  const bool pass = rel_error <= tolerance;

  OracleResult r;
  r.pass = pass;
  r.table.columns = {"model",       "strength",   "alpha",      "nbar",      "lambda",
                     "opt_dim",     "mech_dim",   "analytic_re", "analytic_im", "numeric_re",
                     "numeric_im",  "rel_error",  "tolerance",  "linearity_exponent", "pass"};
  r.table.add_row({model_name(kind), o.strength, o.alpha, o.nbar, o.lambda,
                   static_cast<long long>(o.opt_dim), static_cast<long long>(o.mech_dim),
                   analytic.real(), analytic.imag(), numeric.real(), numeric.imag(), rel_error,
                   tolerance, exponent, pass});
  note(ctx, std::string("oracle: ") + (pass ? "PASS" : "FAIL") + " (relative error " +
                format_cell(rel_error) + ", tolerance " + format_cell(tolerance) + ")");
  return r;
}

Table cmd_table2(const CommandContext& ctx) {
  Table t;
  t.columns = {"model",     "F",          "m_kg",           "f_m_Hz",
               "lambda_L_m", "N_p",       "N_r",            "lambda",
               "theta_per_unit_rad", "dPhi_rad", "dPhi_quoted_rad", "resolvable_strength",
               "dPhi_within_2x", "strength_in_band"};
  for (const auto& row : reproduce_table2()) {
    const auto& s = row.spec;
    t.add_row({row.label, s.finesse, s.mass_kg, s.omega_m / (2.0 * std::numbers::pi),
               s.wavelength_m, s.photons_per_pulse, s.runs, row.lambda, row.theta_per_unit,
               row.phase_imprecision, row.quoted_phase_imprecision, row.resolvable_strength,
               row.phase_within_factor2, row.strength_in_band});
    note(ctx, row.label + ": delta strength " + format_cell(row.resolvable_strength) +
                  (row.strength_in_band ? " (in band)" : " (OUT OF BAND)"));
  }
  return t;
}

Table cmd_sweep(const RunConfig& cfg, const CommandContext& ctx) {
  if (!cfg.sweep) throw ConfigError("the sweep command needs a [sweep] section");
  const ExperimentSpec& base = require_physical(cfg);
  const DeformationModel& model = cfg.deformation;
  if (model.kind == DeformationKind::None) {
    throw ConfigError("the sweep command needs [deformation] model");
  }
  const SweepSection& sw = *cfg.sweep;
  const auto n = static_cast<int>(sw.grid.size());

  std::vector<std::vector<Cell>> rows(sw.grid.size());
  std::vector<std::exception_ptr> failures(sw.grid.size());
  detail::parallel_for(n, ctx.jobs, [&](int i) {
    try {
      ExperimentSpec spec = base;
      sweep_field(spec, sw.parameter) = sw.grid[i];
      const PhysicalParams params(spec, cfg.effective_constants());
      const Complex th = theta(model, params);
      const SensitivityReport r = sensitivity_report(model.kind, params);
      rows[i] = {sw.grid[i], params.lambda(), std::abs(th), r.theta_magnitude,
                 r.resolvable_strength};
    } catch (...) {
      failures[i] = std::current_exception();
    }
  });
  // Report the first failing grid point regardless of scheduling.
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  Table t;
  t.columns = {sweep_column(sw.parameter), "lambda", "theta_abs_rad", "theta_per_unit_rad",
               "resolvable_strength"};
  for (auto& row : rows) t.add_row(std::move(row));
  note(ctx, "sweep: " + std::to_string(n) + " grid points over " + sw.parameter);
  return t;
}

Table cmd_figure1(const Figure1Section& fig, const CommandContext& ctx) {
  const UncertaintyGrid grid{fig.dp_min, fig.dp_max, fig.points, true};
  Table t;
  t.columns = {"beta0", "dp_MPc", "dx_LP", "dx_standard_LP"};
  for (double beta0 : fig.beta0) {
    for (const auto& p : uncertainty_curve(beta0, grid)) {
      t.add_row({beta0, p.dp, p.dx, p.dx_standard});
    }
    if (const auto m = locate_curve_minimum(beta0, grid)) {
      note(ctx, "beta0 = " + format_cell(beta0) + ": minimum dx = " + format_cell(m->dx) +
                    " at dp = " + format_cell(m->dp));
    } else {
      note(ctx, "beta0 = " + format_cell(beta0) + ": no minimum inside the grid");
    }
  }
  return t;
}

Table cmd_noise_budget(const RunConfig& cfg, const CommandContext& ctx) {
  const PhysicalParams params(require_physical(cfg), cfg.effective_constants());
  const ExperimentSpec& s = params.spec();
  const DeformationKind kind = cfg.deformation.kind;

  Table t;
  t.columns = {"item", "quantity", "value", "bound", "status"};
  for (const auto& c : requirement_budget(params)) {
    t.add_row({std::string("check"), c.name, c.actual, c.bound,
               std::string(c.pass ? "pass" : "fail")});
  }

  NoiseBudget budget = NoiseBudget::unit();
  const double lambda =
      cfg.noise && cfg.noise->lambda ? *cfg.noise->lambda : params.lambda();
  if (cfg.noise) {
    const NoiseSection& n = *cfg.noise;
    NoiseInputs in;
    in.eta = n.eta;
    in.nbar = s.nbar;
    in.lambda = lambda;
    in.temperature_K = s.temperature_K;
    in.omega_m = s.omega_m;
    in.quality_factor = s.quality_factor;
    if (!n.pulse.empty()) in.zeta = intracavity_zeta(make_pulse(n), n.kappa_per_s);
    budget = make_noise_budget(in, cfg.effective_constants());
  }

  const auto factor = [&](const std::string& name, double value) {
    t.add_row({std::string("factor"), name, value, kNaN, std::string()});
  };
  factor("zeta", budget.zeta);
  factor("lambda_effective", budget.zeta * lambda);
  factor("theta_reduction", budget.theta_reduction(kind));
  factor("thermal_factor", budget.thermal_factor);
  factor("decoherence_factor", budget.decoherence_factor);
  factor("composite_reduction", budget.composite(kind));

  if (cfg.noise && cfg.noise->mc_samples > 0) {
    BathSampling sampling;
    sampling.samples = cfg.noise->mc_samples;
    sampling.seed = ctx.seed;
    sampling.jobs = ctx.jobs;
    const MonteCarloEstimate mc = bath_monte_carlo(lambda, s.temperature_K, s.omega_m,
                                                   s.quality_factor, sampling,
                                                   cfg.effective_constants());
    factor("bath_mc_mean_re", mc.mean.real());
    factor("bath_mc_mean_im", mc.mean.imag());
    factor("bath_mc_std_error", mc.std_error_real);
    factor("bath_phase_average", bath_phase_average(lambda, s.temperature_K, s.omega_m,
                                                    s.quality_factor, cfg.effective_constants()));
  }

  if (kind != DeformationKind::None) {
    const SensitivityReport raw = sensitivity_report(kind, params);
    const SensitivityReport noisy = apply_noise_budget(raw, budget);
    factor("resolvable_strength_ideal", raw.resolvable_strength);
    factor("resolvable_strength_with_noise", noisy.resolvable_strength);
  }

  const double reduction = budget.theta_reduction(kind);
  note(ctx, "theta reduction " + fixed(reduction, 3) + " (~" + fixed(reduction, 1) + ")");
  note(ctx, "composite reduction " + fixed(budget.composite(kind), 3));
  return t;
}

// ---- command line -----------------------------------------------------------

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Deformed-commutator optomechanics calculator", "cprobe"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, output_path, format;
  std::uint64_t seed = 1;
  int jobs = 1;
  bool unsafe_constants = false;
  app.add_option("--config", config_path, "INI configuration file");
  app.add_option("--output", output_path, "Write data here instead of standard output");
  app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--seed", seed, "Random seed for Monte Carlo estimates");
  app.add_option("--jobs", jobs, "Worker threads")->check(CLI::Range(1, 1024));
  app.add_flag("--unsafe-constants", unsafe_constants,
               "Accept a [constants] section (testing only)");

  auto* theta_cmd = app.add_subcommand("theta", "Deformation-induced rotation Theta");
  auto* oracle_cmd = app.add_subcommand("oracle", "Fock-space check of the closed forms");
  auto* table2_cmd = app.add_subcommand("table2", "Reference parameter columns");
  auto* sweep_cmd = app.add_subcommand("sweep", "Theta and resolution over a parameter grid");
  auto* figure1_cmd = app.add_subcommand("figure1", "Modified uncertainty curves");
  auto* noise_cmd = app.add_subcommand("noise-budget", "Requirement checklist and reductions");

  std::string sweep_parameter, sweep_grid;
  sweep_cmd->add_option("--parameter", sweep_parameter, "m, F, N_p, N_r, lambda_L or omega_m");
  sweep_cmd->add_option("--grid", sweep_grid, "'v1,v2,...', 'linspace a b n' or 'logspace a b n'");
  std::vector<double> beta0;
  std::optional<double> dp_min, dp_max;
  std::optional<int> points;
  figure1_cmd->add_option("--beta0", beta0, "Deformation parameters to plot");
  figure1_cmd->add_option("--dp-min", dp_min, "Smallest momentum spread (units of M_P c)");
  figure1_cmd->add_option("--dp-max", dp_max, "Largest momentum spread (units of M_P c)");
  figure1_cmd->add_option("--points", points, "Samples per curve");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  CommandContext ctx{seed, jobs, &err};
  try {
    RunConfig cfg;
    if (!config_path.empty()) {
      cfg = parse_config_file(config_path, {unsafe_constants});
    }
    if (!format.empty()) cfg.output.format = format == "json" ? OutputFormat::Json : OutputFormat::Csv;
    if (!output_path.empty()) cfg.output.path = output_path;

    Table table;
    int code = kExitOk;
    if (theta_cmd->parsed()) {
      table = cmd_theta(cfg, ctx);
    } else if (oracle_cmd->parsed()) {
      OracleResult r = cmd_oracle(cfg, ctx);
      table = std::move(r.table);
      if (!r.pass) code = kExitCheckFailed;
    } else if (table2_cmd->parsed()) {
      table = cmd_table2(ctx);
    } else if (sweep_cmd->parsed()) {
      if (!sweep_parameter.empty() || !sweep_grid.empty()) {
        SweepSection sw = cfg.sweep.value_or(SweepSection{});
        if (!sweep_parameter.empty()) sw.parameter = sweep_parameter;
        if (!sweep_grid.empty()) sw.grid = parse_grid(sweep_grid);
        // Route through the config parser's validation.
        std::string text = "[sweep]\nparameter = " + sw.parameter + "\ngrid = ";
        for (std::size_t i = 0; i < sw.grid.size(); ++i) {
          text += (i ? ", " : "") + format_number(sw.grid[i]);
        }
        cfg.sweep = parse_config_string(text + "\n").sweep;
      }
      table = cmd_sweep(cfg, ctx);
    } else if (figure1_cmd->parsed()) {
      Figure1Section fig = cfg.figure1.value_or(Figure1Section{});
      if (!beta0.empty()) fig.beta0 = beta0;
      if (dp_min) fig.dp_min = *dp_min;
      if (dp_max) fig.dp_max = *dp_max;
      if (points) fig.points = *points;
      table = cmd_figure1(fig, ctx);
    } else if (noise_cmd->parsed()) {
      table = cmd_noise_budget(cfg, ctx);
    }

    std::ostringstream buffer;
    write_table(table, cfg.output.format, buffer);
    if (cfg.output.path.empty()) {
      out << buffer.str();
    } else {
      std::ofstream file(cfg.output.path, std::ios::binary);
      if (!file) throw IoError("cannot open output file " + cfg.output.path);
      file << buffer.str();
      if (!file.flush()) throw IoError("write failed for " + cfg.output.path);
    }
    return code;
  } catch (const CutoffInsufficient& e) {
    err << "cutoff insufficient: " << e.what() << '\n';
    return kExitCutoff;
  } catch (const OutOfRegime& e) {
    err << "regime violation: " << e.what() << '\n';
    return kExitRegime;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const InvalidArgument& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
}

}  // namespace cprobe::cli
