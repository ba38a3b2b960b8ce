#include "cprobe/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "cprobe/errors.hpp"
#include "cprobe/noise.hpp"

namespace cprobe::cli {
namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"deformation", {"model", "strength"}},
      {"physical",
       {"m_kg", "omega_m_rad_s", "f_m_hz", "finesse", "lambda_L_m", "N_p", "N_r", "nbar", "T_K",
        "Q", "sigma_out"}},
      {"noise",
       {"eta", "lambda", "pulse", "pulse_tau_s", "pulse_table", "normalize_pulse", "kappa_per_s",
        "mc_samples"}},
      {"oracle",
       {"alpha", "nbar", "opt_dim", "mech_dim", "lambda", "strength", "tolerance", "method"}},
      {"sweep", {"parameter", "grid"}},
      {"figure1", {"beta0", "dp_min", "dp_max", "points"}},
      {"output", {"format", "path"}},
      {"constants", {"hbar", "c", "k_B", "planck_mass", "planck_length"}},
  };
  return keys;
}

const std::set<std::string> kSweepParameters{"m", "F", "N_p", "N_r", "lambda_L", "omega_m"};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& raw, const std::string& where) {
  const std::string s = trim(raw);
  double v = 0.0;
  const char* first = s.data();
  if (!s.empty() && s.front() == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || std::isnan(v)) {
    throw ConfigError(where + ": expected a number, got '" + raw + "'");
  }
  return v;
}

long long to_integer(const std::string& raw, const std::string& where) {
  const double v = to_double(raw, where);
  if (!std::isfinite(v) || v != std::floor(v) || std::abs(v) > 9.0e15) {
    throw ConfigError(where + ": expected an integer, got '" + raw + "'");
  }
  return static_cast<long long>(v);
}

bool to_bool(const std::string& raw, const std::string& where) {
  std::string s = trim(raw);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "true" || s == "yes" || s == "1") return true;
  if (s == "false" || s == "no" || s == "0") return false;
  throw ConfigError(where + ": expected true or false, got '" + raw + "'");
}

// Typed access to one INI section.
class Section {
 public:
  Section(std::string name, const pt::ptree& tree) : name_(std::move(name)), tree_(tree) {}

  bool has(const std::string& key) const { return tree_.find(key) != tree_.not_found(); }
  std::string where(const std::string& key) const { return "[" + name_ + "] " + key; }

  std::string text(const std::string& key, const std::string& fallback = {}) const {
    const auto it = tree_.find(key);
    return it == tree_.not_found() ? fallback : trim(it->second.data());
  }
  double number(const std::string& key, double fallback) const {
    return has(key) ? to_double(text(key), where(key)) : fallback;
  }
  std::optional<double> maybe_number(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return to_double(text(key), where(key));
  }
  double required(const std::string& key) const {
    if (!has(key)) throw ConfigError(where(key) + ": required key is missing");
    return to_double(text(key), where(key));
  }
  long long integer(const std::string& key, long long fallback) const {
    return has(key) ? to_integer(text(key), where(key)) : fallback;
  }
  bool flag(const std::string& key, bool fallback) const {
    return has(key) ? to_bool(text(key), where(key)) : fallback;
  }

 private:
  std::string name_;
  const pt::ptree& tree_;
};

void check(bool ok, const std::string& where, const std::string& requirement) {
  if (!ok) throw ConfigError(where + ": must satisfy " + requirement);
}

DeformationModel parse_deformation(const Section& s) {
  DeformationKind kind;
  try {
    kind = parse_deformation_kind(s.text("model", "none"));
  } catch (const Error& e) {
    throw ConfigError(s.where("model") + ": " + e.what());
  }
  const double strength = s.number("strength", 0.0);
  check(std::isfinite(strength) && strength >= 0.0, s.where("strength"), "0 <= strength < inf");
  if (kind == DeformationKind::None) {
    check(strength == 0.0, s.where("strength"), "strength = 0 for model none");
  }
  return {kind, strength};
}

ExperimentSpec parse_physical(const Section& s) {
  ExperimentSpec spec;
  spec.mass_kg = s.required("m_kg");
  if (s.has("omega_m_rad_s") && s.has("f_m_hz")) {
    throw ConfigError("[physical]: give either omega_m_rad_s or f_m_hz, not both");
  }
  if (s.has("f_m_hz")) {
    spec.omega_m = 2.0 * std::numbers::pi * s.required("f_m_hz");
  } else {
    spec.omega_m = s.required("omega_m_rad_s");
  }
  spec.finesse = s.required("finesse");
  spec.wavelength_m = s.required("lambda_L_m");
  spec.photons_per_pulse = s.required("N_p");
  spec.runs = s.number("N_r", 1.0);
  spec.nbar = s.number("nbar", 0.0);
  spec.temperature_K = s.number("T_K", 0.0);
  spec.quality_factor = s.number("Q", spec.quality_factor);
  spec.sigma_out = s.number("sigma_out", 0.5);
  return spec;
}

NoiseSection parse_noise(const Section& s) {
  NoiseSection n;
  n.eta = s.number("eta", 1.0);
  check(n.eta > 0.0 && n.eta <= 1.0, s.where("eta"), "0 < eta <= 1");
  n.lambda = s.maybe_number("lambda");
  if (n.lambda) check(std::isfinite(*n.lambda) && *n.lambda > 0.0, s.where("lambda"), "lambda > 0");
  n.pulse = s.text("pulse");
  n.pulse_tau_s = s.number("pulse_tau_s", 0.0);
  n.pulse_table = s.text("pulse_table");
  n.normalize_pulse = s.flag("normalize_pulse", false);
  n.kappa_per_s = s.number("kappa_per_s", 0.0);
  n.mc_samples = s.integer("mc_samples", 0);
  if (!n.pulse.empty()) {
    static const std::set<std::string> kinds{"square", "gaussian", "exponential", "table"};
    check(kinds.count(n.pulse) == 1, s.where("pulse"), "pulse in {square, gaussian, exponential, table}");
    check(std::isfinite(n.kappa_per_s) && n.kappa_per_s > 0.0, s.where("kappa_per_s"), "kappa > 0");
    if (n.pulse == "table") {
      check(!n.pulse_table.empty(), s.where("pulse_table"), "a file path when pulse = table");
    } else {
      check(std::isfinite(n.pulse_tau_s) && n.pulse_tau_s > 0.0, s.where("pulse_tau_s"), "tau > 0");
    }
  }
  check(n.mc_samples == 0 || n.mc_samples >= 1000, s.where("mc_samples"),
        "mc_samples = 0 or mc_samples >= 1000");
  return n;
}

OracleSection parse_oracle(const Section& s) {
  OracleSection o;
  o.alpha = s.number("alpha", o.alpha);
  check(std::isfinite(o.alpha) && o.alpha >= 0.0, s.where("alpha"), "alpha >= 0");
  o.nbar = s.number("nbar", o.nbar);
  check(std::isfinite(o.nbar) && o.nbar >= 0.0, s.where("nbar"), "nbar >= 0");
  const long long opt = s.integer("opt_dim", o.opt_dim);
  const long long mech = s.integer("mech_dim", o.mech_dim);
  check(opt >= 2 && opt <= 4096, s.where("opt_dim"), "2 <= opt_dim <= 4096");
  check(mech >= 2 && mech <= 4096, s.where("mech_dim"), "2 <= mech_dim <= 4096");
  o.opt_dim = static_cast<int>(opt);
  o.mech_dim = static_cast<int>(mech);
  o.lambda = s.number("lambda", o.lambda);
  check(std::isfinite(o.lambda) && o.lambda > 0.0, s.where("lambda"), "lambda > 0");
  o.strength = s.number("strength", o.strength);
  check(o.strength >= 0.0 && o.strength < 1.0, s.where("strength"), "0 <= strength < 1");
  o.tolerance = s.maybe_number("tolerance");
  if (o.tolerance) check(*o.tolerance > 0.0, s.where("tolerance"), "tolerance > 0");
  o.method = s.text("method", o.method);
  check(o.method == "reduced" || o.method == "literal", s.where("method"),
        "method in {reduced, literal}");
  return o;
}

SweepSection parse_sweep(const Section& s) {
  SweepSection w;
  w.parameter = s.text("parameter");
  check(kSweepParameters.count(w.parameter) == 1, s.where("parameter"),
        "parameter in {m, F, N_p, N_r, lambda_L, omega_m}");
  try {
    w.grid = parse_grid(s.text("grid"));
  } catch (const ConfigError& e) {
    throw ConfigError(s.where("grid") + ": " + e.what());
  }
  for (double v : w.grid) check(std::isfinite(v) && v > 0.0, s.where("grid"), "grid values > 0");
  return w;
}

Figure1Section parse_figure1(const Section& s) {
  Figure1Section f;
  if (s.has("beta0")) {
    try {
      f.beta0 = parse_grid(s.text("beta0"));
    } catch (const ConfigError& e) {
      throw ConfigError(s.where("beta0") + ": " + e.what());
    }
  }
  for (double b : f.beta0) check(std::isfinite(b) && b >= 0.0, s.where("beta0"), "beta0 >= 0");
  f.dp_min = s.number("dp_min", f.dp_min);
  f.dp_max = s.number("dp_max", f.dp_max);
  check(f.dp_min > 0.0 && f.dp_max > f.dp_min && std::isfinite(f.dp_max), s.where("dp_min"),
        "0 < dp_min < dp_max");
  const long long points = s.integer("points", f.points);
  check(points >= 2 && points <= 1000000, s.where("points"), "2 <= points <= 1e6");
  f.points = static_cast<int>(points);
  return f;
}

OutputSection parse_output(const Section& s) {
  OutputSection o;
  const std::string fmt = s.text("format", "csv");
  if (fmt == "csv") {
    o.format = OutputFormat::Csv;
  } else if (fmt == "json") {
    o.format = OutputFormat::Json;
  } else {
    throw ConfigError(s.where("format") + ": must satisfy format in {csv, json}");
  }
  o.path = s.text("path");
  return o;
}

Constants parse_constants(const Section& s) {
  Constants k;
  k.hbar = s.number("hbar", k.hbar);
  k.c = s.number("c", k.c);
  k.k_B = s.number("k_B", k.k_B);
  k.planck_mass = s.number("planck_mass", k.planck_mass);
  k.planck_length = s.number("planck_length", k.planck_length);
  return k;
}

void append(std::ostringstream& out, const std::string& key, double v) {
  out << key << " = " << format_number(v) << '\n';
}

std::string join(const std::vector<double>& values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) s += ", ";
    s += format_number(values[i]);
  }
  return s;
}

}  // namespace

std::string format_number(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw Error("format_number: conversion failed");
  return std::string(buf, ptr);
}

std::vector<double> parse_grid(const std::string& raw) {
  const std::string text = trim(raw);
  std::vector<double> out;
  if (text.empty()) return out;
  std::istringstream words(text);
  std::string head;
  words >> head;
  if (head == "linspace" || head == "logspace") {
    std::string a, b, n;
    std::string extra;
    if (!(words >> a >> b >> n) || (words >> extra)) {
      throw ConfigError("expected '" + head + " start stop count'");
    }
    const double lo = to_double(a, head), hi = to_double(b, head);
    const long long count = to_integer(n, head);
    if (count < 1 || count > 1000000) throw ConfigError(head + ": count must be in [1, 1e6]");
    if (head == "logspace" && !(lo > 0.0 && hi > 0.0)) {
      throw ConfigError("logspace: endpoints must be > 0");
    }
    for (long long i = 0; i < count; ++i) {
      const double f = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
      out.push_back(head == "linspace" ? lo + f * (hi - lo)
                                       : std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo))));
    }
    return out;
  }
  std::string item;
  std::istringstream list(text);
  while (std::getline(list, item, ',')) {
    if (trim(item).empty()) throw ConfigError("empty entry in list '" + text + "'");
    out.push_back(to_double(item, "grid"));
  }
  return out;
}

RunConfig parse_config(std::istream& in, const ParseOptions& options) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }

  for (const auto& [name, body] : tree) {
    const auto it = known_keys().find(name);
    if (it == known_keys().end() || !body.data().empty()) {
      throw ConfigError("unknown section or top-level key '" + name + "'");
    }
    for (const auto& [key, value] : body) {
      if (it->second.count(key) == 0) throw ConfigError("unknown key [" + name + "] " + key);
    }
  }

  const auto section = [&](const std::string& name) -> std::optional<Section> {
    const auto it = tree.find(name);
    if (it == tree.not_found()) return std::nullopt;
    return Section(name, it->second);
  };

  RunConfig cfg;
  if (auto s = section("constants")) {
    if (!options.allow_unsafe_constants) {
      throw ConfigError("[constants] is only accepted with --unsafe-constants");
    }
    cfg.constants = parse_constants(*s);
  }
  if (auto s = section("deformation")) cfg.deformation = parse_deformation(*s);
  if (auto s = section("physical")) {
    cfg.physical = parse_physical(*s);
    try {
      PhysicalParams check_params(*cfg.physical, cfg.effective_constants());
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("[physical]: ") + e.what());
    }
  }
  if (auto s = section("noise")) cfg.noise = parse_noise(*s);
  if (auto s = section("oracle")) cfg.oracle = parse_oracle(*s);
  if (auto s = section("sweep")) cfg.sweep = parse_sweep(*s);
  if (auto s = section("figure1")) cfg.figure1 = parse_figure1(*s);
  if (auto s = section("output")) cfg.output = parse_output(*s);
  return cfg;
}

RunConfig parse_config_file(const std::filesystem::path& path, const ParseOptions& options) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  return parse_config(in, options);
}

RunConfig parse_config_string(const std::string& text, const ParseOptions& options) {
  std::istringstream in(text);
  return parse_config(in, options);
}

std::string serialize_config(const RunConfig& cfg) {
  std::ostringstream out;
  out << "[deformation]\nmodel = " << to_string(cfg.deformation.kind) << '\n';
  append(out, "strength", cfg.deformation.bare_strength);

  if (cfg.physical) {
    const auto& p = *cfg.physical;
    out << "\n[physical]\n";
    append(out, "m_kg", p.mass_kg);
    append(out, "omega_m_rad_s", p.omega_m);
    append(out, "finesse", p.finesse);
    append(out, "lambda_L_m", p.wavelength_m);
    append(out, "N_p", p.photons_per_pulse);
    append(out, "N_r", p.runs);
    append(out, "nbar", p.nbar);
    append(out, "T_K", p.temperature_K);
    append(out, "Q", p.quality_factor);
    append(out, "sigma_out", p.sigma_out);
  }
  if (cfg.noise) {
    const auto& n = *cfg.noise;
    out << "\n[noise]\n";
    append(out, "eta", n.eta);
    if (n.lambda) append(out, "lambda", *n.lambda);
    if (!n.pulse.empty()) out << "pulse = " << n.pulse << '\n';
    append(out, "pulse_tau_s", n.pulse_tau_s);
    if (!n.pulse_table.empty()) out << "pulse_table = " << n.pulse_table << '\n';
    out << "normalize_pulse = " << (n.normalize_pulse ? "true" : "false") << '\n';
    append(out, "kappa_per_s", n.kappa_per_s);
    out << "mc_samples = " << n.mc_samples << '\n';
  }
  if (cfg.oracle) {
    const auto& o = *cfg.oracle;
    out << "\n[oracle]\n";
    append(out, "alpha", o.alpha);
    append(out, "nbar", o.nbar);
    out << "opt_dim = " << o.opt_dim << "\nmech_dim = " << o.mech_dim << '\n';
    append(out, "lambda", o.lambda);
    append(out, "strength", o.strength);
    if (o.tolerance) append(out, "tolerance", *o.tolerance);
    out << "method = " << o.method << '\n';
  }
  if (cfg.sweep) {
    out << "\n[sweep]\nparameter = " << cfg.sweep->parameter << "\ngrid = " << join(cfg.sweep->grid)
        << '\n';
  }
  if (cfg.figure1) {
    const auto& f = *cfg.figure1;
    out << "\n[figure1]\nbeta0 = " << join(f.beta0) << '\n';
    append(out, "dp_min", f.dp_min);
    append(out, "dp_max", f.dp_max);
    out << "points = " << f.points << '\n';
  }
  out << "\n[output]\nformat = " << (cfg.output.format == OutputFormat::Json ? "json" : "csv")
      << '\n';
  if (!cfg.output.path.empty()) out << "path = " << cfg.output.path << '\n';
  if (cfg.constants) {
    const auto& k = *cfg.constants;
    out << "\n[constants]\n";
    append(out, "hbar", k.hbar);
    append(out, "c", k.c);
    append(out, "k_B", k.k_B);
    append(out, "planck_mass", k.planck_mass);
    append(out, "planck_length", k.planck_length);
  }
  return out.str();
}

const ExperimentSpec& require_physical(const RunConfig& config) {
  if (!config.physical) throw ConfigError("this command needs a [physical] section");
  return *config.physical;
}

}  // namespace cprobe::cli
