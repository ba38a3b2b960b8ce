#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "cprobe/cli/commands.hpp"
#include "cprobe/cli/config.hpp"
#include "cprobe/cli/output.hpp"
#include "cprobe/errors.hpp"
#include "cprobe/fit.hpp"

using namespace cprobe;
using namespace cprobe::cli;

namespace {

const std::string kMuConfig = R"([deformation]
model = mu
strength = 1
[physical]
m_kg = 1e-11
f_m_hz = 1e5
finesse = 1e5
lambda_L_m = 1064e-9
N_p = 1e8
N_r = 1
nbar = 10
T_K = 0.05
Q = 1e7
)";

struct Invocation {
  int code = -1;
  std::string out;
  std::string err;
};

Invocation invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  Invocation r;
  r.code = run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::filesystem::path write_temp(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / ("cprobe_cli_" + name);
  std::ofstream f(path);
  f << text;
  return path;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  FAIL("missing column " << name);
  return 0;
}

}  // namespace

TEST_CASE("config parsing and round trip") {
  const std::string text = kMuConfig + R"([noise]
eta = 0.9
mc_samples = 2000
[oracle]
alpha = 2
lambda = 0.3
opt_dim = 24
mech_dim = 32
strength = 1e-3
method = literal
[sweep]
parameter = N_p
grid = logspace 1e6 1e8 3
[figure1]
beta0 = 0, 1, 4
points = 11
[output]
format = json
)";
  const RunConfig c = parse_config_string(text);
  CHECK(c.deformation.kind == DeformationKind::Mu);
  REQUIRE(c.physical.has_value());
  CHECK(c.physical->omega_m == doctest::Approx(2.0 * 3.141592653589793 * 1e5));
  CHECK(c.physical->quality_factor == 1e7);
  REQUIRE(c.sweep.has_value());
  CHECK(c.sweep->grid.size() == 3);
  CHECK(c.sweep->grid[1] == doctest::Approx(1e7));
  CHECK(c.output.format == OutputFormat::Json);

  const RunConfig again = parse_config_string(serialize_config(c));
  CHECK(again == c);
  CHECK(serialize_config(again) == serialize_config(c));

  CHECK(parse_config_string(serialize_config(RunConfig{})) == RunConfig{});
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(parse_config_string(kMuConfig + "colour = red\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("[physics]\nm_kg = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("[deformation]\nmodel = delta\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("[deformation]\nmodel = beta\nstrength = -1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("[deformation]\nmodel = beta\nstrength = abc\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("[oracle]\nopt_dim = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("[output]\nformat = xml\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("[sweep]\nparameter = colour\ngrid = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("[constants]\nhbar = 1\n"), ConfigError);
  const RunConfig unsafe = parse_config_string("[constants]\nhbar = 1\n", {true});
  REQUIRE(unsafe.constants.has_value());
  CHECK(unsafe.constants->hbar == 1.0);
  CHECK(unsafe.constants->c == kConstants.c);
  try {
    parse_config_string(kMuConfig + "colour = red\n");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("colour") != std::string::npos);
  }
}

TEST_CASE("number formatting and grids") {
  for (double v : {0.1, 1e-300, 3.0, 2.0 / 3.0, 6.02214076e23}) {
    CHECK(std::stod(format_number(v)) == v);
  }
  CHECK(parse_grid("").empty());
  CHECK(parse_grid("1, 2,3") == std::vector<double>{1.0, 2.0, 3.0});
  CHECK(parse_grid("linspace 0 1 5")[2] == doctest::Approx(0.5));
  CHECK(parse_grid("logspace 1 100 3")[1] == doctest::Approx(10.0));
  CHECK_THROWS_AS(parse_grid("linspace 0 1"), ConfigError);
  CHECK_THROWS_AS(parse_grid("logspace 0 2 3"), ConfigError);
}

TEST_CASE("output writers") {
  Table t;
  t.columns = {"name", "x_m", "n", "ok"};
  t.add_row({std::string("a"), 0.5, 3LL, true});
  t.add_row({std::string("b"), std::nan(""), 4LL, false});
  std::ostringstream csv;
  write_csv(t, csv);
  CHECK(csv.str() == "name,x_m,n,ok\na,5.000000000000e-01,3,true\nb,nan,4,false\n");
  std::ostringstream json;
  write_json(t, json);
  CHECK(json.str().find("null") != std::string::npos);
  CHECK(json.str().find("\"x_m\"") != std::string::npos);
  CHECK_THROWS_AS(t.add_row({1.0}), Error);
}

TEST_CASE("theta command") {
  const auto cfg = write_temp("mu.ini", kMuConfig);
  const Invocation r = invoke({"--config", cfg.string(), "theta"});
  CHECK(r.code == kExitOk);
  const auto rows = parse_csv(r.out);
  REQUIRE(rows.size() == 2);
  const double theta = std::stod(rows[1][column_index(rows[0], "theta_abs_rad")]);
  CHECK(theta > 0.5e-4);
  CHECK(theta < 2e-4);

  std::string zero = kMuConfig;
  zero.replace(zero.find("strength = 1"), 12, "strength = 0");
  const Invocation z = invoke({"--config", write_temp("zero.ini", zero).string(), "theta"});
  CHECK(z.code == kExitOk);
  const auto zrows = parse_csv(z.out);
  CHECK(std::stod(zrows[1][column_index(zrows[0], "theta_abs_rad")]) == 0.0);

  std::string strong = kMuConfig;
  strong.replace(strong.find("finesse = 1e5"), 13, "finesse = 1e8");
  const Invocation s = invoke({"--config", write_temp("strong.ini", strong).string(), "theta"});
  CHECK(s.code == kExitRegime);
  CHECK(s.err.find("λ < 1") != std::string::npos);
  CHECK(s.out.empty());
}

TEST_CASE("exit codes") {
  CHECK(invoke({}).code == kExitUsage);
  CHECK(invoke({"frobnicate"}).code == kExitUsage);
  CHECK(invoke({"--config", "/nonexistent/run.ini", "theta"}).code == kExitIo);
  CHECK(invoke({"--config", write_temp("bad.ini", "[deformation]\nmodel = delta\n").string(),
                "theta"})
            .code == kExitConfig);
  // theta without a [physical] block is a configuration error.
  CHECK(invoke({"--config", write_temp("nophys.ini", "[deformation]\nmodel = mu\n").string(),
                "theta"})
            .code == kExitConfig);

  const auto cfg = write_temp("mu_io.ini", kMuConfig);
  const Invocation io = invoke({"--config", cfg.string(), "--output", "/nonexistent/dir/out.csv", "theta"});
  CHECK(io.code == kExitIo);

  const auto under = write_temp("under.ini", "[oracle]\nalpha = 2\nnbar = 2\nmech_dim = 4\n");
  const Invocation c = invoke({"--config", under.string(), "oracle"});
  CHECK(c.code == kExitCutoff);
  CHECK(c.err.find("cutoff") != std::string::npos);
}

TEST_CASE("the installed binary reports the same exit codes") {
  const std::string tool = CPROBE_TOOL_PATH;
  const auto under = write_temp("under_bin.ini", "[oracle]\nalpha = 2\nnbar = 2\nmech_dim = 4\n");
  const auto status = [&](const std::string& args) {
    const std::string cmd = "\"" + tool + "\" " + args + " >/dev/null 2>&1";
    const int raw = std::system(cmd.c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  CHECK(status("table2") == kExitOk);
  CHECK(status("--config \"" + under.string() + "\" oracle") == kExitCutoff);
  CHECK(status("--config /nonexistent/run.ini theta") == kExitIo);
}

TEST_CASE("oracle command") {
  const auto plain = write_temp("oracle.ini", "[oracle]\nalpha = 2\nlambda = 0.3\n");
  const Invocation r = invoke({"--config", plain.string(), "oracle"});
  CHECK(r.code == kExitOk);
  const auto rows = parse_csv(r.out);
  REQUIRE(rows.size() == 2);
  CHECK(std::stod(rows[1][column_index(rows[0], "rel_error")]) < 1e-8);
  CHECK(rows[1][column_index(rows[0], "pass")] == "true");

  const auto beta = write_temp(
      "oracle_beta.ini", "[deformation]\nmodel = beta\n[oracle]\nalpha = 2\nlambda = 0.3\nstrength = 1e-3\n");
  const Invocation b = invoke({"--config", beta.string(), "oracle"});
  CHECK(b.code == kExitOk);
  const auto brows = parse_csv(b.out);
  const double exponent = std::stod(brows[1][column_index(brows[0], "linearity_exponent")]);
  CHECK(exponent == doctest::Approx(1.0).epsilon(0.02));

  // A tolerance below the first-order error is reported as a failed check.
  const auto strict = write_temp(
      "oracle_strict.ini",
      "[deformation]\nmodel = beta\n[oracle]\nalpha = 2\nlambda = 0.3\nstrength = 1e-3\ntolerance = 1e-9\n");
  CHECK(invoke({"--config", strict.string(), "oracle"}).code == kExitCheckFailed);
}

TEST_CASE("table2 command") {
  const Invocation r = invoke({"table2"});
  CHECK(r.code == kExitOk);
  const auto rows = parse_csv(r.out);
  REQUIRE(rows.size() == 4);
  const auto& h = rows[0];
  for (const char* name : {"model", "F", "m_kg", "f_m_Hz", "lambda_L_m", "N_p", "N_r", "dPhi_rad",
                           "resolvable_strength"}) {
    CHECK(column_index(h, name) < h.size());
  }
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double d = std::stod(rows[i][column_index(h, "resolvable_strength")]);
    CHECK(d > 0.2);
    CHECK(d < 5.0);
    CHECK(rows[i][column_index(h, "strength_in_band")] == "true");
  }
  CHECK(rows[1][0] == "mu");
  CHECK(rows[2][0] == "gamma");
  CHECK(rows[3][0] == "beta");
}

TEST_CASE("sweep command") {
  const auto run_sweep = [](const std::string& model, const std::string& grid) {
    std::string text = kMuConfig;
    text.replace(text.find("model = mu"), 10, "model = " + model);
    text.replace(text.find("nbar = 10"), 9, "nbar = 0");
    const auto cfg = write_temp("sweep_" + model + ".ini", text);
    return invoke({"--config", cfg.string(), "sweep", "--parameter", "N_p", "--grid", grid});
  };

  const Invocation empty = run_sweep("mu", "");
  CHECK(empty.code == kExitOk);
  const auto erows = parse_csv(empty.out);
  CHECK(erows.size() == 1);
  CHECK(erows[0][0] == "N_p");

  struct Case {
    const char* model;
    const char* strength;
    double slope;
  };
  for (const Case c : {Case{"mu", "1", 1.0}, Case{"beta", "1e12", 3.0}}) {
    std::string text = kMuConfig;
    text.replace(text.find("model = mu"), 10, std::string("model = ") + c.model);
    text.replace(text.find("strength = 1"), 12, std::string("strength = ") + c.strength);
    const auto cfg = write_temp(std::string("slope_") + c.model + ".ini", text);
    const Invocation r =
        invoke({"--config", cfg.string(), "sweep", "--parameter", "N_p", "--grid", "logspace 1e6 1e8 5"});
    REQUIRE(r.code == kExitOk);
    const auto rows = parse_csv(r.out);
    REQUIRE(rows.size() == 6);
    std::vector<double> x, y;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      x.push_back(std::stod(rows[i][column_index(rows[0], "N_p")]));
      y.push_back(std::stod(rows[i][column_index(rows[0], "theta_abs_rad")]));
    }
    CHECK(fit_power_exponent(x, y) == doctest::Approx(c.slope).epsilon(0.01 / c.slope));
  }

  // Output bytes do not depend on the worker count.
  const auto cfg = write_temp("sweep_jobs.ini", kMuConfig);
  const Invocation one = invoke({"--config", cfg.string(), "--jobs", "1", "sweep", "--parameter",
                                 "F", "--grid", "linspace 5e4 2e5 7"});
  const Invocation four = invoke({"--config", cfg.string(), "--jobs", "4", "sweep", "--parameter",
                                  "F", "--grid", "linspace 5e4 2e5 7"});
  CHECK(one.code == kExitOk);
  CHECK(one.out == four.out);

  CHECK(invoke({"--config", cfg.string(), "sweep", "--parameter", "colour", "--grid", "1"}).code ==
        kExitConfig);
}

TEST_CASE("figure1 command") {
  const Invocation r = invoke({"figure1", "--beta0", "0", "--beta0", "1", "--beta0", "4", "--points", "41"});
  CHECK(r.code == kExitOk);
  const auto rows = parse_csv(r.out);
  REQUIRE(rows.size() == 1 + 3 * 41);
  const auto& h = rows[0];
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double beta0 = std::stod(rows[i][column_index(h, "beta0")]);
    const double dp = std::stod(rows[i][column_index(h, "dp_MPc")]);
    const double dx = std::stod(rows[i][column_index(h, "dx_LP")]);
    const double dx0 = std::stod(rows[i][column_index(h, "dx_standard_LP")]);
    CHECK(dx >= dx0);
    if (beta0 == 0.0) CHECK(dx == doctest::Approx(0.5 / dp).epsilon(1e-12));
  }
  CHECK(r.err.find("minimum dx = 1.000000000000e+00 at dp = 1.000000000000e+00") != std::string::npos);

  const Invocation j = invoke({"--format", "json", "figure1", "--beta0", "1", "--points", "3"});
  CHECK(j.code == kExitOk);
  CHECK(j.out.front() == '[');
}

TEST_CASE("noise-budget command") {
  std::string text = kMuConfig + "[noise]\neta = 0.9\n";
  text.replace(text.find("model = mu"), 10, "model = beta");
  text.replace(text.find("strength = 1"), 12, "strength = 1e22");
  const Invocation r = invoke({"--config", write_temp("nb.ini", text).string(), "noise-budget"});
  CHECK(r.code == kExitOk);
  CHECK(r.err.find("0.478 (~0.5)") != std::string::npos);

  std::string hot = text;
  hot.replace(hot.find("T_K = 0.05"), 10, "T_K = 0.2");
  hot.replace(hot.find("Q = 1e7"), 7, "Q = 1e6");
  const Invocation h = invoke({"--config", write_temp("nb_hot.ini", hot).string(), "noise-budget"});
  CHECK(h.code == kExitOk);
  bool found = false;
  for (const auto& row : parse_csv(h.out)) {
    if (row.size() >= 5 && row[1].find("bath temperature") != std::string::npos) {
      found = true;
      CHECK(row[4] == "fail");
    }
  }
  CHECK(found);

  // No [noise] block: every factor is 1.
  const Invocation plain = invoke({"--config", write_temp("nb_plain.ini", kMuConfig).string(), "noise-budget"});
  CHECK(plain.code == kExitOk);
  for (const auto& row : parse_csv(plain.out)) {
    if (row.size() >= 3 && row[1] == "composite_reduction") CHECK(std::stod(row[2]) == 1.0);
  }
}

TEST_CASE("deterministic output") {
  const auto cfg =
      write_temp("det.ini", kMuConfig + "[noise]\neta = 0.9\nmc_samples = 2000\n");
  const auto a = invoke({"--config", cfg.string(), "--seed", "7", "noise-budget"});
  const auto b = invoke({"--config", cfg.string(), "--seed", "7", "noise-budget"});
  const auto c = invoke({"--config", cfg.string(), "--seed", "7", "--jobs", "3", "noise-budget"});
  CHECK(a.code == kExitOk);
  CHECK(a.out == b.out);
  CHECK(a.out == c.out);
  const auto other = invoke({"--config", cfg.string(), "--seed", "8", "noise-budget"});
  CHECK(other.out != a.out);

  const auto out_path = std::filesystem::temp_directory_path() / "cprobe_cli_table2.csv";
  CHECK(invoke({"--output", out_path.string(), "table2"}).code == kExitOk);
  std::ifstream f(out_path);
  std::stringstream ss;
  ss << f.rdbuf();
  CHECK(ss.str() == invoke({"table2"}).out);
}

TEST_CASE("constants overrides need the explicit flag") {
  const auto cfg = write_temp("unsafe.ini", kMuConfig + "[constants]\nplanck_mass = 4.4e-8\n");
  CHECK(invoke({"--config", cfg.string(), "theta"}).code == kExitConfig);
  const Invocation r = invoke({"--config", cfg.string(), "--unsafe-constants", "theta"});
  CHECK(r.code == kExitOk);
  const Invocation ref = invoke({"--config", write_temp("safe.ini", kMuConfig).string(), "theta"});
  const auto rows = parse_csv(r.out), ref_rows = parse_csv(ref.out);
  const auto col = column_index(rows[0], "theta_abs_rad");
  // mu = mu0 m^2 / M_P^2: doubling M_P quarters Theta.
  CHECK(std::stod(rows[1][col]) == doctest::Approx(std::stod(ref_rows[1][col]) / 4.0).epsilon(1e-10));
}
