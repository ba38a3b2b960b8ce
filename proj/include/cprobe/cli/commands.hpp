#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cprobe/cli/config.hpp"
#include "cprobe/cli/output.hpp"

namespace cprobe::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitConfig = 2,
  kExitRegime = 3,
  kExitCutoff = 4,
  kExitIo = 5,
  kExitNumeric = 6,
  kExitCheckFailed = 7,
};

struct CommandContext {
  std::uint64_t seed = 1;
  int jobs = 1;
  std::ostream* diagnostics = nullptr;  // may be null
};

Table cmd_theta(const RunConfig& config, const CommandContext& ctx);

struct OracleResult {
  Table table;
  bool pass = false;
};
OracleResult cmd_oracle(const RunConfig& config, const CommandContext& ctx);

Table cmd_table2(const CommandContext& ctx);
Table cmd_sweep(const RunConfig& config, const CommandContext& ctx);
Table cmd_figure1(const Figure1Section& figure, const CommandContext& ctx);
Table cmd_noise_budget(const RunConfig& config, const CommandContext& ctx);

/// Full command-line entry point; returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cprobe::cli
