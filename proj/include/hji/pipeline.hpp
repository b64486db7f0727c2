#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

namespace hji {

enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 1,
  kExitNonConvergence = 2,
  kExitViolation = 3,
  kExitOracle = 4,
};

struct Invocation {
  std::string subcommand;  // check | solve | sweep | verify | oracle | all
  std::filesystem::path config;
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
};

/// Runs one subcommand. Reports go to <out>/run.json (sections of earlier
/// runs in the same directory are kept), plus the CSV and mc_report.json
/// files of the stage. Progress lines go to `log`.
int run(const Invocation& inv, std::ostream& log);

}  // namespace hji
