#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "equivar/json_io.hpp"

namespace equivar::lab {

enum ExitCode : int {
  kOk = 0,
  kValidationFailure = 2,
  kNonConvergence = 3,
  kObstructed = 4,
};

struct Overrides {
  std::optional<unsigned long long> seed;
  std::optional<double> tol;  // flow tolerance
};

struct RunResult {
  int exit_code = kOk;
  Json report;
  // File name -> contents, written next to report.json.
  std::map<std::string, std::string> artifacts;
  std::vector<std::string> diagnostics;
};

const std::vector<std::string>& task_names();

// Runs one task without touching the file system. Never throws; every
// failure is mapped to an exit code with diagnostics.
RunResult run(const std::string& task, const Json& config, const Overrides& overrides = {});

// Reads the config file, runs the task and writes report.json plus the
// artifacts into out_dir. Diagnostics go to err.
int run_files(const std::string& task, const std::string& config_path, const std::string& out_dir,
              const Overrides& overrides, std::ostream& err);

}  // namespace equivar::lab
