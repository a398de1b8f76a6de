#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lab.hpp"

int main(int argc, char** argv) {
  CLI::App app{"equivar-lab: batch runner for twisted harmonic map experiments"};
  std::string task;
  std::string config;
  std::string out = "equivar-out";
  unsigned long long seed = 0;
  double tol = 0.0;
  app.add_option("task", task, "Task to run")
      ->required()
      ->check(CLI::IsMember(equivar::lab::task_names()));
  app.add_option("--config", config, "Experiment config (JSON)")->required();
  app.add_option("--out", out, "Output directory")->capture_default_str();
  auto* seed_opt = app.add_option("--seed", seed, "Override the config seed");
  auto* tol_opt = app.add_option("--tol", tol, "Override the flow tolerance")->check(CLI::PositiveNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : equivar::lab::kValidationFailure;
  }
  equivar::lab::Overrides ov;
  if (seed_opt->count() > 0) ov.seed = seed;
  if (tol_opt->count() > 0) ov.tol = tol;
  return equivar::lab::run_files(task, config, out, ov, std::cerr);
}
