#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "lab.hpp"

using namespace equivar;
using equivar::lab::run;

namespace {

Json load_config(const std::string& name) {
  std::ifstream in(std::string(EQUIVAR_CONFIG_DIR) + "/" + name);
  return Json::parse(in);
}

}  // namespace

TEST(Cli, TaskNames) {
  const auto& names = lab::task_names();
  for (const char* t : {"flow", "energy", "hodge", "deform1", "deform2", "variation", "psh", "critical-scan",
                        "refine-study"}) {
    EXPECT_NE(std::find(names.begin(), names.end(), t), names.end()) << t;
  }
}

TEST(Cli, GeodesicFlow) {
  const lab::RunResult r = run("flow", load_config("geodesic_flow.json"));
  EXPECT_EQ(r.exit_code, lab::kOk);
  const double e = r.report.at("results").at("energy").get<double>();
  EXPECT_NEAR(e, 4.0 * std::log(2.0) * std::log(2.0), 1e-6);
  EXPECT_TRUE(r.artifacts.count("energy_history.csv"));
  EXPECT_TRUE(r.artifacts.count("map.json"));
  EXPECT_TRUE(r.artifacts.count("summary.csv"));
  EXPECT_EQ(r.report.at("schema_version").get<int>(), kSchemaVersion);
}

TEST(Cli, ParabolicFlowFlagsNonReductive) {
  const lab::RunResult r = run("flow", load_config("parabolic_flow.json"));
  EXPECT_EQ(r.exit_code, lab::kOk);
  const Json& res = r.report.at("results");
  EXPECT_FALSE(res.at("converged").get<bool>());
  EXPECT_FALSE(res.at("reductive_suspected").get<bool>());
  EXPECT_LT(res.at("energy").get<double>(), 1e-3);
}

TEST(Cli, FlowNonConvergenceExitCode) {
  Json cfg = load_config("geodesic_flow.json");
  cfg["flow"]["max_iter"] = 1;
  EXPECT_EQ(run("flow", cfg).exit_code, lab::kNonConvergence);
}

TEST(Cli, ObstructionReportsWitness) {
  const lab::RunResult r = run("deform2", load_config("obstruction_deform2.json"));
  EXPECT_EQ(r.exit_code, lab::kObstructed);
  const Json& ob = r.report.at("results").at("obstruction");
  EXPECT_NEAR(ob.at("defect").get<double>(), std::sqrt(2.0), 1e-8);
  EXPECT_TRUE(ob.contains("witness"));
  EXPECT_EQ(r.report.at("status").get<std::string>(), "obstructed");
}

TEST(Cli, MalformedConfigIsValidationFailure) {
  Json cfg = load_config("torus_hodge.json");
  cfg["mesh"]["kind"] = "klein";
  EXPECT_EQ(run("hodge", cfg).exit_code, lab::kValidationFailure);
  EXPECT_EQ(run("nope", cfg).exit_code, lab::kValidationFailure);
  Json bad = load_config("torus_hodge.json");
  bad["representation"] = {{"inline", {{"group", "SL_R"}, {"n", 2}, {"images", Json::array()}}}};
  const lab::RunResult r = run("hodge", bad);
  EXPECT_EQ(r.exit_code, lab::kValidationFailure);
  EXPECT_FALSE(r.diagnostics.empty());
}

TEST(Cli, BrokenRelatorIsValidationFailure) {
  Json cfg = Json::parse(R"({
    "mesh": {"kind": "torus", "size": [3, 3]},
    "representation": {"inline": {"group": "SL_R", "n": 2,
      "images": [[[1, 1], [0, 1]], [[1, 0], [1, 1]]]}}
  })");
  EXPECT_EQ(run("hodge", cfg).exit_code, lab::kValidationFailure);
}

TEST(Cli, PshOnRealGroupIsValidationFailure) {
  Json cfg = Json::parse(R"({
    "mesh": {"kind": "circle", "size": 8},
    "representation": {"family": "hyperbolic"},
    "path": {"kind": "abelian", "directions": [[[1, 0], [0, -1]]]}
  })");
  EXPECT_EQ(run("psh", cfg).exit_code, lab::kValidationFailure);
}

TEST(Cli, ReportIsDeterministic) {
  const Json cfg = load_config("torus_hodge.json");
  const lab::RunResult a = run("hodge", cfg), b = run("hodge", cfg);
  EXPECT_EQ(a.report.dump(), b.report.dump());
  EXPECT_EQ(a.artifacts, b.artifacts);
}

TEST(Cli, OverridesAreRecorded) {
  lab::Overrides o;
  o.seed = 99;
  o.tol = 1e-9;
  const lab::RunResult r = run("flow", load_config("geodesic_flow.json"), o);
  EXPECT_EQ(r.report.at("config").at("seed").get<unsigned long long>(), 99u);
  EXPECT_DOUBLE_EQ(r.report.at("config").at("tolerances").at("flow").get<double>(), 1e-9);
}

TEST(Cli, RunFilesWritesArtifacts) {
  const auto dir = std::filesystem::temp_directory_path() / "equivar_cli_test";
  std::filesystem::remove_all(dir);
  std::ostringstream err;
  const int code = lab::run_files("variation", std::string(EQUIVAR_CONFIG_DIR) + "/diagonal_variation.json",
                                  dir.string(), {}, err);
  EXPECT_EQ(code, lab::kOk) << err.str();
  EXPECT_TRUE(std::filesystem::exists(dir / "report.json"));
  std::ifstream fd(dir / "fd.csv");
  std::string header;
  std::getline(fd, header);
  EXPECT_EQ(header, "step,d1,d2");
  EXPECT_NE(lab::run_files("flow", (dir / "missing.json").string(), dir.string(), {}, err), lab::kOk);
  std::filesystem::remove_all(dir);
}
