#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "hexid/dataset.hpp"
#include "hexid/harness/acceptance.hpp"
#include "hexid/harness/artifacts.hpp"
#include "hexid/harness/commands.hpp"
#include "hexid/harness/config.hpp"
#include "hexid/harness/report.hpp"
#include "hexid/harness/scenarios.hpp"
#include "hexid/harness/svg.hpp"

using namespace hexid;
using namespace hexid::harness;
namespace fs = std::filesystem;

namespace {

// Small, fast pipeline rooted in a fresh directory.
ExperimentConfig tiny(const std::string& name) {
  const fs::path root = fs::path(HEXID_TEST_TMP) / name;
  fs::remove_all(root);
  ExperimentConfig c;
  c.paths.data_dir = (root / "data").string();
  c.paths.checkpoint_dir = (root / "ckpt").string();
  c.paths.report_dir = (root / "reports").string();
  c.sim.runs = 5;
  c.sim.run.duration = 500.0;
  c.scenarios.ol_runs = 2;
  c.scenarios.overlay_runs = 1;
  c.perpinn.hidden = {6, 6};
  c.perpinn.train.epochs = 4;
  c.pinn.hidden = {6, 6};
  c.pinn.train.epochs = 4;
  return c;
}

std::size_t data_rows(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) n += !line.empty();
  return n - 1;
}

}  // namespace

TEST(Config, JsonRoundTripIsLossless) {
  ExperimentConfig c;
  c.sim.runs = 7;
  c.sim.run.noise_mode = NoiseMode::process;
  c.perpinn.features = FeatureSpec::time_mean_temp;
  c.seeds = {1, 2, 3};
  const std::string text = to_json(c);
  const ExperimentConfig back = config_from_json(text);
  EXPECT_EQ(to_json(back), text);
  EXPECT_EQ(config_hash(back), config_hash(c));
  EXPECT_NE(config_hash(ExperimentConfig{}), config_hash(c));
  EXPECT_EQ(config_hash(c).size(), 16u);
}

TEST(Config, PartialFilesKeepDefaultsAndUnknownKeysFail) {
  const ExperimentConfig c = config_from_json(R"({"sim": {"runs": 12}})");
  EXPECT_EQ(c.sim.runs, 12);
  EXPECT_EQ(c.sim.run.sample_period, 50.0);
  EXPECT_THROW(config_from_json(R"({"sim": {"runz": 12}})"), ConfigError);
  EXPECT_THROW(config_from_json(R"({"sim": {"runs": "many"}})"), ConfigError);
  EXPECT_THROW(config_from_json("{not json"), ConfigError);
  EXPECT_THROW(config_from_json(R"({"sim": {"runs": 0}})"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/hexid.json"), ConfigError);
}

TEST(Config, ReportDirEnvironmentOverride) {
  ExperimentConfig c;
  c.paths.report_dir = "reports";
  ::setenv("HEXID_REPORT_DIR", "/tmp/elsewhere", 1);
  EXPECT_EQ(report_dir(c), "/tmp/elsewhere");
  ::unsetenv("HEXID_REPORT_DIR");
  EXPECT_EQ(report_dir(c), "reports");
}

TEST(Commands, SimulateWritesDeterministicFiles) {
  ExperimentConfig c = tiny("simulate");
  std::ostringstream out;
  ASSERT_EQ(cmd_simulate(c, out), kExitOk);
  const std::string path = dataset_path(c, "closed-loop");
  EXPECT_EQ(data_rows(path), 5u * 10u);
  EXPECT_TRUE(file_exists(path + ".meta.json"));
  EXPECT_NE(read_file(path + ".meta.json").find(config_hash(c)), std::string::npos);
  const std::string first = read_file(path);
  ASSERT_EQ(cmd_simulate(c, out), kExitOk);
  EXPECT_EQ(read_file(path), first);
  EXPECT_EQ(data_rows(dataset_path(c, "switch-test")), 2u * 10u);
}

TEST(Commands, SingleNoiselessRunGivesSixtyRows) {
  ExperimentConfig c = tiny("single");
  c.sim.runs = 1;
  c.scenarios.ol_runs = 1;
  c.sim.run.duration = 3000.0;
  c.sim.run.noise_level = 0.0;
  std::ostringstream out;
  ASSERT_EQ(cmd_simulate(c, out), kExitOk);
  EXPECT_EQ(data_rows(dataset_path(c, "closed-loop")), 60u);
}

TEST(Commands, IdentReportsVerdictAndFlagsInjectedState) {
  ExperimentConfig c = tiny("ident");
  c.sim.run.duration = 3000.0;
  std::ostringstream out;
  ASSERT_EQ(cmd_ident(c, true, out), kExitOk);
  const std::string csv = read_file(join_path(report_dir(c), "ident.csv"));
  // 100 simulated rows identifiable, the injected one not.
  EXPECT_NE(csv.find("\n100,"), std::string::npos);
  EXPECT_NE(csv.find(",3,0,"), std::string::npos);
  EXPECT_NE(out.str().find("1e-10"), std::string::npos);
}

TEST(Commands, InvalidModelIsUsageError) {
  ExperimentConfig c = tiny("badmodel");
  std::ostringstream out;
  EXPECT_THROW(cmd_train(c, "lstm", std::nullopt, out), ConfigError);
  EXPECT_THROW(cmd_eval(c, "perpinn", "sunny-day", std::nullopt, out), ConfigError);
  EXPECT_THROW(cmd_seed_study(c, {1}, true, out), ConfigError);
}

TEST(Commands, TrainBeforeSimulateFails) {
  ExperimentConfig c = tiny("nodata");
  std::ostringstream out;
  EXPECT_THROW(cmd_train(c, "pinn", std::nullopt, out), std::runtime_error);
  EXPECT_THROW(cmd_report(c, out), std::runtime_error);
}

TEST(Commands, FullPipeline) {
  ExperimentConfig c = tiny("pipeline");
  std::ostringstream out;
  ASSERT_EQ(cmd_simulate(c, out), kExitOk);
  ASSERT_EQ(cmd_train(c, "perpinn", std::nullopt, out), kExitOk);
  ASSERT_EQ(cmd_train(c, "pinn", std::nullopt, out), kExitOk);
  ASSERT_EQ(cmd_train(c, "pinn", 4567, out), kExitOk);
  EXPECT_NE(read_file(checkpoint_stem(c, "pinn", 4567) + ".model.json").find("\"seed\": \"4567\""),
            std::string::npos);
  EXPECT_NE(read_file(checkpoint_stem(c, "pinn") + ".model.json").find("\"seed\": \"1234\""),
            std::string::npos);

  for (const char* sc : kScenarios) {
    for (const char* model : {"perpinn", "pinn"}) ASSERT_EQ(cmd_eval(c, model, sc, std::nullopt, out), kExitOk);
  }
  // Re-evaluating replaces rows rather than appending.
  ASSERT_EQ(cmd_eval(c, "pinn", "cl-val", std::nullopt, out), kExitOk);
  EXPECT_EQ(read_metrics(join_path(report_dir(c), "metrics.csv")).size(), 8u);
  EXPECT_TRUE(file_exists(join_path(report_dir(c), "overlay_switch-test_pinn.csv")));
  EXPECT_TRUE(file_exists(join_path(report_dir(c), "energy_perpinn.txt")));

  ASSERT_EQ(cmd_report(c, out), kExitOk);
  const std::string md = read_file(join_path(report_dir(c), "summary.md"));
  EXPECT_NE(md.find(config_hash(c)), std::string::npos);
  EXPECT_NE(md.find("1234 4567"), std::string::npos);
  EXPECT_NE(md.find("| test (streams switched) |"), std::string::npos);
  const std::string u = read_file(join_path(report_dir(c), "u_overlay.csv"));
  EXPECT_EQ(u.substr(0, u.find('\n')), "t,U_true,U_perpinn,U_pinn,run_id");
  EXPECT_EQ(data_rows(join_path(report_dir(c), "u_overlay.csv")), 10u);
  EXPECT_NE(read_file(join_path(report_dir(c), "t_overlay.svg")).find("<polyline"), std::string::npos);

  // Checkpoint evaluation reproduces the training-time validation numbers.
  const Dataset val = load_scenario(c, "cl-val");
  const EvalMetrics again = evaluate(load_perpinn(checkpoint_stem(c, "perpinn")), val, "cl-val");
  for (const auto& row : read_metrics(join_path(report_dir(c), "metrics.csv"))) {
    if (row.scenario == "cl-val" && row.model == "perpinn") EXPECT_NEAR(row.mse_Th, again.mse_Th, 1e-9 * again.mse_Th);
  }
}

TEST(Commands, SeedStudyIsDeterministic) {
  ExperimentConfig c = tiny("seeds");
  std::ostringstream out;
  ASSERT_EQ(cmd_simulate(c, out), kExitOk);
  ASSERT_EQ(cmd_seed_study(c, {7, 7}, true, out), kExitOk);
  std::istringstream csv(read_file(join_path(report_dir(c), "seed_study.csv")));
  std::string header, a, pa, b, pb;
  std::getline(csv, header);
  std::getline(csv, a);
  std::getline(csv, pa);
  std::getline(csv, b);
  std::getline(csv, pb);
  EXPECT_EQ(a, b);
  EXPECT_EQ(pa, pb);
  EXPECT_EQ(a.substr(0, 7), "pinn,7,");
  EXPECT_NE(out.str().find("spread 0"), std::string::npos);
}

TEST(Report, SwitchRatioAssertion) {
  ReportInputs in;
  in.config_hash = "abc";
  in.seeds = {1};
  in.metrics = {{"switch-test", "perpinn", 0.1, 0.1, 0, 0}, {"switch-test", "pinn", 5.0, 5.0, 0, 0},
                {"ol-test", "perpinn", 0.1, 0.1, 0, 0}, {"ol-test", "pinn", 0.05, 0.05, 0, 0}};
  const std::string md = summary_markdown(in);
  EXPECT_NE(md.find("PINN / Per-PINN = 50 (required > 10): PASS"), std::string::npos);
  EXPECT_NE(md.find("Per-PINN NOT better"), std::string::npos);
  EXPECT_NE(md.find("| validation (closed loop) | n/a |"), std::string::npos);
}

TEST(Report, SeedSpread) {
  const std::string t = seed_spread_text({{"pinn", 1, 0.1, 0}, {"pinn", 2, 0.4, 0}});
  EXPECT_NE(t.find("spread 0.3"), std::string::npos);
}

TEST(Svg, SkipsNonFinitePointsAndEscapes) {
  const std::string s = line_plot_svg("a < b", "x", "y", {{"s&t", {0, 1, 2}, {1, NAN, 3}, "#000", false}});
  EXPECT_NE(s.find("a &lt; b"), std::string::npos);
  EXPECT_NE(s.find("s&amp;t"), std::string::npos);
  EXPECT_EQ(s.find("nan"), std::string::npos);
}

TEST(Acceptance, FastCriteriaPass) {
  const ExperimentConfig c;
  for (const CriterionResult& r : {check_identifiability(c), check_integrator_order(c), check_gradients(c)}) {
    EXPECT_TRUE(r.pass) << format_result(r);
  }
  const CriterionResult r = check_identifiability(c);
  EXPECT_EQ(format_result(r).substr(0, 8), "PASS [1]");
}
