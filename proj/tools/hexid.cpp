// hexid: simulate, identify, train, evaluate and report on the fouling
// heat-exchanger study.

#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "hexid/harness/commands.hpp"
#include "hexid/harness/config.hpp"

using namespace hexid::harness;

int main(int argc, char** argv) {
  CLI::App app{"Heat-exchanger fouling identification: simulation, identifiability, Per-PINN and PINN"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> runs;
  std::optional<double> noise;
  app.add_option("--config", config_path, "JSON config file (missing keys keep defaults)");
  app.add_option("--seed", seed,
                 "simulate: dataset master seed; train: network seed (checkpoint <model>-seed<N>); "
                 "eval: use that seed's checkpoint");
  app.add_option("--runs", runs, "number of closed-loop runs")->check(CLI::PositiveNumber);
  app.add_option("--noise", noise, "cold-inlet noise level (variance by default)")->check(CLI::NonNegativeNumber);
  app.fallthrough();

  auto* sim = app.add_subcommand("simulate", "write closed-loop, ol-test and switch-test datasets");

  bool inject = false;
  auto* ident = app.add_subcommand("ident", "observability and reconstructibility ranks along run 0");
  ident->add_flag("--inject-equilibrium", inject, "append a state with T_h_out = T_c_out");

  std::string model, scenario;
  auto* train = app.add_subcommand("train", "train an estimator on the closed-loop dataset");
  train->add_option("model", model, "perpinn | pinn")->required();

  std::optional<std::string> checkpoint;
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a scenario");
  eval->add_option("model", model, "perpinn | pinn")->required();
  eval->add_option("scenario", scenario, "cl-train | cl-val | ol-test | switch-test")->required();
  eval->add_option("--checkpoint", checkpoint, "checkpoint stem (default <checkpoint_dir>/<model>)");

  auto* report = app.add_subcommand("report", "summary table and overlay plots from stored metrics");

  std::vector<std::uint64_t> seeds;
  bool no_perpinn = false;
  auto* study = app.add_subcommand("seed-study", "train per seed and report the spread of U errors");
  study->add_option("--seeds", seeds, "seeds (default: config seed list)")->delimiter(',');
  study->add_flag("--no-perpinn", no_perpinn, "train the PINN only");

  std::vector<int> only;
  auto* accept = app.add_subcommand("accept", "run the acceptance criteria");
  accept->add_option("--only", only, "criterion ids, e.g. 1,2,8")->delimiter(',')->check(CLI::Range(1, 8));

  auto* show = app.add_subcommand("config", "print the effective configuration as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
    if (runs) cfg.sim.runs = *runs;
    if (noise) cfg.sim.run.noise_level = *noise;
    if (seed && sim->parsed()) cfg.sim.seed = *seed;
    cfg.validate();

    if (sim->parsed()) return cmd_simulate(cfg, std::cout);
    if (ident->parsed()) return cmd_ident(cfg, inject, std::cout);
    if (train->parsed()) return cmd_train(cfg, model, seed, std::cout);
    if (eval->parsed()) {
      if (seed && !checkpoint) checkpoint = checkpoint_stem(cfg, model, seed);
      return cmd_eval(cfg, model, scenario, checkpoint, std::cout);
    }
    if (report->parsed()) return cmd_report(cfg, std::cout);
    if (study->parsed()) return cmd_seed_study(cfg, seeds.empty() ? cfg.seeds : seeds, !no_perpinn, std::cout);
    if (accept->parsed()) return cmd_accept(cfg, only, std::cout);
    if (show->parsed()) {
      std::cout << to_json(cfg);
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "hexid: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "hexid: error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
