#include "hexid/harness/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hexid/harness/artifacts.hpp"
#include "hexid/rng.hpp"
#include "hexid/schedule.hpp"
#include "hexid/simulation.hpp"
#include "hexid/training.hpp"

namespace hexid::harness {

bool is_scenario(const std::string& s) {
  return std::find(std::begin(kScenarios), std::end(kScenarios), s) != std::end(kScenarios);
}

Dataset closed_loop_dataset(const ExperimentConfig& cfg) {
  Dataset ds = generate_dataset(cfg.sim.runs, cfg.sim.seed, cfg.sim.run, cfg.sim.integrator,
                                cfg.sim.lumped, cfg.sim.controller, cfg.sim.fouling);
  ds.provenance = "{\"scenario\": \"closed-loop\", \"config_hash\": \"" + config_hash(cfg) +
                  "\", \"seed\": " + std::to_string(cfg.sim.seed) + "}";
  return ds;
}

Dataset open_loop_test_dataset(const ExperimentConfig& cfg, bool switched) {
  Dataset ds;
  for (int r = 0; r < cfg.scenarios.ol_runs; ++r) {
    RunConfig rc = cfg.sim.run;
    rc.seed = derive_seed(cfg.sim.seed, static_cast<std::uint64_t>(r));
    const double U0 = draw_initial_u(rc, cfg.sim.fouling);
    rc.initial = closed_loop_steady_state(rc.T_c_sp, rc.T_c_in, U0, cfg.sim.controller, cfg.sim.lumped);
    OpenLoopScenario sc{Schedule::constant(cfg.scenarios.ol_hot_inlet), Schedule::constant(rc.T_c_in)};
    if (switched) sc = switch_streams(sc);
    ds.runs.push_back(simulate_open_loop(sc, rc, cfg.sim.integrator, cfg.sim.lumped, cfg.sim.fouling, r));
  }
  ds.provenance = std::string("{\"scenario\": \"") + (switched ? "switch-test" : "ol-test") +
                  "\", \"config_hash\": \"" + config_hash(cfg) + "\", \"seed\": " +
                  std::to_string(cfg.sim.seed) + "}";
  return ds;
}

Dataset constant_u_dataset(int n_runs, std::uint64_t seed, double U, const ExperimentConfig& cfg) {
  Dataset ds;
  Rng rng(seed);
  for (int r = 0; r < n_runs; ++r) {
    const double T_h_in = rng.uniform(395.0, 420.0);
    const double T_c_in = rng.uniform(370.0, 385.0);
    RunConfig rc = cfg.sim.run;
    rc.noise_level = 0.0;
    rc.seed = derive_seed(seed, static_cast<std::uint64_t>(r));
    rc.initial = HexState{rng.uniform(T_c_in, T_h_in), rng.uniform(T_c_in, T_h_in)};
    const OpenLoopScenario sc{Schedule::constant(T_h_in), Schedule::constant(T_c_in)};
    ds.runs.push_back(simulate_open_loop(sc, rc, cfg.sim.integrator, cfg.sim.lumped, Schedule::constant(U), r));
  }
  ds.provenance = "{\"scenario\": \"constant-u\", \"seed\": " + std::to_string(seed) + "}";
  return ds;
}

std::vector<AugmentedState> ident_states(const ExperimentConfig& cfg, int n) {
  if (n < 1) throw std::invalid_argument("need >= 1 state");
  RunConfig rc = cfg.sim.run;
  rc.seed = derive_seed(cfg.sim.seed, 0);
  rc.sample_period = rc.duration / n;
  IntegratorConfig ic = cfg.sim.integrator;
  if (rc.sample_period < ic.step_h || std::fmod(rc.sample_period, ic.step_h) != 0.0) {
    ic.step_h = rc.sample_period / std::ceil(rc.sample_period / ic.step_h);
  }
  const Run run = simulate_run(rc, ic, cfg.sim.lumped, cfg.sim.controller, cfg.sim.fouling, 0);
  std::vector<AugmentedState> states;
  for (const Sample& s : run) states.push_back(AugmentedState{s.T_h_out, s.T_c_out, cfg.sim.controller.K_p});
  return states;
}

Dataset split_part(const Dataset& ds, bool validation) {
  const Split s = default_split(static_cast<int>(ds.runs.size()));
  Dataset part = ds.subset(validation ? s.val : s.train);
  part.provenance = ds.provenance;
  return part;
}

std::string dataset_path(const ExperimentConfig& cfg, const std::string& name) {
  return join_path(cfg.paths.data_dir, name + ".csv");
}

Dataset load_scenario(const ExperimentConfig& cfg, const std::string& scenario) {
  if (!is_scenario(scenario)) throw ConfigError("unknown scenario '" + scenario + "'");
  const bool closed = scenario == "cl-train" || scenario == "cl-val";
  const std::string path = dataset_path(cfg, closed ? "closed-loop" : scenario);
  if (!file_exists(path)) {
    throw std::runtime_error("dataset '" + path + "' not found; run `hexid simulate` first");
  }
  Dataset ds = read_dataset(path);
  return closed ? split_part(ds, scenario == "cl-val") : ds;
}

}  // namespace hexid::harness
