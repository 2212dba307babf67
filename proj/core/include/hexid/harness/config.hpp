#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hexid/hex_model.hpp"
#include "hexid/perpinn.hpp"
#include "hexid/pinn.hpp"
#include "hexid/simulation.hpp"

namespace hexid::harness {

/// Invalid configuration or command-line usage; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PathsConfig {
  std::string data_dir = "data";
  std::string checkpoint_dir = "checkpoints";
  /// Overridden by the HEXID_REPORT_DIR environment variable.
  std::string report_dir = "reports";
};

struct SimConfig {
  int runs = 30;
  std::uint64_t seed = 2024;
  RunConfig run;
  IntegratorConfig integrator;
  ControllerConfig controller;
  LumpedParams lumped = default_lumped_params();
  FoulingParams fouling;
};

struct IdentConfig {
  /// States taken from run 0 at evenly spaced instants.
  int n_states = 100;
  double rel_tol = 1e-10;
};

struct ScenarioConfig {
  /// Open-loop test: constant hot inlet, cold inlet at sim.run.T_c_in plus
  /// sensor noise, initial state and U(0) of closed-loop runs 0..ol_runs-1.
  double ol_hot_inlet = 395.0;
  int ol_runs = 5;
  /// Validation runs shown in the U overlay.
  int overlay_runs = 5;
};

struct EstimatorTrainConfig {
  int epochs = 0;
  double learning_rate = 1e-3;
  int patience = 500;
  double min_rel_improvement = 1e-6;
  std::uint64_t seed = 1234;
};

struct PerPinnSection {
  FeatureSpec features = FeatureSpec::time;
  std::vector<int> hidden = {75, 75};
  double U_max = 15000.0;
  double step_h = 1.0;
  double temp_scale_floor = 1.0;
  EstimatorTrainConfig train{2000, 3e-3, 300, 1e-6, 1234};
};

struct PinnSection {
  std::vector<int> hidden = std::vector<int>(6, 40);
  double residual_weight = 1.0;
  EstimatorTrainConfig train{5000, 1e-3, 1000, 1e-6, 1234};
};

struct ExperimentConfig {
  PathsConfig paths;
  SimConfig sim;
  IdentConfig ident;
  ScenarioConfig scenarios;
  PerPinnSection perpinn;
  PinnSection pinn;
  std::vector<std::uint64_t> seeds = {1234, 4567};

  void validate() const;
};

/// Canonical JSON text (sorted keys, 2-space indent).
std::string to_json(const ExperimentConfig& cfg);
/// Missing keys keep their defaults; unknown keys or bad types throw ConfigError.
ExperimentConfig config_from_json(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::string& path);

/// FNV-1a 64 of the canonical JSON, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

/// Report directory after the environment override.
std::string report_dir(const ExperimentConfig& cfg);

PerPinnConfig perpinn_config(const ExperimentConfig& cfg);
PinnConfig pinn_config(const ExperimentConfig& cfg, std::optional<std::uint64_t> seed = std::nullopt);

}  // namespace hexid::harness
