#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hexid/dataset.hpp"
#include "hexid/harness/config.hpp"
#include "hexid/identifiability.hpp"

namespace hexid::harness {

/// Scenario labels used in metrics rows and file names.
inline constexpr const char* kScenarios[] = {"cl-train", "cl-val", "ol-test", "switch-test"};
bool is_scenario(const std::string& s);

/// The closed-loop dataset of the configuration (provenance filled in).
Dataset closed_loop_dataset(const ExperimentConfig& cfg);

/// Open-loop runs 0..ol_runs-1: hot inlet held at ol_hot_inlet, cold inlet at
/// sim.run.T_c_in with the cold-inlet sensor noise, starting from the
/// closed-loop equilibrium of the matching closed-loop run and sharing its
/// seed and U(0); U follows the fouling law. `switched` swaps the streams.
Dataset open_loop_test_dataset(const ExperimentConfig& cfg, bool switched);

/// Noise-free open-loop runs with constant U, constant inlets drawn from
/// T_h_in in [395, 420] K and T_c_in in [370, 385] K, and initial outlets
/// drawn inside the inlet interval.
Dataset constant_u_dataset(int n_runs, std::uint64_t seed, double U, const ExperimentConfig& cfg);

/// `n` augmented states at evenly spaced instants of closed-loop run 0.
std::vector<AugmentedState> ident_states(const ExperimentConfig& cfg, int n);

/// cl-train / cl-val subsets of the closed-loop dataset per the default split.
Dataset split_part(const Dataset& ds, bool validation);

/// Loads the scenario dataset from the data directory.
Dataset load_scenario(const ExperimentConfig& cfg, const std::string& scenario);

std::string dataset_path(const ExperimentConfig& cfg, const std::string& name);

}  // namespace hexid::harness
