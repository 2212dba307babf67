#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hexid/harness/config.hpp"

namespace hexid::harness {

/// Exit codes shared by every subcommand.
enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitUsage = 2 };

/// Writes closed-loop, ol-test and switch-test datasets to the data directory.
int cmd_simulate(const ExperimentConfig& cfg, std::ostream& out);

/// Rank report on states of closed-loop run 0; `inject_equilibrium` appends a
/// state with T_h_out = T_c_out.
int cmd_ident(const ExperimentConfig& cfg, bool inject_equilibrium, std::ostream& out);

/// model: "perpinn" | "pinn". With a seed the checkpoint is `<model>-seed<N>`.
int cmd_train(const ExperimentConfig& cfg, const std::string& model,
              std::optional<std::uint64_t> seed, std::ostream& out);

/// scenario: cl-train | cl-val | ol-test | switch-test. `checkpoint` defaults
/// to `<checkpoint_dir>/<model>`.
int cmd_eval(const ExperimentConfig& cfg, const std::string& model, const std::string& scenario,
             const std::optional<std::string>& checkpoint, std::ostream& out);

/// Summary markdown, U and temperature overlays (CSV and SVG).
int cmd_report(const ExperimentConfig& cfg, std::ostream& out);

/// Trains the PINN (and the Per-PINN for contrast) once per seed.
int cmd_seed_study(const ExperimentConfig& cfg, const std::vector<std::uint64_t>& seeds,
                   bool include_perpinn, std::ostream& out);

/// Runs the acceptance criteria; exit 0 only if all pass.
int cmd_accept(const ExperimentConfig& cfg, const std::vector<int>& only, std::ostream& out);

std::string checkpoint_stem(const ExperimentConfig& cfg, const std::string& model,
                            std::optional<std::uint64_t> seed = std::nullopt);

}  // namespace hexid::harness
