#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "hexid/dataset.hpp"
#include "hexid/hex_model.hpp"
#include "hexid/schedule.hpp"

namespace hexid {

/// Fixed-step classical RK4.
struct IntegratorConfig {
  double step_h = 1.0;  // s

  /// Requires 0 < step_h <= sample_period with sample_period an integer
  /// multiple of step_h.
  void validate(double sample_period) const;
  std::size_t steps_per_sample(double sample_period) const;
};

/// Where the cold-inlet sensor noise acts. In `measurement` mode the plant
/// sees the clean inlet and only the recorded T_c_in is corrupted; in
/// `process` mode the noisy value also drives plant and controller.
enum class NoiseMode { measurement, process };

/// How `noise_level` is read: as the variance or the standard deviation of
/// the Gaussian.
enum class NoiseScale { variance, std_dev };

struct RunConfig {
  double duration = 3000.0;      // s
  double sample_period = 50.0;   // s
  double noise_level = 0.25;
  NoiseScale noise_scale = NoiseScale::variance;
  NoiseMode noise_mode = NoiseMode::measurement;
  std::uint64_t seed = 0;
  double T_c_sp = 391.0;  // K
  double T_c_in = 381.0;  // K
  /// Unset: closed-loop runs start at the closed-loop equilibrium for the
  /// drawn U(0); open-loop runs at the open-loop equilibrium.
  std::optional<HexState> initial;

  double noise_std() const;
  std::size_t sample_count() const;
  void validate(const IntegratorConfig& ic) const;
};

/// Per-integrator-step record, used to replay a closed-loop run open loop.
struct StepTrace {
  std::vector<double> t;
  std::vector<double> T_h_in;  // controller output at the step start
  std::vector<double> T_c_in;  // cold inlet seen by the plant over the step
};

/// First draw of the run's generator: U(0) uniform in [U0_min, U0_max].
double draw_initial_u(const RunConfig& rc, const FoulingParams& fp);

/// Closed loop with fouling, integrated on the augmented state
/// (T_h_out, T_c_out, U).
Run simulate_run(const RunConfig& rc, const IntegratorConfig& ic,
                 const LumpedParams& lp, const ControllerConfig& c,
                 const FoulingParams& fp, int run_id = 0,
                 StepTrace* trace = nullptr);

/// Runs with seeds derive_seed(master_seed, i); the dataset keeps rc.seed
/// unset and records nothing about provenance (the caller fills it in).
Dataset generate_dataset(int n_runs, std::uint64_t master_seed,
                         const RunConfig& rc, const IntegratorConfig& ic,
                         const LumpedParams& lp, const ControllerConfig& c,
                         const FoulingParams& fp);

/// Prescribed inlet schedules for the open-loop plant.
struct OpenLoopScenario {
  Schedule hot_inlet;
  Schedule cold_inlet;
};

/// Either a fouling law (U integrated as a state from a drawn U(0)) or a
/// prescribed U(t) trajectory.
using UModel = std::variant<FoulingParams, Schedule>;

Run simulate_open_loop(const OpenLoopScenario& scenario, const RunConfig& rc,
                       const IntegratorConfig& ic, const LumpedParams& lp,
                       const UModel& u_model, int run_id = 0);

/// Feeds the hot port with the cold schedule and vice versa.
OpenLoopScenario switch_streams(const OpenLoopScenario& scenario);

}  // namespace hexid
