#pragma once

#include <vector>

#include "hexid/dataset.hpp"
#include "hexid/hex_model.hpp"
#include "hexid/mlp.hpp"
#include "hexid/perpinn.hpp"
#include "hexid/training.hpp"

namespace hexid {

/// Network of normalized global time tau = (run_id * duration + t) / t_total
/// with three outputs: standardized T_h_out, standardized T_c_out and
/// U * u_scale.
struct PinnModel {
  MlpParams net;
  double duration = 3000.0;  // per-run horizon used for global time, s
  double t_total = 90000.0;  // duration * number of runs of the training dataset, s
  double mean_h = 0.0, std_h = 1.0;
  double mean_c = 0.0, std_c = 1.0;
  double u_scale = 1e-4;
  /// Pooled std of the four measured temperature channels; the residual of
  /// channel i is divided by alpha_i * residual_scale.
  double residual_scale = 1.0;
  LumpedParams lp = default_lumped_params();

  void validate() const;
  double tau(int run_id, double t) const { return (run_id * duration + t) / t_total; }
};

struct PinnConfig {
  std::vector<int> hidden = std::vector<int>(6, 40);
  LumpedParams lp = default_lumped_params();
  TrainConfig train;
};

struct PinnResult {
  PinnModel model;
  LossHistory history;
};

/// Network outputs of one run at its sample instants, unscaled.
RunPrediction pinn_predict_run(const PinnModel& m, const Run& run);

/// Data loss (standardized outlets) plus W_R times the mean squared ODE
/// residual at the sample instants of the training runs.
PinnResult train_pinn(const Dataset& ds, const PinnConfig& cfg);

struct PinnLoss {
  ad::Var total;
  ad::Var data;
  ad::Var residual;
};

/// Records the loss of `m` on `runs` on the tape `binding` lives on.
PinnLoss pinn_loss(const MlpBinding& binding, const PinnModel& m,
                   const std::vector<const Run*>& runs, double residual_weight);

/// Pooled std (about the pooled mean) of T_h_in, T_c_in, T_h_out, T_c_out.
double pooled_temperature_std(const std::vector<const Run*>& runs);

}  // namespace hexid
