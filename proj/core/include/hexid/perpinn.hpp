#pragma once

#include <string>
#include <vector>

#include "hexid/dataset.hpp"
#include "hexid/hex_model.hpp"
#include "hexid/mlp.hpp"
#include "hexid/simulation.hpp"
#include "hexid/training.hpp"

namespace hexid {

/// What the U network sees at each integrator step.
enum class FeatureSpec {
  time,            // t / duration
  time_mean_temp,  // t / duration, standardized (T_h_out + T_c_out) / 2 of the prediction
};

const char* to_string(FeatureSpec f);
FeatureSpec feature_spec_from_string(const std::string& s);

/// Network closure U = U_max * logistic(net(features)) inside the open-loop
/// plant, integrated with the measured inlets.
struct PerPinnModel {
  MlpParams net;
  FeatureSpec features = FeatureSpec::time;
  double U_max = 15000.0;
  double duration = 3000.0;  // time feature normalization, s
  double temp_mean = 0.0;    // mean-temperature feature centre, K
  double temp_scale = 1.0;   // mean-temperature feature scale, K
  double loss_scale = 1.0;   // pooled outlet std used in the loss, K
  IntegratorConfig ic;
  LumpedParams lp = default_lumped_params();

  int n_features() const { return features == FeatureSpec::time ? 1 : 2; }
  void validate() const;
  /// U at one step for the given feature values; always inside (0, U_max).
  double closure(double t, double T_h_out, double T_c_out) const;
};

struct PerPinnConfig {
  FeatureSpec features = FeatureSpec::time;
  std::vector<int> hidden = {75, 75};
  double U_max = 15000.0;
  IntegratorConfig ic;
  LumpedParams lp = default_lumped_params();
  /// Lower bound for the mean-temperature feature scale, K.
  double temp_scale_floor = 1.0;
  TrainConfig train;
};

/// Predicted trajectory of one run at its sample instants.
struct RunPrediction {
  int run_id = 0;
  std::vector<double> t;
  std::vector<double> T_h_out;
  std::vector<double> T_c_out;
  std::vector<double> U_hat;
};

/// Per integrator step: state at the step start, U held over the step, and
/// the interpolated inlets at t, t + h/2, t + h.
struct StepLog {
  std::vector<double> t, T_h_out, T_c_out, U;
  std::vector<double> T_h_in0, T_c_in0, T_h_in_mid, T_c_in_mid, T_h_in1, T_c_in1;
};

/// Linear interpolation of a run's measured inlets between sample instants.
ExogenousInputs interpolate_inlets(const Run& run, double t);

/// One RK4 step of the open-loop plant with U held and inlets given at the
/// step start, midpoint and end.
HexState plant_rk4_step(const HexState& x, double U, const ExogenousInputs& in0,
                        const ExogenousInputs& in_mid, const ExogenousInputs& in1,
                        const LumpedParams& lp, double h);

/// Integrates from the measured initial outlets over the run's horizon.
/// Throws IntegrationError with the step index on a non-finite state.
RunPrediction perpinn_predict_run(const PerPinnModel& m, const Run& run, StepLog* log = nullptr);

struct PerPinnResult {
  PerPinnModel model;
  LossHistory history;
};

/// Full-batch training over the training runs of the split; returns the
/// parameters with the lowest validation loss.
PerPinnResult train_perpinn(const Dataset& ds, const PerPinnConfig& cfg);

/// Training loss (pooled-scale MSE over both outlet channels) of `m` on the
/// given runs, recorded on `tape`; used by training and gradient checks.
/// `binding` must hold m.net bound to `tape`.
ad::Var perpinn_loss(ad::Tape& tape, const MlpBinding& binding, const PerPinnModel& m,
                     const std::vector<const Run*>& runs);

/// Same loss in plain double arithmetic.
double perpinn_loss_value(const PerPinnModel& m, const std::vector<const Run*>& runs);

}  // namespace hexid
