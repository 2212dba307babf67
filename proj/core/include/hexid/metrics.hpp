#pragma once

#include <string>
#include <vector>

#include "hexid/dataset.hpp"
#include "hexid/perpinn.hpp"
#include "hexid/pinn.hpp"

namespace hexid {

/// Errors over all samples of a scenario. Temperatures in K^2, mse_U in
/// (W/(m^2 K))^2, rel_rmse_U dimensionless; U fields are NaN when the
/// scenario carries no U_true.
struct EvalMetrics {
  std::string scenario;
  std::string model;
  double mse_Th = 0.0;
  double mse_Tc = 0.0;
  double mse_U = 0.0;
  double rel_rmse_U = 0.0;

  double mse_T() const { return 0.5 * (mse_Th + mse_Tc); }
};

inline constexpr const char* kMetricsHeader = "scenario,model,mse_Th,mse_Tc,mse_U,rel_rmse_U";
std::string to_csv_row(const EvalMetrics& m);

/// Compares predictions with the dataset's outlets and U_true run by run.
/// Throws std::invalid_argument on a run or horizon mismatch.
EvalMetrics compute_metrics(const Dataset& ds, const std::vector<RunPrediction>& preds,
                            const std::string& scenario, const std::string& model);

std::vector<RunPrediction> predict(const PerPinnModel& m, const Dataset& ds);
std::vector<RunPrediction> predict(const PinnModel& m, const Dataset& ds);

EvalMetrics evaluate(const PerPinnModel& m, const Dataset& ds, const std::string& scenario);
EvalMetrics evaluate(const PinnModel& m, const Dataset& ds, const std::string& scenario);

struct UEstimate {
  std::vector<double> t;
  std::vector<double> U_hat;
  double rel_rmse = 0.0;  // NaN without U_true
};

UEstimate extract_U(const PerPinnModel& m, const Run& run);
UEstimate extract_U(const PinnModel& m, const Run& run);

struct EnergyCheckRun {
  int run_id = 0;
  double lo = 0.0, hi = 0.0;  // hull of inlets and initial outlets, K
  double max_excursion = 0.0;  // largest distance outside the hull, K
  bool pass = true;
};

struct EnergyCheckReport {
  double tolerance = 0.5;
  std::vector<EnergyCheckRun> runs;
  bool pass() const;
  std::string to_text() const;
};

/// Flags predicted outlets leaving [min, max] of the run's measured inlets and
/// initial outlets by more than `tolerance`.
EnergyCheckReport energy_consistency_check(const std::vector<RunPrediction>& preds,
                                           const Dataset& scenario, double tolerance = 0.5);

}  // namespace hexid
