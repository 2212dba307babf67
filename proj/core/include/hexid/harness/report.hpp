#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hexid/dataset.hpp"
#include "hexid/metrics.hpp"
#include "hexid/perpinn.hpp"

namespace hexid::harness {

/// Ratio PINN / Per-PINN of switch-test temperature MSE that the report asserts.
inline constexpr double kSwitchRatioThreshold = 10.0;

struct ReportInputs {
  std::string config_hash;
  std::vector<std::uint64_t> seeds;
  std::vector<EvalMetrics> metrics;
  std::string ident_text;                        // empty: section omitted
  std::map<std::string, std::string> energy_text;  // model -> energy check text
};

/// Markdown summary: scenario x model error table, experiment verdicts,
/// energy checks and identifiability, headed by the config hash and seeds.
std::string summary_markdown(const ReportInputs& in);

/// Consecutive runs laid end to end on one time axis.
struct OverlayData {
  std::vector<int> run_id;
  std::vector<double> t;
  std::vector<double> U_true, U_perpinn, U_pinn;
  std::vector<double> Th_true, Th_perpinn, Th_pinn;
  std::vector<double> Tc_true, Tc_perpinn, Tc_pinn;
};

OverlayData build_overlay(const Dataset& ds, const std::vector<RunPrediction>& perpinn,
                          const std::vector<RunPrediction>& pinn);

/// t,U_true,U_perpinn,U_pinn,run_id
std::string u_overlay_csv(const OverlayData& ov);
/// t,T_h_out_true,T_h_out_perpinn,T_h_out_pinn,T_c_out_true,T_c_out_perpinn,T_c_out_pinn,run_id
std::string t_overlay_csv(const OverlayData& ov);
std::string u_overlay_svg(const OverlayData& ov);
std::string t_overlay_svg(const OverlayData& ov);

struct SeedRow {
  std::string model;
  std::uint64_t seed = 0;
  double rel_rmse_U = 0.0;
  double mse_T = 0.0;
};

/// model,seed,rel_rmse_U,mse_T
std::string seed_study_csv(const std::vector<SeedRow>& rows);
/// Per model: min, max, max - min and sample std of rel_rmse_U over seeds.
std::string seed_spread_text(const std::vector<SeedRow>& rows);

}  // namespace hexid::harness
