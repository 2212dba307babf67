#include <gtest/gtest.h>

#include <cmath>

#include "hexid/metrics.hpp"

using namespace hexid;

namespace {

Dataset two_sample_dataset(bool with_u) {
  Dataset ds;
  hexid::Run run(2);
  for (int k = 0; k < 2; ++k) {
    run[k].t = 50.0 * k;
    run[k].T_h_in = 395.0;
    run[k].T_c_in = 381.0;
    run[k].T_h_out = 390.0 + k;
    run[k].T_c_out = 385.0 + k;
    run[k].U_true = with_u ? 10000.0 : std::nan("");
  }
  ds.runs.push_back(run);
  ds.has_u_true = with_u;
  return ds;
}

RunPrediction prediction(const Dataset& ds, double dh, double dc, double U) {
  RunPrediction p;
  for (const Sample& s : ds.runs[0]) {
    p.t.push_back(s.t);
    p.T_h_out.push_back(s.T_h_out + dh);
    p.T_c_out.push_back(s.T_c_out + dc);
    p.U_hat.push_back(U);
  }
  return p;
}

}  // namespace

TEST(Metrics, KnownOffsets) {
  const Dataset ds = two_sample_dataset(true);
  const EvalMetrics m = compute_metrics(ds, {prediction(ds, 0.5, -1.0, 11000.0)}, "cl-val", "perpinn");
  EXPECT_DOUBLE_EQ(m.mse_Th, 0.25);
  EXPECT_DOUBLE_EQ(m.mse_Tc, 1.0);
  EXPECT_DOUBLE_EQ(m.mse_T(), 0.625);
  EXPECT_DOUBLE_EQ(m.mse_U, 1e6);
  EXPECT_NEAR(m.rel_rmse_U, 0.1, 1e-15);
  EXPECT_EQ(to_csv_row(m), "cl-val,perpinn,0.25,1,1000000,0.1");
}

TEST(Metrics, PerfectPredictionIsZeroAndMissingUIsNan) {
  const Dataset ds = two_sample_dataset(false);
  const EvalMetrics m = compute_metrics(ds, {prediction(ds, 0.0, 0.0, 1.0)}, "ol-test", "pinn");
  EXPECT_EQ(m.mse_T(), 0.0);
  EXPECT_TRUE(std::isnan(m.mse_U));
  EXPECT_TRUE(std::isnan(m.rel_rmse_U));
}

TEST(Metrics, HorizonMismatchThrows) {
  const Dataset ds = two_sample_dataset(true);
  RunPrediction p = prediction(ds, 0, 0, 1);
  p.T_h_out.pop_back();
  EXPECT_THROW(compute_metrics(ds, {p}, "x", "y"), std::invalid_argument);
  EXPECT_THROW(compute_metrics(ds, {}, "x", "y"), std::invalid_argument);
}

TEST(EnergyCheck, FlagsExcursionsBeyondTolerance) {
  const Dataset ds = two_sample_dataset(true);
  // Hull is [381, 395].
  EXPECT_TRUE(energy_consistency_check({prediction(ds, 0, 0, 1)}, ds).pass());
  RunPrediction p = prediction(ds, 0, 0, 1);
  p.T_h_out[1] = 395.4;
  EXPECT_TRUE(energy_consistency_check({p}, ds, 0.5).pass());
  p.T_c_out[0] = 380.3;
  const EnergyCheckReport rep = energy_consistency_check({p}, ds, 0.5);
  EXPECT_FALSE(rep.pass());
  EXPECT_NEAR(rep.runs[0].max_excursion, 0.7, 1e-12);
  EXPECT_DOUBLE_EQ(rep.runs[0].lo, 381.0);
  EXPECT_DOUBLE_EQ(rep.runs[0].hi, 395.0);
  EXPECT_NE(rep.to_text().find("FAIL"), std::string::npos);
  p.T_c_out[0] = std::nan("");
  EXPECT_FALSE(energy_consistency_check({p}, ds, 0.5).pass());
}

TEST(ExtractU, PerPinnMatchesClosure) {
  Dataset ds = two_sample_dataset(true);
  PerPinnModel m;
  m.net = zero_params({1, 2, 1});
  m.net.b.back()(0) = std::log(2.0);  // U = U_max * 2/3
  const UEstimate u = extract_U(m, ds.runs[0]);
  ASSERT_EQ(u.U_hat.size(), 2u);
  EXPECT_NEAR(u.U_hat[0], 10000.0, 1e-9);
  EXPECT_NEAR(u.rel_rmse, 0.0, 1e-12);
}
