#include <gtest/gtest.h>

#include <cmath>

#include "hexid/pinn.hpp"
#include "hexid/simulation.hpp"

using namespace hexid;

namespace {

Dataset small_closed_loop(int runs) {
  RunConfig rc;
  rc.duration = 1000.0;
  return generate_dataset(runs, 5, rc, IntegratorConfig{}, default_lumped_params(), ControllerConfig{},
                          FoulingParams{});
}

PinnModel model_for(const Dataset& ds) {
  PinnModel m;
  m.net = init_params({1, 8, 8, 3}, 4);
  m.duration = 1000.0;
  m.t_total = 1000.0 * static_cast<double>(ds.runs.size());
  m.mean_h = 384.0;
  m.std_h = 0.4;
  m.mean_c = 383.0;
  m.std_c = 0.3;
  m.residual_scale = 2.0;
  return m;
}

}  // namespace

TEST(Pinn, GlobalTimeSpansAllRuns) {
  PinnModel m;
  m.duration = 3000.0;
  m.t_total = 90000.0;
  EXPECT_DOUBLE_EQ(m.tau(0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(m.tau(29, 3000.0), 1.0);
  EXPECT_DOUBLE_EQ(m.tau(1, 0.0), 3000.0 / 90000.0);
}

TEST(Pinn, LossGradientMatchesFiniteDifferences) {
  const Dataset ds = small_closed_loop(2);
  const std::vector<const hexid::Run*> runs{&ds.runs[0], &ds.runs[1]};
  const PinnModel m = model_for(ds);
  ad::Tape tape;
  const MlpBinding b = bind_params(tape, m.net);
  const PinnLoss loss = pinn_loss(b, m, runs, 0.7);
  tape.backward(loss.total);
  auto f = [&](const Eigen::VectorXd& v) {
    ad::Tape t;
    PinnModel mm = m;
    mm.net.unflatten(v);
    return pinn_loss(bind_params(t, mm.net), mm, runs, 0.7).total.value();
  };
  const Eigen::VectorXd fd = finite_diff_grad(f, m.net.flatten(), 1e-6);
  EXPECT_LT((gradient(b) - fd).cwiseAbs().maxCoeff() / fd.cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_NEAR(loss.total.value(), loss.data.value() + 0.7 * loss.residual.value(), 1e-12);
}

TEST(Pinn, ConstantNetworkLossMatchesHandComputation) {
  // Constant outputs have zero time derivative, so the residual is -F.
  const Dataset ds = small_closed_loop(1);
  PinnModel m = model_for(ds);
  m.net = zero_params({1, 3, 3});
  m.net.b.back() << 0.5, -1.0, 0.9;
  const double Th = m.mean_h + 0.5 * m.std_h, Tc = m.mean_c - m.std_c, U = 0.9 / m.u_scale;
  const LumpedParams& lp = m.lp;
  double data = 0.0, resid = 0.0;
  for (const Sample& s : ds.runs[0]) {
    data += std::pow(0.5 - (s.T_h_out - m.mean_h) / m.std_h, 2) + std::pow(-1.0 - (s.T_c_out - m.mean_c) / m.std_c, 2);
    const HexRate F = open_loop_rhs({Th, Tc}, {s.T_h_in, s.T_c_in}, U, lp);
    resid += std::pow(F.dT_h_out / (lp.alpha_h * m.residual_scale), 2) +
             std::pow(F.dT_c_out / (lp.alpha_c * m.residual_scale), 2);
  }
  const double n = 2.0 * static_cast<double>(ds.runs[0].size());
  ad::Tape tape;
  const PinnLoss l = pinn_loss(bind_params(tape, m.net), m, {&ds.runs[0]}, 2.0);
  EXPECT_NEAR(l.data.value(), data / n, 1e-10 * data / n);
  EXPECT_NEAR(l.residual.value(), resid / n, 1e-10 * resid / n);
  EXPECT_NEAR(l.total.value(), data / n + 2.0 * resid / n, 1e-9 * (data + resid) / n);
}

TEST(Pinn, ZeroResidualWeightIsPureCurveFit) {
  const Dataset ds = small_closed_loop(3);
  PinnConfig c;
  c.hidden = {8, 8};
  c.train.epochs = 15;
  c.train.residual_weight = 0.0;
  const PinnResult r = train_pinn(ds, c);
  for (const LossRecord& rec : r.history.records) {
    EXPECT_EQ(rec.train_loss, rec.data_loss);
    EXPECT_GT(rec.residual_loss, 0.0);
  }
}

TEST(Pinn, TrainingStoresPositiveScalesAndIsDeterministic) {
  const Dataset ds = small_closed_loop(5);
  PinnConfig c;
  c.hidden = {10, 10};
  c.train.epochs = 20;
  const PinnResult a = train_pinn(ds, c);
  const PinnResult b = train_pinn(ds, c);
  EXPECT_EQ(a.model.net.flatten(), b.model.net.flatten());
  EXPECT_NO_THROW(a.model.validate());
  EXPECT_DOUBLE_EQ(a.model.t_total, 5 * 1000.0);
  EXPECT_GT(a.model.std_h, 0.0);
  EXPECT_GT(a.model.residual_scale, 0.0);
  c.train.seed = 4567;
  EXPECT_NE(train_pinn(ds, c).model.net.flatten(), a.model.net.flatten());
}

TEST(Pinn, PredictionUnscalesOutputs) {
  const Dataset ds = small_closed_loop(2);
  PinnModel m = model_for(ds);
  m.net = zero_params({1, 3, 3});
  m.net.b.back() << 1.0, -2.0, 1.0;
  const RunPrediction p = pinn_predict_run(m, ds.runs[1]);
  EXPECT_DOUBLE_EQ(p.T_h_out[3], 384.4);
  EXPECT_DOUBLE_EQ(p.T_c_out[3], 382.4);
  EXPECT_DOUBLE_EQ(p.U_hat[3], 1.0 / m.u_scale);
  EXPECT_EQ(p.run_id, 1);
}

TEST(Pinn, PooledStdOfConstantChannelsIsSpread) {
  hexid::Run r(1);
  r[0].T_h_in = 1.0;
  r[0].T_c_in = 3.0;
  r[0].T_h_out = 1.0;
  r[0].T_c_out = 3.0;
  EXPECT_DOUBLE_EQ(pooled_temperature_std({&r}), 1.0);
  EXPECT_THROW(pooled_temperature_std({}), std::invalid_argument);
}
