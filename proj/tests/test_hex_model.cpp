#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

#include "hexid/hex_model.hpp"
#include "hexid/rng.hpp"

using namespace hexid;

TEST(HexModel, DefaultPhysicalParamsLumpToDefaults) {
  const LumpedParams a = lump(default_physical_params());
  const LumpedParams b = default_lumped_params();
  EXPECT_NEAR(a.alpha_h, b.alpha_h, 1e-15);
  EXPECT_NEAR(a.alpha_c, b.alpha_c, 1e-15);
  EXPECT_NEAR(a.beta_h, b.beta_h, 1e-18);
  EXPECT_NEAR(a.beta_c, b.beta_c, 1e-18);
}

TEST(HexModel, OpenLoopRhsHandComputed) {
  const LumpedParams lp = default_lumped_params();
  const HexRate r = open_loop_rhs({390.0, 380.0}, {400.0, 370.0}, 10000.0, lp);
  EXPECT_NEAR(r.dT_h_out, 0.0996 * 10.0 + 2.41e-5 * 10000.0 * -10.0, 1e-12);
  EXPECT_NEAR(r.dT_c_out, 0.0664 * -10.0 - 3.11e-5 * 10000.0 * -10.0, 1e-12);
}

TEST(HexModel, ZeroUDecouplesStreams) {
  const LumpedParams lp = default_lumped_params();
  const HexRate r = open_loop_rhs({390.0, 380.0}, {395.0, 375.0}, 0.0, lp);
  EXPECT_DOUBLE_EQ(r.dT_h_out, lp.alpha_h * 5.0);
  EXPECT_DOUBLE_EQ(r.dT_c_out, lp.alpha_c * -5.0);
}

TEST(HexModel, NegativeUThrows) {
  EXPECT_THROW(open_loop_rhs({390, 380}, {395, 375}, -1.0, default_lumped_params()), std::invalid_argument);
}

TEST(HexModel, EqualTemperaturesGiveNoExchange) {
  const LumpedParams lp = default_lumped_params();
  const HexRate r = open_loop_rhs({385.0, 385.0}, {385.0, 385.0}, 12000.0, lp);
  EXPECT_EQ(r.dT_h_out, 0.0);
  EXPECT_EQ(r.dT_c_out, 0.0);
}

TEST(HexModel, ControllerSign) {
  const ControllerConfig c{50.0};
  EXPECT_DOUBLE_EQ(controller_output(c, 391.0, 383.0), 400.0);
  EXPECT_LT(controller_output(c, 391.0, 392.0), 0.0);
}

TEST(HexModel, ClosedLoopIsOpenLoopFedByController) {
  const LumpedParams lp = default_lumped_params();
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const HexState s{rng.uniform(370, 410), rng.uniform(370, 410)};
    const ControllerConfig c{rng.uniform(1, 80)};
    const double U = rng.uniform(0, 15000);
    const HexRate a = closed_loop_rhs(s, 391.0, 381.0, U, c, lp);
    const HexRate b = open_loop_rhs(s, {controller_output(c, 391.0, s.T_c_out), 381.0}, U, lp);
    EXPECT_EQ(a.dT_h_out, b.dT_h_out);
    EXPECT_EQ(a.dT_c_out, b.dT_c_out);
  }
}

TEST(HexModel, SteadyStatesZeroTheRhs) {
  const LumpedParams lp = default_lumped_params();
  const HexState o = steady_state({400.0, 375.0}, 9000.0, lp);
  const HexRate r = open_loop_rhs(o, {400.0, 375.0}, 9000.0, lp);
  EXPECT_NEAR(r.dT_h_out, 0.0, 1e-10);
  EXPECT_NEAR(r.dT_c_out, 0.0, 1e-10);
  EXPECT_GT(o.T_h_out, o.T_c_out);

  const ControllerConfig c{50.0};
  const HexState cl = closed_loop_steady_state(391.0, 381.0, 10000.0, c, lp);
  const HexRate rc = closed_loop_rhs(cl, 391.0, 381.0, 10000.0, c, lp);
  EXPECT_NEAR(rc.dT_h_out, 0.0, 1e-10);
  EXPECT_NEAR(rc.dT_c_out, 0.0, 1e-10);
  EXPECT_NEAR(cl.T_c_out, 383.30040, 1e-4);
  EXPECT_NEAR(cl.T_h_out, 383.79155, 1e-4);
  EXPECT_NEAR(controller_output(c, 391.0, cl.T_c_out), 384.97996, 1e-4);
}

TEST(HexModel, FoulingRate) {
  const FoulingParams fp;
  // Below T_ref only the time term acts.
  EXPECT_DOUBLE_EQ(fouling_rate(10000.0, {360.0, 360.0}, fp), -6.5e-5 * 5000.0);
  EXPECT_NEAR(fouling_rate(10000.0, {385.0, 381.0}, fp), -(6.5e-5 + 5e-6 * 10.0) * 5000.0, 1e-15);
  EXPECT_EQ(fouling_rate(fp.U_floor, {400.0, 390.0}, fp), 0.0);
}

TEST(HexModel, ValidateRejectsBadParams) {
  EXPECT_THROW((LumpedParams{0.0, 0.1, 1e-5, 1e-5}).validate(), std::invalid_argument);
  EXPECT_THROW((ControllerConfig{-1.0}).validate(), std::invalid_argument);
  FoulingParams fp;
  fp.U0_min = 11000.0;
  EXPECT_THROW(fp.validate(), std::invalid_argument);
}
