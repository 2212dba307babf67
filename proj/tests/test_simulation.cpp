#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "hexid/integrator.hpp"
#include "hexid/simulation.hpp"

using namespace hexid;

namespace {

const LumpedParams kLp = default_lumped_params();
const ControllerConfig kC{};
const FoulingParams kFp{};

RunConfig quiet(std::uint64_t seed = 5) {
  RunConfig rc;
  rc.noise_level = 0.0;
  rc.seed = seed;
  return rc;
}

double max_outlet_diff(const hexid::Run& a, const hexid::Run& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < std::min(a.size(), b.size()); ++k) {
    d = std::max({d, std::abs(a[k].T_h_out - b[k].T_h_out), std::abs(a[k].T_c_out - b[k].T_c_out)});
  }
  return d;
}

}  // namespace

TEST(Simulation, DefaultDatasetShape) {
  const Dataset ds = generate_dataset(30, 2024, RunConfig{}, IntegratorConfig{}, kLp, kC, kFp);
  EXPECT_EQ(ds.runs.size(), 30u);
  EXPECT_EQ(ds.sample_count(), 1800u);
  EXPECT_EQ(ds.samples_per_run(), 60u);
  EXPECT_DOUBLE_EQ(ds.sample_period(), 50.0);
  EXPECT_NO_THROW(ds.validate());
  for (const hexid::Run& r : ds.runs) {
    EXPECT_GE(r.front().U_true, 9500.0);
    EXPECT_LE(r.front().U_true, 10500.0);
  }
}

TEST(Simulation, SingleNoiselessRunIsDeterministic) {
  const Dataset a = generate_dataset(1, 7, quiet(), IntegratorConfig{}, kLp, kC, kFp);
  const Dataset b = generate_dataset(1, 7, quiet(), IntegratorConfig{}, kLp, kC, kFp);
  EXPECT_EQ(a.sample_count(), 60u);
  EXPECT_TRUE(a == b);
  for (const Sample& s : a.runs[0]) EXPECT_EQ(s.T_c_in, 381.0);
}

TEST(Simulation, EquilibriumWithoutFoulingStaysPut) {
  FoulingParams fp;
  fp.k_t = 0.0;
  fp.k_T = 0.0;
  const hexid::Run run = simulate_run(quiet(), IntegratorConfig{}, kLp, kC, fp);
  for (const Sample& s : run) {
    EXPECT_NEAR(s.T_h_out, run.front().T_h_out, 1e-9);
    EXPECT_NEAR(s.T_c_out, run.front().T_c_out, 1e-9);
    EXPECT_EQ(s.U_true, run.front().U_true);
  }
}

TEST(Simulation, StepHalvingConverges) {
  RunConfig rc = quiet();
  rc.initial = HexState{390.0, 380.0};
  const hexid::Run a = simulate_run(rc, IntegratorConfig{1.0}, kLp, kC, kFp);
  const hexid::Run b = simulate_run(rc, IntegratorConfig{0.5}, kLp, kC, kFp);
  EXPECT_LT(max_outlet_diff(a, b), 1e-5);
}

TEST(Simulation, FoulingMonotoneAndControllerCompensates) {
  const hexid::Run run = simulate_run(quiet(), IntegratorConfig{}, kLp, kC, kFp);
  for (std::size_t k = 1; k < run.size(); ++k) {
    EXPECT_LT(run[k].U_true, run[k - 1].U_true);
    EXPECT_GT(run[k].U_true, kFp.U_floor);
    EXPECT_GE(run[k].T_h_in, run[k - 1].T_h_in - 1e-12);
  }
}

TEST(Simulation, ProcessNoiseEntersTheDynamics) {
  RunConfig rc;
  rc.seed = 11;
  rc.noise_mode = NoiseMode::measurement;
  const hexid::Run meas = simulate_run(rc, IntegratorConfig{}, kLp, kC, kFp);
  rc.noise_mode = NoiseMode::process;
  const hexid::Run proc = simulate_run(rc, IntegratorConfig{}, kLp, kC, kFp);
  RunConfig q = rc;
  q.noise_level = 0.0;
  const hexid::Run clean = simulate_run(q, IntegratorConfig{}, kLp, kC, kFp);
  // Same draws: recorded inlets agree, only the process run is perturbed.
  for (std::size_t k = 0; k < meas.size(); ++k) EXPECT_EQ(meas[k].T_c_in, proc[k].T_c_in);
  EXPECT_EQ(max_outlet_diff(meas, clean), 0.0);
  EXPECT_GT(max_outlet_diff(proc, clean), 1e-4);
}

TEST(Simulation, NoiseVarianceMatchesLevel) {
  RunConfig rc;
  rc.duration = 50.0 * 2000;
  rc.seed = 3;
  const hexid::Run run = simulate_run(rc, IntegratorConfig{}, kLp, kC, kFp);
  double s2 = 0.0;
  for (const Sample& s : run) s2 += (s.T_c_in - 381.0) * (s.T_c_in - 381.0);
  EXPECT_NEAR(s2 / static_cast<double>(run.size()), 0.25, 0.02);
}

TEST(Simulation, ClosedLoopReplayOpenLoop) {
  RunConfig rc = quiet(21);
  rc.initial = HexState{388.0, 382.0};
  StepTrace tr;
  const hexid::Run cl = simulate_run(rc, IntegratorConfig{}, kLp, kC, kFp, 0, &tr);
  const OpenLoopScenario sc{Schedule(tr.t, tr.T_h_in), Schedule(tr.t, tr.T_c_in)};
  const hexid::Run ol = simulate_open_loop(sc, rc, IntegratorConfig{}, kLp, kFp);
  // The replay holds the controller output over each 1 s step.
  EXPECT_LT(max_outlet_diff(cl, ol), 0.05);
  const hexid::Run ol_fine = simulate_open_loop(sc, rc, IntegratorConfig{1.0}, kLp, kFp);
  EXPECT_EQ(max_outlet_diff(ol, ol_fine), 0.0);
}

TEST(Simulation, OpenLoopBoxInvariance) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    RunConfig rc = quiet(seed);
    rc.sample_period = 1.0;
    rc.initial = HexState{372.0 + seed, 398.0 - seed};
    const hexid::Run run = simulate_open_loop({Schedule::constant(400.0), Schedule::constant(370.0)}, rc,
                                       IntegratorConfig{}, kLp, kFp);
    for (const Sample& s : run) {
      for (double T : {s.T_h_out, s.T_c_out}) {
        EXPECT_GE(T, 370.0 - 1e-9);
        EXPECT_LE(T, 400.0 + 1e-9);
      }
    }
  }
}

TEST(Simulation, SwitchStreamsSwapsSchedules) {
  const OpenLoopScenario sc{Schedule::constant(395.0), Schedule::constant(381.0)};
  const OpenLoopScenario sw = switch_streams(sc);
  EXPECT_EQ(sw.hot_inlet(0.0), 381.0);
  EXPECT_EQ(sw.cold_inlet(0.0), 395.0);
}

TEST(Simulation, ConstantUScheduleIsHeld) {
  const hexid::Run run = simulate_open_loop({Schedule::constant(400.0), Schedule::constant(375.0)}, quiet(),
                                     IntegratorConfig{}, kLp, Schedule::constant(8000.0));
  for (const Sample& s : run) EXPECT_EQ(s.U_true, 8000.0);
  // Starts at the open-loop equilibrium and stays there.
  const HexState eq = steady_state({400.0, 375.0}, 8000.0, kLp);
  EXPECT_NEAR(run.back().T_h_out, eq.T_h_out, 1e-9);
}

TEST(Simulation, InvalidConfigsThrow) {
  RunConfig rc;
  rc.sample_period = 7.5;
  EXPECT_THROW(simulate_run(rc, IntegratorConfig{2.0}, kLp, kC, kFp), std::invalid_argument);
  rc = RunConfig{};
  rc.noise_level = -1.0;
  EXPECT_THROW(simulate_run(rc, IntegratorConfig{}, kLp, kC, kFp), std::invalid_argument);
  EXPECT_THROW(generate_dataset(0, 1, RunConfig{}, IntegratorConfig{}, kLp, kC, kFp), std::invalid_argument);
}

TEST(Integrator, Rk4ExactForCubic) {
  using V = Eigen::Matrix<double, 1, 1>;
  auto rhs = [](double t, const V&) -> V { return V(3.0 * t * t); };
  V y(0.0);
  for (int k = 0; k < 10; ++k) y = rk4_step(rhs, y, 0.1 * k, 0.1);
  EXPECT_NEAR(y(0), 1.0, 1e-14);
}

TEST(Integrator, NonFiniteDerivativeThrows) {
  using V = Eigen::Matrix<double, 1, 1>;
  auto rhs = [](double, const V&) -> V { return V(std::nan("")); };
  EXPECT_THROW(rk4_step(rhs, V(1.0), 0.0, 0.1), IntegrationError);
  EXPECT_THROW(rk4_step(rhs, V(1.0), 0.0, 0.0), std::invalid_argument);
}
