#include "hexid/simulation.hpp"

#include <Eigen/Core>
#include <cmath>
#include <stdexcept>
#include <string>

#include "hexid/integrator.hpp"
#include "hexid/rng.hpp"

namespace hexid {
namespace {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;

std::size_t checked_ratio(double num, double den, const char* what) {
  const double q = num / den;
  const double r = std::round(q);
  if (r < 1.0 || std::abs(q - r) > 1e-9 * r) {
    throw std::invalid_argument(std::string(what) + " must be an integer multiple");
  }
  return static_cast<std::size_t>(r);
}

}  // namespace

void IntegratorConfig::validate(double sample_period) const {
  if (!(step_h > 0.0) || step_h > sample_period) {
    throw std::invalid_argument("integrator step must satisfy 0 < h <= sample period");
  }
  checked_ratio(sample_period, step_h, "sample period / integrator step");
}

std::size_t IntegratorConfig::steps_per_sample(double sample_period) const {
  return checked_ratio(sample_period, step_h, "sample period / integrator step");
}

double RunConfig::noise_std() const {
  if (noise_level < 0.0) throw std::invalid_argument("noise level must be >= 0");
  return noise_scale == NoiseScale::variance ? std::sqrt(noise_level) : noise_level;
}

std::size_t RunConfig::sample_count() const {
  return checked_ratio(duration, sample_period, "duration / sample period");
}

void RunConfig::validate(const IntegratorConfig& ic) const {
  if (!(sample_period > 0.0) || !(duration > 0.0)) {
    throw std::invalid_argument("duration and sample period must be > 0");
  }
  sample_count();
  ic.validate(sample_period);
  noise_std();
}

double draw_initial_u(const RunConfig& rc, const FoulingParams& fp) {
  Rng rng(rc.seed);
  return rng.uniform(fp.U0_min, fp.U0_max);
}

Run simulate_run(const RunConfig& rc, const IntegratorConfig& ic,
                 const LumpedParams& lp, const ControllerConfig& c,
                 const FoulingParams& fp, int run_id, StepTrace* trace) {
  rc.validate(ic);
  lp.validate();
  c.validate();
  fp.validate();

  Rng rng(rc.seed);
  const double U0 = rng.uniform(fp.U0_min, fp.U0_max);
  const HexState init = rc.initial.value_or(
      closed_loop_steady_state(rc.T_c_sp, rc.T_c_in, U0, c, lp));
  const double sigma = rc.noise_std();
  const bool process_noise = rc.noise_mode == NoiseMode::process;
  const std::size_t per = ic.steps_per_sample(rc.sample_period);
  const std::size_t n_samples = rc.sample_count();
  const double h = ic.step_h;

  Vec3 x(init.T_h_out, init.T_c_out, U0);
  Run run;
  run.reserve(n_samples);
  const std::size_t last_step = (n_samples - 1) * per;
  for (std::size_t i = 0;; ++i) {
    const double t = static_cast<double>(i) * h;
    const double noise = sigma * rng.standard_normal();
    const double T_c_in_plant = rc.T_c_in + (process_noise ? noise : 0.0);
    if (i % per == 0) {
      Sample s;
      s.run_id = run_id;
      s.t = static_cast<double>(i / per) * rc.sample_period;
      s.T_c_in = rc.T_c_in + noise;
      s.T_c_sp = rc.T_c_sp;
      s.T_h_in = controller_output(c, rc.T_c_sp, x[1]);
      s.T_h_out = x[0];
      s.T_c_out = x[1];
      s.U_true = x[2];
      run.push_back(s);
    }
    if (i == last_step) break;
    if (trace) {
      trace->t.push_back(t);
      trace->T_h_in.push_back(controller_output(c, rc.T_c_sp, x[1]));
      trace->T_c_in.push_back(T_c_in_plant);
    }
    auto rhs = [&](double, const Vec3& y) {
      const HexState s{y[0], y[1]};
      const HexRate r = closed_loop_rhs(s, rc.T_c_sp, T_c_in_plant, y[2], c, lp);
      return Vec3(r.dT_h_out, r.dT_c_out, fouling_rate(y[2], s, fp));
    };
    try {
      x = rk4_step(rhs, x, t, h);
    } catch (const IntegrationError& e) {
      throw IntegrationError("run " + std::to_string(run_id) + ", step " +
                             std::to_string(i) + ": " + e.what());
    }
  }
  return run;
}

Dataset generate_dataset(int n_runs, std::uint64_t master_seed,
                         const RunConfig& rc, const IntegratorConfig& ic,
                         const LumpedParams& lp, const ControllerConfig& c,
                         const FoulingParams& fp) {
  if (n_runs < 1) throw std::invalid_argument("n_runs must be >= 1");
  Dataset ds;
  ds.runs.reserve(static_cast<std::size_t>(n_runs));
  for (int r = 0; r < n_runs; ++r) {
    RunConfig run_rc = rc;
    run_rc.seed = derive_seed(master_seed, static_cast<std::uint64_t>(r));
    ds.runs.push_back(simulate_run(run_rc, ic, lp, c, fp, r));
  }
  return ds;
}

Run simulate_open_loop(const OpenLoopScenario& scenario, const RunConfig& rc,
                       const IntegratorConfig& ic, const LumpedParams& lp,
                       const UModel& u_model, int run_id) {
  rc.validate(ic);
  lp.validate();
  if (scenario.hot_inlet.empty() || scenario.cold_inlet.empty()) {
    throw std::invalid_argument("open-loop scenario needs both inlet schedules");
  }
  const auto* fouling = std::get_if<FoulingParams>(&u_model);
  const auto* u_schedule = std::get_if<Schedule>(&u_model);
  if (fouling) fouling->validate();

  Rng rng(rc.seed);
  double U0 = 0.0;
  if (fouling) {
    U0 = rng.uniform(fouling->U0_min, fouling->U0_max);
  } else {
    rng.uniform();  // keep the noise stream aligned with simulate_run
    U0 = (*u_schedule)(0.0);
  }
  const HexState init = rc.initial.value_or(steady_state(
      ExogenousInputs{scenario.hot_inlet(0.0), scenario.cold_inlet(0.0)}, U0, lp));
  const double sigma = rc.noise_std();
  const bool process_noise = rc.noise_mode == NoiseMode::process;
  const std::size_t per = ic.steps_per_sample(rc.sample_period);
  const std::size_t n_samples = rc.sample_count();
  const double h = ic.step_h;

  Vec3 x(init.T_h_out, init.T_c_out, U0);
  Run run;
  run.reserve(n_samples);
  const std::size_t last_step = (n_samples - 1) * per;
  for (std::size_t i = 0;; ++i) {
    const double t = static_cast<double>(i) * h;
    const double noise = sigma * rng.standard_normal();
    const double cold_offset = process_noise ? noise : 0.0;
    if (u_schedule) x[2] = (*u_schedule)(t);
    if (i % per == 0) {
      Sample s;
      s.run_id = run_id;
      s.t = static_cast<double>(i / per) * rc.sample_period;
      s.T_c_in = scenario.cold_inlet(t) + noise;
      s.T_c_sp = rc.T_c_sp;
      s.T_h_in = scenario.hot_inlet(t);
      s.T_h_out = x[0];
      s.T_c_out = x[1];
      s.U_true = x[2];
      run.push_back(s);
    }
    if (i == last_step) break;
    auto rhs = [&](double tau, const Vec3& y) {
      const HexState s{y[0], y[1]};
      const double U = u_schedule ? (*u_schedule)(tau) : y[2];
      const HexRate r = open_loop_rhs(
          s, ExogenousInputs{scenario.hot_inlet(tau), scenario.cold_inlet(tau) + cold_offset},
          U, lp);
      return Vec3(r.dT_h_out, r.dT_c_out, fouling ? fouling_rate(y[2], s, *fouling) : 0.0);
    };
    try {
      x = rk4_step(rhs, x, t, h);
    } catch (const IntegrationError& e) {
      throw IntegrationError("open-loop run " + std::to_string(run_id) + ", step " +
                             std::to_string(i) + ": " + e.what());
    }
  }
  return run;
}

OpenLoopScenario switch_streams(const OpenLoopScenario& scenario) {
  return OpenLoopScenario{scenario.cold_inlet, scenario.hot_inlet};
}

}  // namespace hexid
