#include "hexid/perpinn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

#include "hexid/integrator.hpp"

namespace hexid {
namespace {

using ad::Tape;
using ad::Var;

// Value plus derivatives w.r.t. (T_h_out, T_c_out, U) at the step start.
struct Dual3 {
  double v = 0.0;
  double d[3] = {0.0, 0.0, 0.0};
};

Dual3 operator+(const Dual3& a, const Dual3& b) {
  Dual3 r{a.v + b.v, {a.d[0] + b.d[0], a.d[1] + b.d[1], a.d[2] + b.d[2]}};
  return r;
}
Dual3 operator-(const Dual3& a, const Dual3& b) {
  Dual3 r{a.v - b.v, {a.d[0] - b.d[0], a.d[1] - b.d[1], a.d[2] - b.d[2]}};
  return r;
}
Dual3 operator*(const Dual3& a, const Dual3& b) {
  Dual3 r{a.v * b.v,
          {a.d[0] * b.v + a.v * b.d[0], a.d[1] * b.v + a.v * b.d[1], a.d[2] * b.v + a.v * b.d[2]}};
  return r;
}
Dual3 operator*(double c, const Dual3& a) {
  Dual3 r{c * a.v, {c * a.d[0], c * a.d[1], c * a.d[2]}};
  return r;
}
Dual3 operator+(const Dual3& a, double c) {
  Dual3 r = a;
  r.v += c;
  return r;
}
Dual3 operator-(double c, const Dual3& a) { return (-1.0 * a) + c; }

template <class T>
void plant_step_t(const T& Th, const T& Tc, const T& U, const ExogenousInputs& in0,
                  const ExogenousInputs& inm, const ExogenousInputs& in1, const LumpedParams& lp,
                  double h, T& Th1, T& Tc1) {
  auto f = [&](const T& xh, const T& xc, const ExogenousInputs& in, T& dh, T& dc) {
    const T coupling = U * (xc - xh);
    dh = lp.alpha_h * (in.T_h_in - xh) + lp.beta_h * coupling;
    dc = lp.alpha_c * (in.T_c_in - xc) - lp.beta_c * coupling;
  };
  T k1h, k1c, k2h, k2c, k3h, k3c, k4h, k4c;
  f(Th, Tc, in0, k1h, k1c);
  f(Th + (0.5 * h) * k1h, Tc + (0.5 * h) * k1c, inm, k2h, k2c);
  f(Th + (0.5 * h) * k2h, Tc + (0.5 * h) * k2c, inm, k3h, k3c);
  f(Th + h * k3h, Tc + h * k3c, in1, k4h, k4c);
  Th1 = Th + (h / 6.0) * (k1h + 2.0 * k2h + 2.0 * k3h + k4h);
  Tc1 = Tc + (h / 6.0) * (k1c + 2.0 * k2c + 2.0 * k3c + k4c);
}

struct Grid {
  std::size_t n_samples = 0;
  std::size_t per = 0;  // integrator steps per sample
  std::size_t n_steps = 0;
  double h = 0.0;
  double period = 0.0;
};

Grid grid_of(const Run& run, const IntegratorConfig& ic) {
  if (run.size() < 2) throw std::invalid_argument("Per-PINN needs runs with >= 2 samples");
  Grid g;
  g.n_samples = run.size();
  g.period = run[1].t - run[0].t;
  if (!(g.period > 0.0)) throw std::invalid_argument("run sample times must increase");
  g.per = ic.steps_per_sample(g.period);
  g.n_steps = (g.n_samples - 1) * g.per;
  g.h = ic.step_h;
  return g;
}

Grid common_grid(const std::vector<const Run*>& runs, const IntegratorConfig& ic) {
  if (runs.empty()) throw std::invalid_argument("Per-PINN needs at least one run");
  const Grid g = grid_of(*runs.front(), ic);
  for (const Run* r : runs) {
    const Grid o = grid_of(*r, ic);
    if (o.n_samples != g.n_samples || o.period != g.period || (*r)[0].t != (*runs.front())[0].t) {
      throw std::invalid_argument("Per-PINN runs must share one sample grid (horizon mismatch)");
    }
  }
  return g;
}

double logistic(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

// Inlets of every run at t, t + h/2, t + h for one step.
struct StepInlets {
  ExogenousInputs in0, mid, in1;
};

StepInlets step_inlets(const Run& run, double t, double h) {
  return StepInlets{interpolate_inlets(run, t), interpolate_inlets(run, t + 0.5 * h),
                    interpolate_inlets(run, t + h)};
}

double step_time(const Run& run, const Grid& g, std::size_t i) {
  return run[0].t + static_cast<double>(i) * g.h;
}

Eigen::MatrixXd time_features(const PerPinnModel& m, const Run& run, const Grid& g) {
  Eigen::MatrixXd X(1, static_cast<Eigen::Index>(g.n_steps + 1));
  for (std::size_t i = 0; i <= g.n_steps; ++i) {
    X(0, static_cast<Eigen::Index>(i)) = step_time(run, g, i) / m.duration;
  }
  return X;
}

// Integrates all runs in plain arithmetic. With time features `u_steps`
// (U at every step time, shared by all runs) may be supplied to skip the
// network evaluation.
std::vector<RunPrediction> predict_runs(const PerPinnModel& m, const std::vector<const Run*>& runs,
                                        const std::vector<double>* u_steps, StepLog* log) {
  const Grid g = common_grid(runs, m.ic);
  std::vector<double> u_shared;
  if (m.features == FeatureSpec::time) {
    if (u_steps) {
      if (u_steps->size() != g.n_steps + 1) throw std::invalid_argument("u_steps has the wrong length");
      u_shared = *u_steps;
    } else {
      const Eigen::MatrixXd raw = mlp_evaluate(m.net, time_features(m, *runs.front(), g));
      u_shared.resize(g.n_steps + 1);
      for (std::size_t i = 0; i <= g.n_steps; ++i) {
        u_shared[i] = m.U_max * logistic(raw(0, static_cast<Eigen::Index>(i)));
      }
    }
  }
  const std::size_t B = runs.size();
  std::vector<RunPrediction> preds(B);
  std::vector<HexState> x(B);
  for (std::size_t r = 0; r < B; ++r) {
    const Run& run = *runs[r];
    preds[r].run_id = run[0].run_id;
    x[r] = HexState{run[0].T_h_out, run[0].T_c_out};
  }
  std::vector<double> U(B);
  Eigen::MatrixXd feat(2, static_cast<Eigen::Index>(B));
  for (std::size_t i = 0;; ++i) {
    const double t = step_time(*runs.front(), g, i);
    if (m.features == FeatureSpec::time) {
      std::fill(U.begin(), U.end(), u_shared[i]);
    } else {
      for (std::size_t r = 0; r < B; ++r) {
        feat(0, static_cast<Eigen::Index>(r)) = t / m.duration;
        feat(1, static_cast<Eigen::Index>(r)) =
            (0.5 * (x[r].T_h_out + x[r].T_c_out) - m.temp_mean) / m.temp_scale;
      }
      const Eigen::MatrixXd raw = mlp_evaluate(m.net, feat);
      for (std::size_t r = 0; r < B; ++r) U[r] = m.U_max * logistic(raw(0, static_cast<Eigen::Index>(r)));
    }
    if (i % g.per == 0) {
      for (std::size_t r = 0; r < B; ++r) {
        preds[r].t.push_back(t);
        preds[r].T_h_out.push_back(x[r].T_h_out);
        preds[r].T_c_out.push_back(x[r].T_c_out);
        preds[r].U_hat.push_back(U[r]);
      }
    }
    if (i == g.n_steps) break;
    for (std::size_t r = 0; r < B; ++r) {
      const StepInlets in = step_inlets(*runs[r], t, g.h);
      if (log && r == 0) {
        log->t.push_back(t);
        log->T_h_out.push_back(x[r].T_h_out);
        log->T_c_out.push_back(x[r].T_c_out);
        log->U.push_back(U[r]);
        log->T_h_in0.push_back(in.in0.T_h_in);
        log->T_c_in0.push_back(in.in0.T_c_in);
        log->T_h_in_mid.push_back(in.mid.T_h_in);
        log->T_c_in_mid.push_back(in.mid.T_c_in);
        log->T_h_in1.push_back(in.in1.T_h_in);
        log->T_c_in1.push_back(in.in1.T_c_in);
      }
      x[r] = plant_rk4_step(x[r], U[r], in.in0, in.mid, in.in1, m.lp, g.h);
      if (!std::isfinite(x[r].T_h_out) || !std::isfinite(x[r].T_c_out)) {
        throw IntegrationError("Per-PINN run " + std::to_string(preds[r].run_id) +
                               ": non-finite state at step " + std::to_string(i));
      }
    }
  }
  return preds;
}

double pooled_loss(const PerPinnModel& m, const std::vector<const Run*>& runs,
                   const std::vector<RunPrediction>& preds) {
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const Run& run = *runs[r];
    for (std::size_t k = 0; k < run.size(); ++k) {
      const double eh = (preds[r].T_h_out[k] - run[k].T_h_out) / m.loss_scale;
      const double ec = (preds[r].T_c_out[k] - run[k].T_c_out) / m.loss_scale;
      acc += eh * eh + ec * ec;
      n += 2;
    }
  }
  return acc / static_cast<double>(n);
}

}  // namespace

const char* to_string(FeatureSpec f) {
  return f == FeatureSpec::time ? "time" : "time_mean_temp";
}

FeatureSpec feature_spec_from_string(const std::string& s) {
  if (s == "time") return FeatureSpec::time;
  if (s == "time_mean_temp") return FeatureSpec::time_mean_temp;
  throw std::invalid_argument("unknown Per-PINN feature spec '" + s + "' (time | time_mean_temp)");
}

void PerPinnModel::validate() const {
  net.validate();
  if (net.n_inputs() != n_features() || net.n_outputs() != 1) {
    throw std::invalid_argument("Per-PINN network must map " + std::to_string(n_features()) +
                                " features to 1 output");
  }
  if (!(U_max > 0.0) || !(duration > 0.0) || !(temp_scale > 0.0) || !(loss_scale > 0.0)) {
    throw std::invalid_argument("Per-PINN scaling constants must be > 0");
  }
  lp.validate();
}

double PerPinnModel::closure(double t, double T_h_out, double T_c_out) const {
  Eigen::VectorXd f(n_features());
  f[0] = t / duration;
  if (features == FeatureSpec::time_mean_temp) f[1] = (0.5 * (T_h_out + T_c_out) - temp_mean) / temp_scale;
  return U_max * logistic(mlp_evaluate(net, f)[0]);
}

ExogenousInputs interpolate_inlets(const Run& run, double t) {
  if (run.empty()) throw std::invalid_argument("interpolate_inlets: empty run");
  if (run.size() == 1 || t <= run.front().t) return {run.front().T_h_in, run.front().T_c_in};
  if (t >= run.back().t) return {run.back().T_h_in, run.back().T_c_in};
  const double period = run[1].t - run[0].t;
  std::size_t k = static_cast<std::size_t>((t - run.front().t) / period);
  k = std::min(k, run.size() - 2);
  const double w = (t - run[k].t) / (run[k + 1].t - run[k].t);
  return {run[k].T_h_in + w * (run[k + 1].T_h_in - run[k].T_h_in),
          run[k].T_c_in + w * (run[k + 1].T_c_in - run[k].T_c_in)};
}

HexState plant_rk4_step(const HexState& x, double U, const ExogenousInputs& in0,
                        const ExogenousInputs& in_mid, const ExogenousInputs& in1,
                        const LumpedParams& lp, double h) {
  if (U < 0.0) throw std::invalid_argument("U must be >= 0");
  double th = 0.0, tc = 0.0;
  plant_step_t(x.T_h_out, x.T_c_out, U, in0, in_mid, in1, lp, h, th, tc);
  return {th, tc};
}

RunPrediction perpinn_predict_run(const PerPinnModel& m, const Run& run, StepLog* log) {
  m.validate();
  return predict_runs(m, {&run}, nullptr, log).front();
}

double perpinn_loss_value(const PerPinnModel& m, const std::vector<const Run*>& runs) {
  return pooled_loss(m, runs, predict_runs(m, runs, nullptr, nullptr));
}

namespace {

Var record_loss(Tape& tape, const MlpBinding& binding, const PerPinnModel& m,
                const std::vector<const Run*>& runs, std::vector<double>* u_out) {
  const Grid g = common_grid(runs, m.ic);
  const std::size_t B = runs.size();

  std::vector<Var> u_shared;
  if (m.features == FeatureSpec::time) {
    const std::vector<Var> raw = mlp_forward_batch(binding, time_features(m, *runs.front(), g));
    u_shared.reserve(raw.size());
    for (Var r : raw) u_shared.push_back(m.U_max * ad::logistic(r));
    if (u_out) {
      u_out->clear();
      for (Var u : u_shared) u_out->push_back(u.value());
    }
  }

  std::vector<Var> xh(B), xc(B), U(B);
  for (std::size_t r = 0; r < B; ++r) {
    xh[r] = tape.constant((*runs[r])[0].T_h_out);
    xc[r] = tape.constant((*runs[r])[0].T_c_out);
  }
  std::vector<Var> sq;
  sq.reserve(2 * B * g.n_samples);
  std::vector<Var> feats(2 * B);
  const double inv_scale = 1.0 / m.loss_scale;
  for (std::size_t i = 0;; ++i) {
    const double t = step_time(*runs.front(), g, i);
    if (m.features == FeatureSpec::time) {
      std::fill(U.begin(), U.end(), u_shared[i]);
    } else {
      for (std::size_t r = 0; r < B; ++r) {
        feats[2 * r] = tape.constant(t / m.duration);
        feats[2 * r + 1] = ((0.5 * (xh[r] + xc[r])) - m.temp_mean) * (1.0 / m.temp_scale);
      }
      const std::vector<Var> raw = mlp_forward_batch(binding, feats, static_cast<int>(B));
      for (std::size_t r = 0; r < B; ++r) U[r] = m.U_max * ad::logistic(raw[r]);
    }
    if (i % g.per == 0) {
      const std::size_t k = i / g.per;
      for (std::size_t r = 0; r < B; ++r) {
        const Sample& s = (*runs[r])[k];
        sq.push_back(ad::square((xh[r] - s.T_h_out) * inv_scale));
        sq.push_back(ad::square((xc[r] - s.T_c_out) * inv_scale));
      }
    }
    if (i == g.n_steps) break;
    for (std::size_t r = 0; r < B; ++r) {
      const StepInlets in = step_inlets(*runs[r], t, g.h);
      Dual3 dh{xh[r].value(), {1.0, 0.0, 0.0}};
      Dual3 dc{xc[r].value(), {0.0, 1.0, 0.0}};
      Dual3 du{U[r].value(), {0.0, 0.0, 1.0}};
      Dual3 oh, oc;
      plant_step_t(dh, dc, du, in.in0, in.mid, in.in1, m.lp, g.h, oh, oc);
      if (!std::isfinite(oh.v) || !std::isfinite(oc.v)) {
        throw IntegrationError("Per-PINN run " + std::to_string((*runs[r])[0].run_id) +
                               ": non-finite state at step " + std::to_string(i));
      }
      const Var ins[3] = {xh[r], xc[r], U[r]};
      const double outs[2] = {oh.v, oc.v};
      const double jac[6] = {oh.d[0], oh.d[1], oh.d[2], oc.d[0], oc.d[1], oc.d[2]};
      const Var first = tape.jacobian(ins, outs, jac);
      xh[r] = first;
      xc[r] = tape.at(first.id + 1);
    }
  }
  return ad::mean(sq);
}

}  // namespace

Var perpinn_loss(Tape& tape, const MlpBinding& binding, const PerPinnModel& m,
                 const std::vector<const Run*>& runs) {
  return record_loss(tape, binding, m, runs, nullptr);
}

PerPinnResult train_perpinn(const Dataset& ds, const PerPinnConfig& cfg) {
  ds.validate();
  cfg.train.validate();
  const int n_runs = static_cast<int>(ds.runs.size());
  const Split split = cfg.train.split.train.empty() ? default_split(n_runs) : cfg.train.split;
  validate_split(split, n_runs);
  if (!(cfg.U_max > 0.0)) throw std::invalid_argument("U_max must be > 0");

  std::vector<const Run*> train_runs, val_runs;
  for (int r : split.train) train_runs.push_back(&ds.runs[static_cast<std::size_t>(r)]);
  for (int r : split.val) val_runs.push_back(&ds.runs[static_cast<std::size_t>(r)]);

  PerPinnModel m;
  m.features = cfg.features;
  m.U_max = cfg.U_max;
  m.ic = cfg.ic;
  m.lp = cfg.lp;
  m.duration = ds.runs.front().back().t - ds.runs.front().front().t;
  if (!(m.duration > 0.0)) throw std::invalid_argument("runs need a positive horizon");

  // Pooled statistics of the training outlets.
  double s1 = 0.0, s2 = 0.0, m1 = 0.0, m2 = 0.0;
  std::size_t n = 0;
  for (const Run* run : train_runs) {
    for (const Sample& s : *run) {
      s1 += s.T_h_out + s.T_c_out;
      s2 += s.T_h_out * s.T_h_out + s.T_c_out * s.T_c_out;
      const double tm = 0.5 * (s.T_h_out + s.T_c_out);
      m1 += tm;
      m2 += tm * tm;
      ++n;
    }
  }
  const double pooled_mean = s1 / static_cast<double>(2 * n);
  const double pooled_var = std::max(0.0, s2 / static_cast<double>(2 * n) - pooled_mean * pooled_mean);
  m.loss_scale = std::max(std::sqrt(pooled_var), 1e-3);
  m.temp_mean = m1 / static_cast<double>(n);
  const double tvar = std::max(0.0, m2 / static_cast<double>(n) - m.temp_mean * m.temp_mean);
  m.temp_scale = std::max(std::sqrt(tvar), cfg.temp_scale_floor);

  std::vector<int> widths{m.n_features()};
  widths.insert(widths.end(), cfg.hidden.begin(), cfg.hidden.end());
  widths.push_back(1);
  m.net = init_params(widths, cfg.train.seed);
  m.validate();

  Eigen::VectorXd params = m.net.flatten();
  Eigen::VectorXd best_params = params;
  Adam adam(cfg.train.adam, params.size());
  EarlyStopper stopper(cfg.train.patience, cfg.train.min_rel_improvement);
  PerPinnResult result;
  Tape tape;

  for (int epoch = 0; epoch < cfg.train.epochs; ++epoch) {
    m.net.unflatten(params);
    tape.clear();
    const MlpBinding binding = bind_params(tape, m.net);
    Var loss;
    std::vector<double> u_steps;
    try {
      loss = record_loss(tape, binding, m, train_runs, &u_steps);
    } catch (const IntegrationError& e) {
      throw TrainingError("Per-PINN diverged at epoch " + std::to_string(epoch) + ": " + e.what());
    }
    if (!std::isfinite(loss.value())) {
      throw TrainingError("Per-PINN training loss is non-finite at epoch " + std::to_string(epoch));
    }
    tape.backward(loss);
    const Eigen::VectorXd grad = gradient(binding);
    if (!grad.allFinite()) {
      throw TrainingError("Per-PINN gradient is non-finite at epoch " + std::to_string(epoch));
    }

    double val = 0.0;
    if (m.features == FeatureSpec::time) {
      // U at the step times is shared with the training pass.
      val = pooled_loss(m, val_runs, predict_runs(m, val_runs, &u_steps, nullptr));
    } else {
      val = perpinn_loss_value(m, val_runs);
    }
    if (!std::isfinite(val)) {
      throw TrainingError("Per-PINN validation loss is non-finite at epoch " + std::to_string(epoch));
    }
    if (stopper.update(epoch, val)) best_params = params;
    result.history.records.push_back(
        LossRecord{epoch, loss.value(), val, stopper.best(), loss.value(), 0.0});
    if (cfg.train.log_every > 0 && epoch % cfg.train.log_every == 0) {
      std::fprintf(stderr, "perpinn epoch %d train %.6g val %.6g best %.6g\n", epoch, loss.value(),
                   val, stopper.best());
    }
    if (stopper.should_stop(epoch)) {
      result.history.stopped_early = true;
      break;
    }
    adam.step(params, grad);
  }
  m.net.unflatten(best_params);
  result.history.best_epoch = stopper.best_epoch();
  result.model = std::move(m);
  return result;
}

}  // namespace hexid
