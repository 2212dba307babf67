#include "hexid/pinn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace hexid {
namespace {

using ad::Var;

Eigen::MatrixXd tau_matrix(const PinnModel& m, const std::vector<const Run*>& runs) {
  std::size_t n = 0;
  for (const Run* r : runs) n += r->size();
  Eigen::MatrixXd X(1, static_cast<Eigen::Index>(n));
  Eigen::Index j = 0;
  for (const Run* r : runs) {
    for (const Sample& s : *r) X(0, j++) = m.tau(s.run_id, s.t);
  }
  return X;
}

double channel_mean_std(const std::vector<const Run*>& runs, double Sample::*field, double& mean) {
  double s1 = 0.0, s2 = 0.0;
  std::size_t n = 0;
  for (const Run* r : runs) {
    for (const Sample& s : *r) {
      s1 += s.*field;
      s2 += (s.*field) * (s.*field);
      ++n;
    }
  }
  mean = s1 / static_cast<double>(n);
  return std::sqrt(std::max(0.0, s2 / static_cast<double>(n) - mean * mean));
}

}  // namespace

void PinnModel::validate() const {
  net.validate();
  if (net.n_inputs() != 1 || net.n_outputs() != 3) {
    throw std::invalid_argument("PINN network must map 1 input to 3 outputs");
  }
  if (!(duration > 0.0) || !(t_total > 0.0) || !(std_h > 0.0) || !(std_c > 0.0) ||
      !(u_scale > 0.0) || !(residual_scale > 0.0)) {
    throw std::invalid_argument("PINN scaling constants must be > 0");
  }
  lp.validate();
}

double pooled_temperature_std(const std::vector<const Run*>& runs) {
  double s1 = 0.0, s2 = 0.0;
  std::size_t n = 0;
  for (const Run* r : runs) {
    for (const Sample& s : *r) {
      for (double v : {s.T_h_in, s.T_c_in, s.T_h_out, s.T_c_out}) {
        s1 += v;
        s2 += v * v;
        ++n;
      }
    }
  }
  if (n == 0) throw std::invalid_argument("pooled_temperature_std: no samples");
  const double mean = s1 / static_cast<double>(n);
  return std::sqrt(std::max(0.0, s2 / static_cast<double>(n) - mean * mean));
}

RunPrediction pinn_predict_run(const PinnModel& m, const Run& run) {
  m.validate();
  const Eigen::MatrixXd out = mlp_evaluate(m.net, tau_matrix(m, {&run}));
  RunPrediction p;
  p.run_id = run.empty() ? 0 : run.front().run_id;
  for (std::size_t k = 0; k < run.size(); ++k) {
    const auto j = static_cast<Eigen::Index>(k);
    p.t.push_back(run[k].t);
    p.T_h_out.push_back(m.mean_h + m.std_h * out(0, j));
    p.T_c_out.push_back(m.mean_c + m.std_c * out(1, j));
    p.U_hat.push_back(out(2, j) / m.u_scale);
  }
  return p;
}

PinnLoss pinn_loss(const MlpBinding& binding, const PinnModel& m,
                   const std::vector<const Run*>& runs, double residual_weight) {
  const TangentVars tv = mlp_forward_tangent(binding, tau_matrix(m, runs), 0);
  const LumpedParams& lp = m.lp;
  const double inv_h = 1.0 / (lp.alpha_h * m.residual_scale);
  const double inv_c = 1.0 / (lp.alpha_c * m.residual_scale);
  std::vector<Var> data, resid;
  data.reserve(tv.out.size());
  resid.reserve(tv.out.size());
  std::size_t j = 0;
  for (const Run* r : runs) {
    for (const Sample& s : *r) {
      const Var oh = tv.out[3 * j], oc = tv.out[3 * j + 1], ou = tv.out[3 * j + 2];
      data.push_back(ad::square(oh - (s.T_h_out - m.mean_h) / m.std_h));
      data.push_back(ad::square(oc - (s.T_c_out - m.mean_c) / m.std_c));

      const Var Th = m.std_h * oh + m.mean_h;
      const Var Tc = m.std_c * oc + m.mean_c;
      const Var U = ou * (1.0 / m.u_scale);
      const Var dTh = tv.dout[3 * j] * (m.std_h / m.t_total);
      const Var dTc = tv.dout[3 * j + 1] * (m.std_c / m.t_total);
      const Var coupling = U * (Tc - Th);
      const Var Rh = dTh - (lp.alpha_h * (s.T_h_in - Th) + lp.beta_h * coupling);
      const Var Rc = dTc - (lp.alpha_c * (s.T_c_in - Tc) - lp.beta_c * coupling);
      resid.push_back(ad::square(Rh * inv_h));
      resid.push_back(ad::square(Rc * inv_c));
      ++j;
    }
  }
  PinnLoss l;
  l.data = ad::mean(data);
  l.residual = ad::mean(resid);
  l.total = l.data + residual_weight * l.residual;
  return l;
}

PinnResult train_pinn(const Dataset& ds, const PinnConfig& cfg) {
  ds.validate();
  cfg.train.validate();
  const int n_runs = static_cast<int>(ds.runs.size());
  const Split split = cfg.train.split.train.empty() ? default_split(n_runs) : cfg.train.split;
  validate_split(split, n_runs);

  std::vector<const Run*> train_runs, val_runs;
  for (int r : split.train) train_runs.push_back(&ds.runs[static_cast<std::size_t>(r)]);
  for (int r : split.val) val_runs.push_back(&ds.runs[static_cast<std::size_t>(r)]);

  PinnModel m;
  m.lp = cfg.lp;
  m.duration = static_cast<double>(ds.samples_per_run()) * ds.sample_period();
  m.t_total = m.duration * n_runs;
  m.std_h = std::max(channel_mean_std(train_runs, &Sample::T_h_out, m.mean_h), 1e-6);
  m.std_c = std::max(channel_mean_std(train_runs, &Sample::T_c_out, m.mean_c), 1e-6);
  m.residual_scale = std::max(pooled_temperature_std(train_runs), 1e-6);
  std::vector<int> widths{1};
  widths.insert(widths.end(), cfg.hidden.begin(), cfg.hidden.end());
  widths.push_back(3);
  m.net = init_params(widths, cfg.train.seed);
  m.validate();

  Eigen::VectorXd params = m.net.flatten();
  Eigen::VectorXd best_params = params;
  Adam adam(cfg.train.adam, params.size());
  EarlyStopper stopper(cfg.train.patience, cfg.train.min_rel_improvement);
  PinnResult result;
  ad::Tape tape, val_tape;
  const double w = cfg.train.residual_weight;

  for (int epoch = 0; epoch < cfg.train.epochs; ++epoch) {
    m.net.unflatten(params);
    tape.clear();
    const MlpBinding binding = bind_params(tape, m.net);
    const PinnLoss loss = pinn_loss(binding, m, train_runs, w);
    if (!std::isfinite(loss.total.value())) {
      throw TrainingError("PINN training loss is non-finite at epoch " + std::to_string(epoch));
    }
    tape.backward(loss.total);
    const Eigen::VectorXd grad = gradient(binding);
    if (!grad.allFinite()) {
      throw TrainingError("PINN gradient is non-finite at epoch " + std::to_string(epoch));
    }

    val_tape.clear();
    const MlpBinding vb = bind_params(val_tape, m.net);
    const double val = pinn_loss(vb, m, val_runs, w).total.value();
    if (!std::isfinite(val)) {
      throw TrainingError("PINN validation loss is non-finite at epoch " + std::to_string(epoch));
    }
    if (stopper.update(epoch, val)) best_params = params;
    result.history.records.push_back(LossRecord{epoch, loss.total.value(), val, stopper.best(),
                                                loss.data.value(), loss.residual.value()});
    if (cfg.train.log_every > 0 && epoch % cfg.train.log_every == 0) {
      std::fprintf(stderr, "pinn epoch %d train %.6g (data %.6g resid %.6g) val %.6g best %.6g\n",
                   epoch, loss.total.value(), loss.data.value(), loss.residual.value(), val,
                   stopper.best());
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
