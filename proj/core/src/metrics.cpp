#include "hexid/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace hexid {

std::string to_csv_row(const EvalMetrics& m) {
  char buf[256];
  std::snprintf(buf, sizeof buf, ",%.10g,%.10g,%.10g,%.10g", m.mse_Th, m.mse_Tc, m.mse_U, m.rel_rmse_U);
  return m.scenario + "," + m.model + buf;
}

EvalMetrics compute_metrics(const Dataset& ds, const std::vector<RunPrediction>& preds,
                            const std::string& scenario, const std::string& model) {
  if (preds.size() != ds.runs.size()) throw std::invalid_argument("prediction/run count mismatch");
  double eh = 0.0, ec = 0.0, eu = 0.0, er = 0.0;
  std::size_t n = 0, nu = 0;
  for (std::size_t r = 0; r < ds.runs.size(); ++r) {
    const Run& run = ds.runs[r];
    const RunPrediction& p = preds[r];
    if (p.T_h_out.size() != run.size() || p.T_c_out.size() != run.size() || p.U_hat.size() != run.size()) {
      throw std::invalid_argument("prediction horizon does not match run " + std::to_string(r));
    }
    for (std::size_t k = 0; k < run.size(); ++k) {
      eh += (p.T_h_out[k] - run[k].T_h_out) * (p.T_h_out[k] - run[k].T_h_out);
      ec += (p.T_c_out[k] - run[k].T_c_out) * (p.T_c_out[k] - run[k].T_c_out);
      ++n;
      if (std::isfinite(run[k].U_true)) {
        const double d = p.U_hat[k] - run[k].U_true;
        eu += d * d;
        er += (d / run[k].U_true) * (d / run[k].U_true);
        ++nu;
      }
    }
  }
  if (n == 0) throw std::invalid_argument("scenario has no samples");
  EvalMetrics m;
  m.scenario = scenario;
  m.model = model;
  m.mse_Th = eh / static_cast<double>(n);
  m.mse_Tc = ec / static_cast<double>(n);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  m.mse_U = nu ? eu / static_cast<double>(nu) : nan;
  m.rel_rmse_U = nu ? std::sqrt(er / static_cast<double>(nu)) : nan;
  return m;
}

std::vector<RunPrediction> predict(const PerPinnModel& m, const Dataset& ds) {
  std::vector<RunPrediction> out;
  out.reserve(ds.runs.size());
  for (const Run& run : ds.runs) out.push_back(perpinn_predict_run(m, run));
  return out;
}

std::vector<RunPrediction> predict(const PinnModel& m, const Dataset& ds) {
  std::vector<RunPrediction> out;
  out.reserve(ds.runs.size());
  for (const Run& run : ds.runs) out.push_back(pinn_predict_run(m, run));
  return out;
}

EvalMetrics evaluate(const PerPinnModel& m, const Dataset& ds, const std::string& scenario) {
  return compute_metrics(ds, predict(m, ds), scenario, "perpinn");
}

EvalMetrics evaluate(const PinnModel& m, const Dataset& ds, const std::string& scenario) {
  return compute_metrics(ds, predict(m, ds), scenario, "pinn");
}

namespace {

UEstimate u_estimate(const RunPrediction& p, const Run& run) {
  UEstimate u{p.t, p.U_hat, 0.0};
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < run.size(); ++k) {
    if (!std::isfinite(run[k].U_true)) continue;
    const double d = p.U_hat[k] / run[k].U_true - 1.0;
    acc += d * d;
    ++n;
  }
  u.rel_rmse = n ? std::sqrt(acc / static_cast<double>(n)) : std::numeric_limits<double>::quiet_NaN();
  return u;
}

}  // namespace

UEstimate extract_U(const PerPinnModel& m, const Run& run) {
  return u_estimate(perpinn_predict_run(m, run), run);
}

UEstimate extract_U(const PinnModel& m, const Run& run) {
  return u_estimate(pinn_predict_run(m, run), run);
}

bool EnergyCheckReport::pass() const {
  return std::all_of(runs.begin(), runs.end(), [](const EnergyCheckRun& r) { return r.pass; });
}

std::string EnergyCheckReport::to_text() const {
  std::ostringstream os;
  std::size_t failed = 0;
  for (const auto& r : runs) failed += r.pass ? 0 : 1;
  os << "energy consistency (hull tolerance " << tolerance << " K): "
     << (pass() ? "pass" : "FAIL") << ", " << failed << "/" << runs.size() << " runs outside\n";
  char buf[160];
  for (const auto& r : runs) {
    std::snprintf(buf, sizeof buf, "  run %d hull [%.3f, %.3f] max excursion %.4f K %s\n", r.run_id,
                  r.lo, r.hi, r.max_excursion, r.pass ? "ok" : "FAIL");
    os << buf;
  }
  return os.str();
}

EnergyCheckReport energy_consistency_check(const std::vector<RunPrediction>& preds,
                                           const Dataset& scenario, double tolerance) {
  if (preds.size() != scenario.runs.size()) throw std::invalid_argument("prediction/run count mismatch");
  EnergyCheckReport rep;
  rep.tolerance = tolerance;
  for (std::size_t r = 0; r < preds.size(); ++r) {
    const Run& run = scenario.runs[r];
    if (run.empty()) continue;
    EnergyCheckRun c;
    c.run_id = run.front().run_id;
    c.lo = std::min(run.front().T_h_out, run.front().T_c_out);
    c.hi = std::max(run.front().T_h_out, run.front().T_c_out);
    for (const Sample& s : run) {
      c.lo = std::min({c.lo, s.T_h_in, s.T_c_in});
      c.hi = std::max({c.hi, s.T_h_in, s.T_c_in});
    }
    for (const auto* series : {&preds[r].T_h_out, &preds[r].T_c_out}) {
      for (double v : *series) {
        const double out = std::max({0.0, c.lo - v, v - c.hi});
        c.max_excursion = std::max(c.max_excursion, std::isfinite(v) ? out : INFINITY);
      }
    }
    c.pass = c.max_excursion <= tolerance;
    rep.runs.push_back(c);
  }
  return rep;
}

}  // namespace hexid
