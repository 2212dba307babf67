#include "hexid/harness/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "hexid/harness/svg.hpp"

namespace hexid::harness {
namespace {

std::string num(double v, const char* f = "%.4g") {
  if (!std::isfinite(v)) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

const EvalMetrics* find(const std::vector<EvalMetrics>& rows, const std::string& scenario,
                        const std::string& model) {
  for (const auto& r : rows) {
    if (r.scenario == scenario && r.model == model) return &r;
  }
  return nullptr;
}

double mse_t(const EvalMetrics* m) {
  return m ? m->mse_T() : std::numeric_limits<double>::quiet_NaN();
}

double rel_u(const EvalMetrics* m) {
  return m ? m->rel_rmse_U : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

std::string summary_markdown(const ReportInputs& in) {
  const auto& rows = in.metrics;
  std::string s = "# hexid report\n\n";
  s += "- config hash: `" + in.config_hash + "`\n- seeds:";
  for (const auto seed : in.seeds) s += " " + std::to_string(seed);
  s += "\n\n## Errors\n\nTemperature MSE is the mean of the T_h_out and T_c_out MSEs in K^2. "
       "U error is the RMS of the per-sample relative error (U_hat - U_true) / U_true.\n\n";
  s += "| scenario | Per-PINN T MSE | PINN T MSE | Per-PINN U rel | PINN U rel |\n";
  s += "|---|---|---|---|---|\n";
  const std::pair<const char*, const char*> labels[] = {{"cl-train", "training (closed loop)"},
                                                        {"cl-val", "validation (closed loop)"},
                                                        {"ol-test", "test (open loop)"},
                                                        {"switch-test", "test (streams switched)"}};
  for (const auto& [sc, label] : labels) {
    const EvalMetrics* p = find(rows, sc, "perpinn");
    const EvalMetrics* n = find(rows, sc, "pinn");
    s += std::string("| ") + label + " | " + num(mse_t(p)) + " | " + num(mse_t(n)) + " | " +
         num(rel_u(p)) + " | " + num(rel_u(n)) + " |\n";
  }

  s += "\n## Experiments\n\n";
  {
    const EvalMetrics* p = find(rows, "cl-val", "perpinn");
    const EvalMetrics* n = find(rows, "cl-val", "pinn");
    s += "- closed-loop validation: Per-PINN " + num(mse_t(p)) + " K^2, PINN " + num(mse_t(n)) + " K^2\n";
  }
  {
    const double p = mse_t(find(rows, "ol-test", "perpinn"));
    const double n = mse_t(find(rows, "ol-test", "pinn"));
    std::string verdict = "missing rows";
    if (std::isfinite(p) && std::isfinite(n)) verdict = p < n ? "Per-PINN better" : "Per-PINN NOT better";
    s += "- open-loop test: " + verdict + " (" + num(p) + " vs " + num(n) + " K^2)\n";
  }
  {
    const double p = mse_t(find(rows, "switch-test", "perpinn"));
    const double n = mse_t(find(rows, "switch-test", "pinn"));
    if (std::isfinite(p) && std::isfinite(n)) {
      const double ratio = n / p;
      s += "- stream switch: PINN / Per-PINN = " + num(ratio) + " (required > " +
           num(kSwitchRatioThreshold) + "): " + (ratio > kSwitchRatioThreshold ? "PASS" : "FAIL") + "\n";
    } else {
      s += "- stream switch: missing rows\n";
    }
  }
  if (!in.energy_text.empty()) {
    s += "\n## Energy consistency (stream switch)\n";
    for (const auto& [model, text] : in.energy_text) s += "\n### " + model + "\n\n```\n" + text + "```\n";
  }
  if (!in.ident_text.empty()) s += "\n## Identifiability\n\n```\n" + in.ident_text + "```\n";
  s += "\n## Plots\n\n- u_overlay.svg / u_overlay.csv\n- t_overlay.svg / t_overlay.csv\n";
  return s;
}

OverlayData build_overlay(const Dataset& ds, const std::vector<RunPrediction>& perpinn,
                          const std::vector<RunPrediction>& pinn) {
  if (perpinn.size() != ds.runs.size() || pinn.size() != ds.runs.size()) {
    throw std::invalid_argument("build_overlay: prediction count does not match runs");
  }
  OverlayData ov;
  double offset = 0.0;
  for (std::size_t r = 0; r < ds.runs.size(); ++r) {
    const Run& run = ds.runs[r];
    if (perpinn[r].t.size() != run.size() || pinn[r].t.size() != run.size()) {
      throw std::invalid_argument("build_overlay: horizon mismatch in run " + std::to_string(r));
    }
    for (std::size_t k = 0; k < run.size(); ++k) {
      ov.run_id.push_back(run[k].run_id);
      ov.t.push_back(offset + run[k].t);
      ov.U_true.push_back(run[k].U_true);
      ov.U_perpinn.push_back(perpinn[r].U_hat[k]);
      ov.U_pinn.push_back(pinn[r].U_hat[k]);
      ov.Th_true.push_back(run[k].T_h_out);
      ov.Th_perpinn.push_back(perpinn[r].T_h_out[k]);
      ov.Th_pinn.push_back(pinn[r].T_h_out[k]);
      ov.Tc_true.push_back(run[k].T_c_out);
      ov.Tc_perpinn.push_back(perpinn[r].T_c_out[k]);
      ov.Tc_pinn.push_back(pinn[r].T_c_out[k]);
    }
    if (!run.empty()) offset += run.back().t + (run.size() > 1 ? run[1].t - run[0].t : 0.0);
  }
  return ov;
}

std::string u_overlay_csv(const OverlayData& ov) {
  std::string out = "t,U_true,U_perpinn,U_pinn,run_id\n";
  char buf[160];
  for (std::size_t i = 0; i < ov.t.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g,%.10g,%d\n", ov.t[i], ov.U_true[i],
                  ov.U_perpinn[i], ov.U_pinn[i], ov.run_id[i]);
    out += buf;
  }
  return out;
}

std::string t_overlay_csv(const OverlayData& ov) {
  std::string out =
      "t,T_h_out_true,T_h_out_perpinn,T_h_out_pinn,T_c_out_true,T_c_out_perpinn,T_c_out_pinn,run_id\n";
  char buf[256];
  for (std::size_t i = 0; i < ov.t.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%d\n", ov.t[i],
                  ov.Th_true[i], ov.Th_perpinn[i], ov.Th_pinn[i], ov.Tc_true[i], ov.Tc_perpinn[i],
                  ov.Tc_pinn[i], ov.run_id[i]);
    out += buf;
  }
  return out;
}

std::string u_overlay_svg(const OverlayData& ov) {
  return line_plot_svg("Heat transfer coefficient, consecutive validation runs", "time (s)",
                       "U (W/(m^2 K))",
                       {{"true", ov.t, ov.U_true, "#000000", false},
                        {"Per-PINN", ov.t, ov.U_perpinn, "#d62728", true},
                        {"PINN", ov.t, ov.U_pinn, "#1f77b4", true}});
}

std::string t_overlay_svg(const OverlayData& ov) {
  return line_plot_svg("Outlet temperatures, consecutive validation runs", "time (s)", "T (K)",
                       {{"T_h_out true", ov.t, ov.Th_true, "#000000", false},
                        {"T_h_out Per-PINN", ov.t, ov.Th_perpinn, "#d62728", true},
                        {"T_h_out PINN", ov.t, ov.Th_pinn, "#1f77b4", true},
                        {"T_c_out true", ov.t, ov.Tc_true, "#7f7f7f", false},
                        {"T_c_out Per-PINN", ov.t, ov.Tc_perpinn, "#ff9896", true},
                        {"T_c_out PINN", ov.t, ov.Tc_pinn, "#aec7e8", true}});
}

std::string seed_study_csv(const std::vector<SeedRow>& rows) {
  std::string out = "model,seed,rel_rmse_U,mse_T\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%llu,%.10g,%.10g\n", r.model.c_str(),
                  static_cast<unsigned long long>(r.seed), r.rel_rmse_U, r.mse_T);
    out += buf;
  }
  return out;
}

std::string seed_spread_text(const std::vector<SeedRow>& rows) {
  std::string out;
  for (const char* model : {"pinn", "perpinn"}) {
    std::vector<double> v;
    for (const auto& r : rows) {
      if (r.model == model) v.push_back(r.rel_rmse_U);
    }
    if (v.empty()) continue;
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    const double sd = v.size() > 1 ? std::sqrt(var / static_cast<double>(v.size() - 1)) : 0.0;
    out += std::string(model) + " U rel RMSE over " + std::to_string(v.size()) + " seeds: min " +
           num(*lo) + ", max " + num(*hi) + ", spread " + num(*hi - *lo) + ", std " + num(sd) + "\n";
  }
  return out;
}

}  // namespace hexid::harness
