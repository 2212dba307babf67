#include "hexid/harness/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "hexid/harness/acceptance.hpp"
#include "hexid/harness/artifacts.hpp"
#include "hexid/harness/report.hpp"
#include "hexid/harness/scenarios.hpp"
#include "hexid/metrics.hpp"

namespace hexid::harness {
namespace {

void check_model(const std::string& model) {
  if (model != "perpinn" && model != "pinn") {
    throw ConfigError("unknown model '" + model + "' (expected perpinn or pinn)");
  }
}

Provenance provenance(const ExperimentConfig& cfg, const std::string& command) {
  return Provenance{command, config_hash(cfg), {}};
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string metrics_path(const ExperimentConfig& cfg) {
  return join_path(report_dir(cfg), "metrics.csv");
}

}  // namespace

std::string checkpoint_stem(const ExperimentConfig& cfg, const std::string& model,
                            std::optional<std::uint64_t> seed) {
  check_model(model);
  std::string name = model;
  if (seed) name += "-seed" + std::to_string(*seed);
  return join_path(cfg.paths.checkpoint_dir, name);
}

int cmd_simulate(const ExperimentConfig& cfg, std::ostream& out) {
  cfg.validate();
  ensure_dir(cfg.paths.data_dir);
  const Dataset cl = closed_loop_dataset(cfg);
  write_dataset(cl, dataset_path(cfg, "closed-loop"));
  out << dataset_path(cfg, "closed-loop") << ": " << cl.runs.size() << " runs, "
      << cl.sample_count() << " rows\n";
  for (const bool switched : {false, true}) {
    const std::string name = switched ? "switch-test" : "ol-test";
    const Dataset ds = open_loop_test_dataset(cfg, switched);
    write_dataset(ds, dataset_path(cfg, name));
    out << dataset_path(cfg, name) << ": " << ds.runs.size() << " runs, " << ds.sample_count()
        << " rows\n";
  }
  return kExitOk;
}

int cmd_ident(const ExperimentConfig& cfg, bool inject_equilibrium, std::ostream& out) {
  cfg.validate();
  std::vector<AugmentedState> states = ident_states(cfg, cfg.ident.n_states);
  if (inject_equilibrium) {
    const AugmentedState& s = states.front();
    states.push_back(AugmentedState{s.T_c_out, s.T_c_out, s.K_p});
  }
  const IdentifiabilityReport rep = identifiability_check(states, cfg.sim.lumped, cfg.ident.rel_tol);
  const std::string dir = report_dir(cfg);
  Provenance prov = provenance(cfg, "ident");
  prov.fields["n_states"] = std::to_string(states.size());
  prov.fields["injected_equilibrium"] = inject_equilibrium ? "true" : "false";
  write_artifact(join_path(dir, "ident.txt"), rep.to_text(), prov);
  write_artifact(join_path(dir, "ident.csv"), rep.to_csv(), prov);
  out << rep.to_text();
  return kExitOk;
}

int cmd_train(const ExperimentConfig& cfg, const std::string& model,
              std::optional<std::uint64_t> seed, std::ostream& out) {
  check_model(model);
  cfg.validate();
  const std::string path = dataset_path(cfg, "closed-loop");
  if (!file_exists(path)) {
    throw std::runtime_error("dataset '" + path + "' not found; run `hexid simulate` first");
  }
  const Dataset ds = read_dataset(path);
  const Dataset val = split_part(ds, true);
  const std::string stem = checkpoint_stem(cfg, model, seed);
  ensure_dir(cfg.paths.checkpoint_dir);

  Provenance prov = provenance(cfg, "train " + model);
  LossHistory history;
  EvalMetrics m;
  if (model == "perpinn") {
    PerPinnConfig pc = perpinn_config(cfg);
    if (seed) pc.train.seed = *seed;
    prov.fields["seed"] = std::to_string(pc.train.seed);
    PerPinnResult r = train_perpinn(ds, pc);
    history = std::move(r.history);
    m = evaluate(r.model, val, "cl-val");
    save_perpinn(stem, r.model, prov);
  } else {
    const PinnConfig pc = pinn_config(cfg, seed);
    prov.fields["seed"] = std::to_string(pc.train.seed);
    PinnResult r = train_pinn(ds, pc);
    history = std::move(r.history);
    m = evaluate(r.model, val, "cl-val");
    save_pinn(stem, r.model, prov);
  }
  const std::string name = stem.substr(stem.find_last_of("/\\") + 1);
  write_artifact(join_path(report_dir(cfg), "history_" + name + ".csv"), history.to_csv(), prov);
  const LossRecord& best = history.records.at(static_cast<std::size_t>(history.best_epoch));
  out << "checkpoint " << stem << " (seed " << prov.fields["seed"] << ")\n"
      << "epochs run " << history.records.size() << ", best epoch " << history.best_epoch
      << ", best val loss " << fmt("%.6g", best.val_loss)
      << (history.stopped_early ? ", stopped early" : "") << "\n"
      << "cl-val mse_T " << fmt("%.6g", m.mse_T()) << " K^2, U rel RMSE "
      << fmt("%.4g", m.rel_rmse_U) << "\n";
  return kExitOk;
}

int cmd_eval(const ExperimentConfig& cfg, const std::string& model, const std::string& scenario,
             const std::optional<std::string>& checkpoint, std::ostream& out) {
  check_model(model);
  if (!is_scenario(scenario)) throw ConfigError("unknown scenario '" + scenario + "'");
  cfg.validate();
  const std::string stem = checkpoint.value_or(checkpoint_stem(cfg, model));
  if (!file_exists(stem + ".model.json")) {
    throw std::runtime_error("checkpoint '" + stem + "' not found; run `hexid train " + model + "` first");
  }
  const Dataset ds = load_scenario(cfg, scenario);
  std::vector<RunPrediction> preds;
  if (model == "perpinn") {
    preds = predict(load_perpinn(stem), ds);
  } else {
    preds = predict(load_pinn(stem), ds);
  }
  const EvalMetrics m = compute_metrics(ds, preds, scenario, model);

  Provenance prov = provenance(cfg, "eval " + model + " " + scenario);
  const auto ck = read_provenance(stem + ".mlp");
  if (ck.count("seed")) prov.fields["seed"] = ck.at("seed");
  prov.fields["checkpoint"] = stem;
  const std::string dir = report_dir(cfg);
  upsert_metrics(metrics_path(cfg), m, provenance(cfg, "eval"));
  write_artifact(join_path(dir, "overlay_" + scenario + "_" + model + ".csv"), overlay_csv(ds, preds), prov);
  out << kMetricsHeader << "\n" << to_csv_row(m) << "\n";

  if (scenario == "switch-test") {
    const EnergyCheckReport ec = energy_consistency_check(preds, ds);
    write_artifact(join_path(dir, "energy_" + model + ".txt"), ec.to_text(), prov);
    out << "energy consistency (" << model << "): " << (ec.pass() ? "pass" : "FAIL") << "\n";
  }
  return kExitOk;
}

int cmd_report(const ExperimentConfig& cfg, std::ostream& out) {
  cfg.validate();
  const std::string dir = report_dir(cfg);
  const std::vector<EvalMetrics> rows = read_metrics(metrics_path(cfg));
  if (rows.empty()) {
    throw std::runtime_error("no metrics in '" + metrics_path(cfg) + "'; run `hexid eval` first");
  }
  const Provenance prov = provenance(cfg, "report");

  ReportInputs in;
  in.config_hash = config_hash(cfg);
  in.seeds = cfg.seeds;
  in.metrics = rows;
  if (file_exists(join_path(dir, "ident.txt"))) in.ident_text = read_file(join_path(dir, "ident.txt"));
  for (const char* model : {"perpinn", "pinn"}) {
    const std::string p = join_path(dir, std::string("energy_") + model + ".txt");
    if (file_exists(p)) in.energy_text[model] = read_file(p);
  }

  const std::string pp = checkpoint_stem(cfg, "perpinn"), pn = checkpoint_stem(cfg, "pinn");
  if (!file_exists(pp + ".model.json") || !file_exists(pn + ".model.json")) {
    throw std::runtime_error("report needs both default checkpoints ('" + pp + "', '" + pn + "')");
  }
  const Dataset val = load_scenario(cfg, "cl-val");
  const int n_overlay = std::min<int>(cfg.scenarios.overlay_runs, static_cast<int>(val.runs.size()));
  std::vector<int> ids;
  for (int r = 0; r < n_overlay; ++r) ids.push_back(r);
  const Dataset shown = val.subset(ids);
  const OverlayData ov = build_overlay(shown, predict(load_perpinn(pp), shown), predict(load_pinn(pn), shown));

  write_artifact(join_path(dir, "u_overlay.csv"), u_overlay_csv(ov), prov);
  write_artifact(join_path(dir, "t_overlay.csv"), t_overlay_csv(ov), prov);
  write_artifact(join_path(dir, "u_overlay.svg"), u_overlay_svg(ov), prov);
  write_artifact(join_path(dir, "t_overlay.svg"), t_overlay_svg(ov), prov);
  const std::string md = summary_markdown(in);
  write_artifact(join_path(dir, "summary.md"), md, prov);
  out << md;
  return kExitOk;
}

int cmd_seed_study(const ExperimentConfig& cfg, const std::vector<std::uint64_t>& seeds,
                   bool include_perpinn, std::ostream& out) {
  cfg.validate();
  if (seeds.size() < 2) throw ConfigError("seed study needs at least two seeds");
  const std::string path = dataset_path(cfg, "closed-loop");
  if (!file_exists(path)) {
    throw std::runtime_error("dataset '" + path + "' not found; run `hexid simulate` first");
  }
  const Dataset ds = read_dataset(path);
  const Dataset val = split_part(ds, true);

  std::vector<SeedRow> rows;
  for (const std::uint64_t seed : seeds) {
    const PinnResult r = train_pinn(ds, pinn_config(cfg, seed));
    const EvalMetrics m = evaluate(r.model, val, "cl-val");
    rows.push_back(SeedRow{"pinn", seed, m.rel_rmse_U, m.mse_T()});
    out << "pinn seed " << seed << ": U rel RMSE " << fmt("%.4g", m.rel_rmse_U) << ", mse_T "
        << fmt("%.4g", m.mse_T()) << "\n";
    if (include_perpinn) {
      PerPinnConfig pc = perpinn_config(cfg);
      pc.train.seed = seed;
      const PerPinnResult p = train_perpinn(ds, pc);
      const EvalMetrics pm = evaluate(p.model, val, "cl-val");
      rows.push_back(SeedRow{"perpinn", seed, pm.rel_rmse_U, pm.mse_T()});
      out << "perpinn seed " << seed << ": U rel RMSE " << fmt("%.4g", pm.rel_rmse_U) << ", mse_T "
          << fmt("%.4g", pm.mse_T()) << "\n";
    }
  }
  Provenance prov = provenance(cfg, "seed-study");
  std::string list;
  for (const std::uint64_t s : seeds) list += (list.empty() ? "" : " ") + std::to_string(s);
  prov.fields["seeds"] = list;
  const std::string csv = seed_study_csv(rows);
  write_artifact(join_path(report_dir(cfg), "seed_study.csv"), csv, prov);
  out << seed_spread_text(rows);
  return kExitOk;
}

int cmd_accept(const ExperimentConfig& cfg, const std::vector<int>& only, std::ostream& out) {
  cfg.validate();
  const std::vector<CriterionResult> results = run_acceptance(cfg, only, out);
  const bool ok = std::all_of(results.begin(), results.end(), [](const auto& r) { return r.pass; });
  out << (ok ? "ALL PASS" : "SOME CRITERIA FAILED") << " (" << results.size() << " run)\n";
  return ok ? kExitOk : kExitFailure;
}

}  // namespace hexid::harness
