#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hexid/metrics.hpp"
#include "hexid/perpinn.hpp"
#include "hexid/pinn.hpp"

namespace hexid::harness {

/// Sidecar record written next to every artifact as `<path>.meta.json`.
/// Contains no timestamps so reruns reproduce files byte for byte.
struct Provenance {
  std::string command;
  std::string config_hash;
  std::map<std::string, std::string> fields;

  std::string to_json() const;
};

std::string join_path(const std::string& dir, const std::string& name);
void ensure_dir(const std::string& dir);
bool file_exists(const std::string& path);

/// Atomic write of `content` plus the provenance sidecar.
void write_artifact(const std::string& path, const std::string& content, const Provenance& prov);

/// Reads `path.meta.json` and returns its string fields (empty map if absent).
std::map<std::string, std::string> read_provenance(const std::string& path);

/// Replaces the row with the same (scenario, model) or appends one.
void upsert_metrics(const std::string& path, const EvalMetrics& m, const Provenance& prov);
std::vector<EvalMetrics> read_metrics(const std::string& path);

/// `<stem>.mlp` holds the network; `<stem>.model.json` the scaling constants,
/// feature spec, config hash and seed.
void save_perpinn(const std::string& stem, const PerPinnModel& m, const Provenance& prov);
PerPinnModel load_perpinn(const std::string& stem);
void save_pinn(const std::string& stem, const PinnModel& m, const Provenance& prov);
PinnModel load_pinn(const std::string& stem);

/// Per-sample trajectories of one model on one scenario:
/// run_id,t,T_h_out_true,T_c_out_true,U_true,T_h_out_pred,T_c_out_pred,U_pred
std::string overlay_csv(const Dataset& ds, const std::vector<RunPrediction>& preds);

}  // namespace hexid::harness
