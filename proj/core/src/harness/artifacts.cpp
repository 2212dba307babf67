#include "hexid/harness/artifacts.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <limits>
#include <sstream>

#include "hexid/dataset.hpp"
#include "hexid/harness/config.hpp"

namespace hexid::harness {
namespace fs = std::filesystem;
using nlohmann::json;

std::string Provenance::to_json() const {
  json j = {{"command", command}, {"config_hash", config_hash}, {"generator", "hexid 0.1.0"}};
  for (const auto& [k, v] : fields) j[k] = v;
  return j.dump(2) + "\n";
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create directory '" + dir + "': " + ec.message());
}

bool file_exists(const std::string& path) { return fs::exists(path); }

void write_artifact(const std::string& path, const std::string& content, const Provenance& prov) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) ensure_dir(parent.string());
  write_file_atomic(path, content);
  write_file_atomic(path + ".meta.json", prov.to_json());
}

std::map<std::string, std::string> read_provenance(const std::string& path) {
  std::map<std::string, std::string> out;
  if (!file_exists(path + ".meta.json")) return out;
  const json j = json::parse(read_file(path + ".meta.json"));
  for (const auto& [k, v] : j.items()) {
    if (v.is_string()) out[k] = v.get<std::string>();
  }
  return out;
}

namespace {

double parse_double(const std::string& s) {
  if (s == "nan" || s == "-nan") return std::numeric_limits<double>::quiet_NaN();
  std::size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("bad number '" + s + "'");
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::vector<EvalMetrics> read_metrics(const std::string& path) {
  std::vector<EvalMetrics> rows;
  if (!file_exists(path)) return rows;
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1) {
      if (line != kMetricsHeader) throw ParseError(path, lineno, "unexpected metrics header");
      continue;
    }
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 6) throw ParseError(path, lineno, "expected 6 columns");
    try {
      rows.push_back(EvalMetrics{cells[0], cells[1], parse_double(cells[2]), parse_double(cells[3]),
                                 parse_double(cells[4]), parse_double(cells[5])});
    } catch (const std::exception& e) {
      throw ParseError(path, lineno, e.what());
    }
  }
  return rows;
}

void upsert_metrics(const std::string& path, const EvalMetrics& m, const Provenance& prov) {
  std::vector<EvalMetrics> rows = read_metrics(path);
  bool replaced = false;
  for (auto& r : rows) {
    if (r.scenario == m.scenario && r.model == m.model) {
      r = m;
      replaced = true;
    }
  }
  if (!replaced) rows.push_back(m);
  std::string out = std::string(kMetricsHeader) + "\n";
  for (const auto& r : rows) out += to_csv_row(r) + "\n";
  write_artifact(path, out, prov);
}

namespace {

json lumped_json(const LumpedParams& lp) {
  return json{{"alpha_h", lp.alpha_h}, {"alpha_c", lp.alpha_c}, {"beta_h", lp.beta_h}, {"beta_c", lp.beta_c}};
}

LumpedParams lumped_from(const json& j) {
  return LumpedParams{j.at("alpha_h").get<double>(), j.at("alpha_c").get<double>(),
                      j.at("beta_h").get<double>(), j.at("beta_c").get<double>()};
}

void write_net(const std::string& path, const MlpParams& net, const Provenance& prov) {
  std::ostringstream os;
  write_mlp(os, net);
  write_artifact(path, os.str(), prov);
}

MlpParams read_net(const std::string& path) {
  std::istringstream in(read_file(path));
  return read_mlp(in, path);
}

json read_model_json(const std::string& stem, const char* kind) {
  json j;
  try {
    j = json::parse(read_file(stem + ".model.json"));
  } catch (const json::exception& e) {
    throw std::runtime_error(stem + ".model.json: " + e.what());
  }
  if (j.value("kind", "") != kind) {
    throw std::runtime_error(stem + ".model.json is not a " + std::string(kind) + " checkpoint");
  }
  return j;
}

}  // namespace

void save_perpinn(const std::string& stem, const PerPinnModel& m, const Provenance& prov) {
  m.validate();
  write_net(stem + ".mlp", m.net, prov);
  json j = {{"kind", "perpinn"},
            {"features", to_string(m.features)},
            {"U_max", m.U_max},
            {"duration", m.duration},
            {"temp_mean", m.temp_mean},
            {"temp_scale", m.temp_scale},
            {"loss_scale", m.loss_scale},
            {"step_h", m.ic.step_h},
            {"lumped", lumped_json(m.lp)},
            {"config_hash", prov.config_hash}};
  for (const auto& [k, v] : prov.fields) j["meta"][k] = v;
  write_file_atomic(stem + ".model.json", j.dump(2) + "\n");
}

PerPinnModel load_perpinn(const std::string& stem) {
  const json j = read_model_json(stem, "perpinn");
  PerPinnModel m;
  try {
    m.features = feature_spec_from_string(j.at("features").get<std::string>());
    m.U_max = j.at("U_max").get<double>();
    m.duration = j.at("duration").get<double>();
    m.temp_mean = j.at("temp_mean").get<double>();
    m.temp_scale = j.at("temp_scale").get<double>();
    m.loss_scale = j.at("loss_scale").get<double>();
    m.ic.step_h = j.at("step_h").get<double>();
    m.lp = lumped_from(j.at("lumped"));
  } catch (const json::exception& e) {
    throw std::runtime_error(stem + ".model.json: " + e.what());
  }
  m.net = read_net(stem + ".mlp");
  m.validate();
  return m;
}

void save_pinn(const std::string& stem, const PinnModel& m, const Provenance& prov) {
  m.validate();
  write_net(stem + ".mlp", m.net, prov);
  json j = {{"kind", "pinn"},
            {"duration", m.duration},
            {"t_total", m.t_total},
            {"mean_h", m.mean_h},
            {"std_h", m.std_h},
            {"mean_c", m.mean_c},
            {"std_c", m.std_c},
            {"u_scale", m.u_scale},
            {"residual_scale", m.residual_scale},
            {"lumped", lumped_json(m.lp)},
            {"config_hash", prov.config_hash}};
  for (const auto& [k, v] : prov.fields) j["meta"][k] = v;
  write_file_atomic(stem + ".model.json", j.dump(2) + "\n");
}

PinnModel load_pinn(const std::string& stem) {
  const json j = read_model_json(stem, "pinn");
  PinnModel m;
  try {
    m.duration = j.at("duration").get<double>();
    m.t_total = j.at("t_total").get<double>();
    m.mean_h = j.at("mean_h").get<double>();
    m.std_h = j.at("std_h").get<double>();
    m.mean_c = j.at("mean_c").get<double>();
    m.std_c = j.at("std_c").get<double>();
    m.u_scale = j.at("u_scale").get<double>();
    m.residual_scale = j.at("residual_scale").get<double>();
    m.lp = lumped_from(j.at("lumped"));
  } catch (const json::exception& e) {
    throw std::runtime_error(stem + ".model.json: " + e.what());
  }
  m.net = read_net(stem + ".mlp");
  m.validate();
  return m;
}

std::string overlay_csv(const Dataset& ds, const std::vector<RunPrediction>& preds) {
  std::string out = "run_id,t,T_h_out_true,T_c_out_true,U_true,T_h_out_pred,T_c_out_pred,U_pred\n";
  char buf[320];
  for (std::size_t r = 0; r < ds.runs.size(); ++r) {
    for (std::size_t k = 0; k < ds.runs[r].size(); ++k) {
      const Sample& s = ds.runs[r][k];
      std::snprintf(buf, sizeof buf, "%d,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n", s.run_id, s.t,
                    s.T_h_out, s.T_c_out, s.U_true, preds[r].T_h_out[k], preds[r].T_c_out[k],
                    preds[r].U_hat[k]);
      out += buf;
    }
  }
  return out;
}

}  // namespace hexid::harness
