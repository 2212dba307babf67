#include "hexid/harness/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <nlohmann/json.hpp>
#include <set>

#include "hexid/dataset.hpp"

namespace hexid::harness {
namespace {

using nlohmann::json;

const char* to_string(NoiseScale s) { return s == NoiseScale::variance ? "variance" : "std_dev"; }
const char* to_string(NoiseMode m) { return m == NoiseMode::measurement ? "measurement" : "process"; }

json train_json(const EstimatorTrainConfig& t) {
  return json{{"epochs", t.epochs},
              {"learning_rate", t.learning_rate},
              {"patience", t.patience},
              {"min_rel_improvement", t.min_rel_improvement},
              {"seed", t.seed}};
}

// Reads keys of one JSON object and rejects any it did not consume.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }
  void done() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError("unknown config key '" + path_ + "." + key + "'");
    }
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError("config key '" + path_ + "." + key + "': " + e.what());
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }
  std::string path(const char* key) const { return path_ + "." + key; }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_train(const json* j, const std::string& path, EstimatorTrainConfig& t) {
  if (!j) return;
  ObjectReader r(*j, path);
  r.get("epochs", t.epochs);
  r.get("learning_rate", t.learning_rate);
  r.get("patience", t.patience);
  r.get("min_rel_improvement", t.min_rel_improvement);
  r.get("seed", t.seed);
  r.done();
}

json to_json_object(const ExperimentConfig& c) {
  const RunConfig& rc = c.sim.run;
  json initial = nullptr;
  if (rc.initial) initial = json{{"T_h_out", rc.initial->T_h_out}, {"T_c_out", rc.initial->T_c_out}};
  return json{
      {"paths",
       {{"data_dir", c.paths.data_dir},
        {"checkpoint_dir", c.paths.checkpoint_dir},
        {"report_dir", c.paths.report_dir}}},
      {"sim",
       {{"runs", c.sim.runs},
        {"seed", c.sim.seed},
        {"duration", rc.duration},
        {"sample_period", rc.sample_period},
        {"noise_level", rc.noise_level},
        {"noise_scale", to_string(rc.noise_scale)},
        {"noise_mode", to_string(rc.noise_mode)},
        {"T_c_sp", rc.T_c_sp},
        {"T_c_in", rc.T_c_in},
        {"initial", initial},
        {"step_h", c.sim.integrator.step_h},
        {"K_p", c.sim.controller.K_p},
        {"lumped",
         {{"alpha_h", c.sim.lumped.alpha_h},
          {"alpha_c", c.sim.lumped.alpha_c},
          {"beta_h", c.sim.lumped.beta_h},
          {"beta_c", c.sim.lumped.beta_c}}},
        {"fouling",
         {{"k_t", c.sim.fouling.k_t},
          {"k_T", c.sim.fouling.k_T},
          {"T_ref", c.sim.fouling.T_ref},
          {"U_floor", c.sim.fouling.U_floor},
          {"U0_min", c.sim.fouling.U0_min},
          {"U0_max", c.sim.fouling.U0_max}}}}},
      {"ident", {{"n_states", c.ident.n_states}, {"rel_tol", c.ident.rel_tol}}},
      {"scenarios",
       {{"ol_hot_inlet", c.scenarios.ol_hot_inlet},
        {"ol_runs", c.scenarios.ol_runs},
        {"overlay_runs", c.scenarios.overlay_runs}}},
      {"perpinn",
       {{"features", hexid::to_string(c.perpinn.features)},
        {"hidden", c.perpinn.hidden},
        {"U_max", c.perpinn.U_max},
        {"step_h", c.perpinn.step_h},
        {"temp_scale_floor", c.perpinn.temp_scale_floor},
        {"train", train_json(c.perpinn.train)}}},
      {"pinn",
       {{"hidden", c.pinn.hidden},
        {"residual_weight", c.pinn.residual_weight},
        {"train", train_json(c.pinn.train)}}},
      {"seeds", c.seeds},
  };
}

}  // namespace

void ExperimentConfig::validate() const {
  try {
    if (sim.runs < 1) throw ConfigError("sim.runs must be >= 1");
    sim.run.validate(sim.integrator);
    sim.controller.validate();
    sim.lumped.validate();
    sim.fouling.validate();
    if (ident.n_states < 1) throw ConfigError("ident.n_states must be >= 1");
    if (!(ident.rel_tol > 0.0)) throw ConfigError("ident.rel_tol must be > 0");
    if (scenarios.ol_runs < 1 || scenarios.ol_runs > sim.runs) {
      throw ConfigError("scenarios.ol_runs must lie in [1, sim.runs]");
    }
    if (scenarios.overlay_runs < 1) throw ConfigError("scenarios.overlay_runs must be >= 1");
    for (const auto* hidden : {&perpinn.hidden, &pinn.hidden}) {
      if (hidden->empty()) throw ConfigError("hidden layer list must be non-empty");
      for (int w : *hidden) {
        if (w < 1) throw ConfigError("hidden widths must be >= 1");
      }
    }
    if (!(perpinn.U_max > 0.0)) throw ConfigError("perpinn.U_max must be > 0");
    IntegratorConfig{perpinn.step_h}.validate(sim.run.sample_period);
    if (!(pinn.residual_weight >= 0.0)) throw ConfigError("pinn.residual_weight must be >= 0");
    for (const auto* t : {&perpinn.train, &pinn.train}) {
      if (t->epochs < 1 || t->patience < 1 || !(t->learning_rate > 0.0) || !(t->min_rel_improvement >= 0.0)) {
        throw ConfigError("train sections need epochs >= 1, patience >= 1, learning_rate > 0");
      }
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

std::string to_json(const ExperimentConfig& cfg) { return to_json_object(cfg).dump(2) + "\n"; }

ExperimentConfig config_from_json(const std::string& text, const std::string& source) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(source + ": " + e.what());
  }
  ExperimentConfig c;
  ObjectReader root(j, "config");
  if (const json* p = root.child("paths")) {
    ObjectReader r(*p, "paths");
    r.get("data_dir", c.paths.data_dir);
    r.get("checkpoint_dir", c.paths.checkpoint_dir);
    r.get("report_dir", c.paths.report_dir);
    r.done();
  }
  if (const json* s = root.child("sim")) {
    ObjectReader r(*s, "sim");
    RunConfig& rc = c.sim.run;
    r.get("runs", c.sim.runs);
    r.get("seed", c.sim.seed);
    r.get("duration", rc.duration);
    r.get("sample_period", rc.sample_period);
    r.get("noise_level", rc.noise_level);
    std::string scale = to_string(rc.noise_scale), mode = to_string(rc.noise_mode);
    r.get("noise_scale", scale);
    r.get("noise_mode", mode);
    if (scale != "variance" && scale != "std_dev") throw ConfigError("sim.noise_scale: variance | std_dev");
    if (mode != "measurement" && mode != "process") throw ConfigError("sim.noise_mode: measurement | process");
    rc.noise_scale = scale == "variance" ? NoiseScale::variance : NoiseScale::std_dev;
    rc.noise_mode = mode == "measurement" ? NoiseMode::measurement : NoiseMode::process;
    r.get("T_c_sp", rc.T_c_sp);
    r.get("T_c_in", rc.T_c_in);
    if (const json* init = r.child("initial"); init && !init->is_null()) {
      ObjectReader ir(*init, "sim.initial");
      HexState hs{0.0, 0.0};
      ir.get("T_h_out", hs.T_h_out);
      ir.get("T_c_out", hs.T_c_out);
      ir.done();
      rc.initial = hs;
    }
    r.get("step_h", c.sim.integrator.step_h);
    r.get("K_p", c.sim.controller.K_p);
    if (const json* l = r.child("lumped")) {
      ObjectReader lr(*l, "sim.lumped");
      lr.get("alpha_h", c.sim.lumped.alpha_h);
      lr.get("alpha_c", c.sim.lumped.alpha_c);
      lr.get("beta_h", c.sim.lumped.beta_h);
      lr.get("beta_c", c.sim.lumped.beta_c);
      lr.done();
    }
    if (const json* f = r.child("fouling")) {
      ObjectReader fr(*f, "sim.fouling");
      fr.get("k_t", c.sim.fouling.k_t);
      fr.get("k_T", c.sim.fouling.k_T);
      fr.get("T_ref", c.sim.fouling.T_ref);
      fr.get("U_floor", c.sim.fouling.U_floor);
      fr.get("U0_min", c.sim.fouling.U0_min);
      fr.get("U0_max", c.sim.fouling.U0_max);
      fr.done();
    }
    r.done();
  }
  if (const json* i = root.child("ident")) {
    ObjectReader r(*i, "ident");
    r.get("n_states", c.ident.n_states);
    r.get("rel_tol", c.ident.rel_tol);
    r.done();
  }
  if (const json* s = root.child("scenarios")) {
    ObjectReader r(*s, "scenarios");
    r.get("ol_hot_inlet", c.scenarios.ol_hot_inlet);
    r.get("ol_runs", c.scenarios.ol_runs);
    r.get("overlay_runs", c.scenarios.overlay_runs);
    r.done();
  }
  if (const json* p = root.child("perpinn")) {
    ObjectReader r(*p, "perpinn");
    std::string features = hexid::to_string(c.perpinn.features);
    r.get("features", features);
    try {
      c.perpinn.features = feature_spec_from_string(features);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    r.get("hidden", c.perpinn.hidden);
    r.get("U_max", c.perpinn.U_max);
    r.get("step_h", c.perpinn.step_h);
    r.get("temp_scale_floor", c.perpinn.temp_scale_floor);
    read_train(r.child("train"), r.path("train"), c.perpinn.train);
    r.done();
  }
  if (const json* p = root.child("pinn")) {
    ObjectReader r(*p, "pinn");
    r.get("hidden", c.pinn.hidden);
    r.get("residual_weight", c.pinn.residual_weight);
    read_train(r.child("train"), r.path("train"), c.pinn.train);
    r.done();
  }
  root.get("seeds", c.seeds);
  root.done();
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    throw ConfigError("cannot read config '" + path + "': " + e.what());
  }
  return config_from_json(text, path);
}

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string s = to_json_object(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string report_dir(const ExperimentConfig& cfg) {
  const char* env = std::getenv("HEXID_REPORT_DIR");
  return env && *env ? std::string(env) : cfg.paths.report_dir;
}

PerPinnConfig perpinn_config(const ExperimentConfig& cfg) {
  PerPinnConfig p;
  p.features = cfg.perpinn.features;
  p.hidden = cfg.perpinn.hidden;
  p.U_max = cfg.perpinn.U_max;
  p.ic.step_h = cfg.perpinn.step_h;
  p.lp = cfg.sim.lumped;
  p.temp_scale_floor = cfg.perpinn.temp_scale_floor;
  p.train.epochs = cfg.perpinn.train.epochs;
  p.train.adam.learning_rate = cfg.perpinn.train.learning_rate;
  p.train.patience = cfg.perpinn.train.patience;
  p.train.min_rel_improvement = cfg.perpinn.train.min_rel_improvement;
  p.train.seed = cfg.perpinn.train.seed;
  return p;
}

PinnConfig pinn_config(const ExperimentConfig& cfg, std::optional<std::uint64_t> seed) {
  PinnConfig p;
  p.hidden = cfg.pinn.hidden;
  p.lp = cfg.sim.lumped;
  p.train.epochs = cfg.pinn.train.epochs;
  p.train.adam.learning_rate = cfg.pinn.train.learning_rate;
  p.train.patience = cfg.pinn.train.patience;
  p.train.min_rel_improvement = cfg.pinn.train.min_rel_improvement;
  p.train.residual_weight = cfg.pinn.residual_weight;
  p.train.seed = seed.value_or(cfg.pinn.train.seed);
  return p;
}

}  // namespace hexid::harness
