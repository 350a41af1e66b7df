#include "ptgen/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ptgen/errors.hpp"

namespace ptgen {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw UsageError("config: " + (path.empty() ? what : path + ": " + what));
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void check_keys(const json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(path, "expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& item : j.items()) {
    if (!ok.count(item.key())) fail(join(path, item.key()), "unknown config key");
  }
}

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

int get_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

std::uint64_t get_u64(const json& j, const std::string& path) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
    fail(path, "expected a non-negative integer");
  return j.get<std::uint64_t>();
}

bool get_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "expected a boolean");
  return j.get<bool>();
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

std::vector<int> get_int_list(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of integers");
  std::vector<int> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(get_int(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

void parse_idm(const json& j, const std::string& path, IdmParams& p) {
  check_keys(j, path, {"a_max", "b", "v0", "g_jam", "t_headway", "delta"});
  if (j.contains("a_max")) p.a_max = get_number(j["a_max"], join(path, "a_max"));
  if (j.contains("b")) p.b = get_number(j["b"], join(path, "b"));
  if (j.contains("v0")) p.v0 = get_number(j["v0"], join(path, "v0"));
  if (j.contains("g_jam")) p.g_jam = get_number(j["g_jam"], join(path, "g_jam"));
  if (j.contains("t_headway")) p.t_headway = get_number(j["t_headway"], join(path, "t_headway"));
  if (j.contains("delta")) p.delta = get_number(j["delta"], join(path, "delta"));
}

void parse_data(const json& j, DataConfig& d) {
  const std::string path = "data";
  check_keys(j, path,
             {"dataset", "train_dataset", "eval_dataset", "csv", "units", "min_vehicles",
              "min_duration", "lanes", "dt", "eval_fraction", "eval_lanes"});
  if (j.contains("dataset")) d.dataset = get_string(j["dataset"], join(path, "dataset"));
  if (j.contains("train_dataset"))
    d.train_dataset = get_string(j["train_dataset"], join(path, "train_dataset"));
  if (j.contains("eval_dataset"))
    d.eval_dataset = get_string(j["eval_dataset"], join(path, "eval_dataset"));
  if (j.contains("csv")) d.csv = get_string(j["csv"], join(path, "csv"));
  if (j.contains("units")) {
    const std::string u = get_string(j["units"], join(path, "units"));
    if (u == "meters")
      d.units = Unit::Meters;
    else if (u == "feet")
      d.units = Unit::Feet;
    else
      fail(join(path, "units"), "expected \"meters\" or \"feet\"");
  }
  if (j.contains("min_vehicles"))
    d.min_vehicles = get_int(j["min_vehicles"], join(path, "min_vehicles"));
  if (j.contains("min_duration"))
    d.min_duration = get_number(j["min_duration"], join(path, "min_duration"));
  if (j.contains("lanes")) d.lanes = get_int_list(j["lanes"], join(path, "lanes"));
  if (j.contains("dt")) d.dt = get_number(j["dt"], join(path, "dt"));
  if (j.contains("eval_fraction"))
    d.eval_fraction = get_number(j["eval_fraction"], join(path, "eval_fraction"));
  if (j.contains("eval_lanes"))
    d.eval_lanes = get_int_list(j["eval_lanes"], join(path, "eval_lanes"));
}

void parse_model(const json& j, ModelConfig& m) {
  const std::string path = "model";
  check_keys(j, path, {"kind", "layers", "file", "idm"});
  if (j.contains("kind")) {
    m.kind = get_string(j["kind"], join(path, "kind"));
    if (m.kind != "lstm" && m.kind != "idm")
      fail(join(path, "kind"), "expected \"lstm\" or \"idm\"");
  }
  if (j.contains("layers")) {
    m.layers = get_int_list(j["layers"], join(path, "layers"));
    if (m.layers.empty()) fail(join(path, "layers"), "expected at least one layer size");
    for (int n : m.layers)
      if (n < 1) fail(join(path, "layers"), "layer sizes must be positive");
  }
  if (j.contains("file")) m.file = get_string(j["file"], join(path, "file"));
  if (j.contains("idm")) parse_idm(j["idm"], join(path, "idm"), m.idm);
}

// Published parameter choices per family; w/c only apply to the decaying
// families, the constant ones ignore them.
void apply_family_defaults(DecaySchedule& s) {
  switch (s.family) {
    case DecayFamily::Linear:
      s.w = -2.0 / static_cast<double>(s.epoch_max);
      s.c = 1.0;
      break;
    case DecayFamily::Exponential:
      s.w = 0.9;
      s.c = 0.0;
      break;
    case DecayFamily::InverseSigmoid:
      s.w = 0.25;
      s.c = static_cast<double>(s.epoch_max) / 4.0;
      break;
    case DecayFamily::AlwaysActual:
    case DecayFamily::AlwaysGenerated:
      s.w = 0.0;
      s.c = 0.0;
      break;
  }
}

void parse_schedule(const json& j, const std::string& path, int epochs, DecaySchedule& s) {
  check_keys(j, path, {"family", "w", "c", "epoch_max"});
  if (j.contains("family")) {
    try {
      s.family = decay_family_from_name(get_string(j["family"], join(path, "family")));
    } catch (const UsageError& e) {
      fail(join(path, "family"), e.what());
    }
  }
  s.epoch_max = j.contains("epoch_max") ? get_int(j["epoch_max"], join(path, "epoch_max"))
                                        : epochs;
  apply_family_defaults(s);
  if (j.contains("w")) s.w = get_number(j["w"], join(path, "w"));
  if (j.contains("c")) s.c = get_number(j["c"], join(path, "c"));
}

void parse_train(const json& j, TrainSection& t) {
  const std::string path = "train";
  check_keys(j, path,
             {"mode", "epochs", "alpha", "optimizer", "batch_size", "schedule", "checkpoint",
              "resume", "sweep"});
  if (j.contains("mode")) {
    t.mode = get_string(j["mode"], join(path, "mode"));
    if (t.mode != "pair" && t.mode != "platoon")
      fail(join(path, "mode"), "expected \"pair\" or \"platoon\"");
  }
  if (j.contains("epochs")) t.epochs = get_int(j["epochs"], join(path, "epochs"));
  if (j.contains("alpha")) t.alpha = get_number(j["alpha"], join(path, "alpha"));
  if (j.contains("optimizer")) {
    t.optimizer = get_string(j["optimizer"], join(path, "optimizer"));
    if (t.optimizer != "adam" && t.optimizer != "sgd")
      fail(join(path, "optimizer"), "expected \"adam\" or \"sgd\"");
  }
  if (j.contains("batch_size")) t.batch_size = get_int(j["batch_size"], join(path, "batch_size"));
  t.schedule.epoch_max = t.epochs;
  apply_family_defaults(t.schedule);
  if (j.contains("schedule")) parse_schedule(j["schedule"], join(path, "schedule"), t.epochs, t.schedule);
  if (j.contains("checkpoint")) t.checkpoint = get_string(j["checkpoint"], join(path, "checkpoint"));
  if (j.contains("resume")) t.resume = get_bool(j["resume"], join(path, "resume"));
  if (j.contains("sweep")) {
    if (!j["sweep"].is_array()) fail(join(path, "sweep"), "expected an array of family names");
    for (std::size_t i = 0; i < j["sweep"].size(); ++i) {
      const std::string p = join(path, "sweep") + "[" + std::to_string(i) + "]";
      const std::string name = get_string(j["sweep"][i], p);
      try {
        decay_family_from_name(name);
      } catch (const UsageError& e) {
        fail(p, e.what());
      }
      t.sweep.push_back(name);
    }
  }
}

void parse_profile(const json& j, const std::string& path, std::vector<ProfileSegment>& out) {
  if (!j.is_array()) fail(path, "expected an array of segments");
  if (j.empty()) fail(path, "expected at least one segment");
  out.clear();
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    check_keys(j[i], p, {"kind", "duration", "v0", "v1", "amplitude", "period"});
    ProfileSegment seg;
    if (j[i].contains("kind")) {
      const std::string k = get_string(j[i]["kind"], join(p, "kind"));
      if (k == "hold")
        seg.kind = ProfileSegment::Kind::Hold;
      else if (k == "ramp")
        seg.kind = ProfileSegment::Kind::Ramp;
      else if (k == "oscillation")
        seg.kind = ProfileSegment::Kind::Oscillation;
      else
        fail(join(p, "kind"), "expected \"hold\", \"ramp\" or \"oscillation\"");
    }
    if (j[i].contains("duration")) seg.duration = get_number(j[i]["duration"], join(p, "duration"));
    if (j[i].contains("v0")) seg.v0 = get_number(j[i]["v0"], join(p, "v0"));
    seg.v1 = seg.v0;
    if (j[i].contains("v1")) seg.v1 = get_number(j[i]["v1"], join(p, "v1"));
    if (j[i].contains("amplitude"))
      seg.amplitude = get_number(j[i]["amplitude"], join(p, "amplitude"));
    if (j[i].contains("period")) seg.period = get_number(j[i]["period"], join(p, "period"));
    out.push_back(seg);
  }
}

void parse_synth(const json& j, SynthConfig& s) {
  const std::string path = "synth";
  check_keys(j, path,
             {"count", "platoon_size", "duration", "dt", "param_jitter", "noise_std",
              "randomize_phase", "profile", "idm"});
  if (j.contains("count")) s.count = get_int(j["count"], join(path, "count"));
  if (j.contains("platoon_size"))
    s.platoon_size = get_int(j["platoon_size"], join(path, "platoon_size"));
  if (j.contains("duration")) s.duration = get_number(j["duration"], join(path, "duration"));
  if (j.contains("dt")) s.dt = get_number(j["dt"], join(path, "dt"));
  if (j.contains("param_jitter"))
    s.param_jitter = get_number(j["param_jitter"], join(path, "param_jitter"));
  if (j.contains("noise_std")) s.noise_std = get_number(j["noise_std"], join(path, "noise_std"));
  if (j.contains("randomize_phase"))
    s.randomize_phase = get_bool(j["randomize_phase"], join(path, "randomize_phase"));
  if (j.contains("profile")) parse_profile(j["profile"], join(path, "profile"), s.profile);
  if (j.contains("idm")) parse_idm(j["idm"], join(path, "idm"), s.idm);
}

void parse_gradcheck(const json& j, GradCheckOptions& g) {
  const std::string path = "gradcheck";
  check_keys(j, path,
             {"layers", "steps", "trials", "fd_step", "tolerance", "perturb_index",
              "perturb_amount"});
  if (j.contains("layers")) {
    g.layer_sizes = get_int_list(j["layers"], join(path, "layers"));
    if (g.layer_sizes.empty()) fail(join(path, "layers"), "expected at least one layer size");
  }
  if (j.contains("steps")) g.steps = get_int(j["steps"], join(path, "steps"));
  if (j.contains("trials")) g.trials = get_int(j["trials"], join(path, "trials"));
  if (j.contains("fd_step")) g.fd_step = get_number(j["fd_step"], join(path, "fd_step"));
  if (j.contains("tolerance")) g.tolerance = get_number(j["tolerance"], join(path, "tolerance"));
  if (j.contains("perturb_index"))
    g.perturb_index = get_int(j["perturb_index"], join(path, "perturb_index"));
  if (j.contains("perturb_amount"))
    g.perturb_amount = get_number(j["perturb_amount"], join(path, "perturb_amount"));
}

json idm_to_json(const IdmParams& p) {
  return json{{"a_max", p.a_max}, {"b", p.b},         {"v0", p.v0},
              {"g_jam", p.g_jam}, {"t_headway", p.t_headway}, {"delta", p.delta}};
}

json profile_to_json(const std::vector<ProfileSegment>& profile) {
  json arr = json::array();
  for (const auto& seg : profile) {
    const char* kind = seg.kind == ProfileSegment::Kind::Hold          ? "hold"
                       : seg.kind == ProfileSegment::Kind::Ramp        ? "ramp"
                                                                       : "oscillation";
    arr.push_back(json{{"kind", kind},
                       {"duration", seg.duration},
                       {"v0", seg.v0},
                       {"v1", seg.v1},
                       {"amplitude", seg.amplitude},
                       {"period", seg.period}});
  }
  return arr;
}

}  // namespace

DecaySchedule schedule_for_family(DecayFamily family, int epoch_max) {
  DecaySchedule s;
  s.family = family;
  s.epoch_max = epoch_max;
  apply_family_defaults(s);
  return s;
}

RunConfig default_run_config() {
  RunConfig cfg;
  cfg.train.schedule.epoch_max = cfg.train.epochs;
  apply_family_defaults(cfg.train.schedule);
  ProfileSegment seg;
  seg.kind = ProfileSegment::Kind::Oscillation;
  seg.duration = cfg.synth.duration;
  seg.v0 = 15.0;
  seg.v1 = 15.0;
  seg.amplitude = 5.0;
  seg.period = 30.0;
  cfg.synth.profile.push_back(seg);
  return cfg;
}

RunConfig parse_run_config(const std::string& json_text, const std::string& origin) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw UsageError("config " + origin + ": " + e.what());
  }
  check_keys(j, "", {"seed", "data", "model", "train", "eval", "synth", "gradcheck"});
  RunConfig cfg = default_run_config();
  if (j.contains("seed")) cfg.seed = get_u64(j["seed"], "seed");
  if (j.contains("train")) parse_train(j["train"], cfg.train);
  if (j.contains("data")) parse_data(j["data"], cfg.data);
  if (j.contains("model")) parse_model(j["model"], cfg.model);
  if (j.contains("eval")) {
    check_keys(j["eval"], "eval", {"generated"});
    if (j["eval"].contains("generated"))
      cfg.eval.generated = get_string(j["eval"]["generated"], "eval.generated");
  }
  if (j.contains("synth")) parse_synth(j["synth"], cfg.synth);
  if (j.contains("gradcheck")) parse_gradcheck(j["gradcheck"], cfg.gradcheck);
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str(), path);
}

std::string dump_run_config(const RunConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["data"] = json{{"dataset", cfg.data.dataset},
                   {"train_dataset", cfg.data.train_dataset},
                   {"eval_dataset", cfg.data.eval_dataset},
                   {"csv", cfg.data.csv},
                   {"units", cfg.data.units == Unit::Feet ? "feet" : "meters"},
                   {"min_vehicles", cfg.data.min_vehicles},
                   {"min_duration", cfg.data.min_duration},
                   {"lanes", cfg.data.lanes},
                   {"dt", cfg.data.dt},
                   {"eval_fraction", cfg.data.eval_fraction},
                   {"eval_lanes", cfg.data.eval_lanes}};
  j["model"] = json{{"kind", cfg.model.kind},
                    {"layers", cfg.model.layers},
                    {"file", cfg.model.file},
                    {"idm", idm_to_json(cfg.model.idm)}};
  j["train"] = json{{"mode", cfg.train.mode},
                    {"epochs", cfg.train.epochs},
                    {"alpha", cfg.train.alpha},
                    {"optimizer", cfg.train.optimizer},
                    {"batch_size", cfg.train.batch_size},
                    {"schedule", json{{"family", decay_family_name(cfg.train.schedule.family)},
                                      {"w", cfg.train.schedule.w},
                                      {"c", cfg.train.schedule.c},
                                      {"epoch_max", cfg.train.schedule.epoch_max}}},
                    {"checkpoint", cfg.train.checkpoint},
                    {"resume", cfg.train.resume},
                    {"sweep", cfg.train.sweep}};
  j["eval"] = json{{"generated", cfg.eval.generated}};
  j["synth"] = json{{"count", cfg.synth.count},
                    {"platoon_size", cfg.synth.platoon_size},
                    {"duration", cfg.synth.duration},
                    {"dt", cfg.synth.dt},
                    {"param_jitter", cfg.synth.param_jitter},
                    {"noise_std", cfg.synth.noise_std},
                    {"randomize_phase", cfg.synth.randomize_phase},
                    {"profile", profile_to_json(cfg.synth.profile)},
                    {"idm", idm_to_json(cfg.synth.idm)}};
  j["gradcheck"] = json{{"layers", cfg.gradcheck.layer_sizes},
                        {"steps", cfg.gradcheck.steps},
                        {"trials", cfg.gradcheck.trials},
                        {"fd_step", cfg.gradcheck.fd_step},
                        {"tolerance", cfg.gradcheck.tolerance},
                        {"perturb_index", cfg.gradcheck.perturb_index},
                        {"perturb_amount", cfg.gradcheck.perturb_amount}};
  return j.dump(2) + "\n";
}

}  // namespace ptgen
