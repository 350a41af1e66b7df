#include "ptgen/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <tuple>

#include <nlohmann/json.hpp>

#include "ptgen/errors.hpp"
#include "ptgen/eval.hpp"
#include "ptgen/log.hpp"
#include "ptgen/model_io.hpp"
#include "ptgen/network.hpp"
#include "ptgen/rng.hpp"

namespace ptgen {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << text;
  if (!out) throw IoError("write failed: " + path);
}

// Fixed round-trippable formatting so reruns diff clean.
std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

void write_resolved(const RunConfig& cfg, const std::string& out_dir) {
  write_text(out_dir + "/resolved_config.json", dump_run_config(cfg));
}

void save_split_outputs(const RunConfig& cfg, const std::string& out_dir, const Dataset& full) {
  Dataset train, eval;
  if (!cfg.data.eval_lanes.empty())
    std::tie(train, eval) = split_by_lane(full, cfg.data.eval_lanes);
  else
    std::tie(train, eval) = split(full, cfg.data.eval_fraction, cfg.seed);
  save_dataset(out_dir + "/train.json", train);
  save_dataset(out_dir + "/eval.json", eval);

  json manifest;
  manifest["source"] = full.meta.source;
  manifest["dt"] = full.meta.dt;
  manifest["platoons"] = full.platoons.size();
  manifest["train_platoons"] = train.platoons.size();
  manifest["eval_platoons"] = eval.platoons.size();
  if (!full.platoons.empty()) {
    auto lo = full.platoons.front().size(), hi = lo;
    for (const auto& p : full.platoons) {
      lo = std::min(lo, p.size());
      hi = std::max(hi, p.size());
    }
    manifest["steps"] = full.platoons.front().steps();
    manifest["min_platoon_size"] = lo;
    manifest["max_platoon_size"] = hi;
  }
  manifest["files"] = json{{"train", "train.json"}, {"eval", "eval.json"}};
  write_text(out_dir + "/manifest.json", manifest.dump(2) + "\n");
}

void write_losses_csv(const std::string& path, const TrainReport& rep) {
  std::ostringstream csv;
  csv << "epoch,train_loss,inference_loss\n";
  for (std::size_t i = 0; i < rep.train_loss.size(); ++i)
    csv << i << ',' << fmt_g(rep.train_loss[i]) << ',' << fmt_g(rep.inference_loss[i]) << '\n';
  write_text(path, csv.str());
}

void write_cdf_csv(const std::string& path, const std::vector<double>& sorted_samples) {
  std::ostringstream csv;
  csv << "value,cdf\n";
  const double n = static_cast<double>(sorted_samples.size());
  for (std::size_t i = 0; i < sorted_samples.size(); ++i)
    csv << fmt_g(sorted_samples[i]) << ',' << fmt_g(static_cast<double>(i + 1) / n) << '\n';
  write_text(path, csv.str());
}

void append_trajectory_rows(std::ostringstream& csv, std::uint64_t platoon_id,
                            const Trajectory& traj, const char* role) {
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const VehicleState& s = traj.states[k];
    csv << platoon_id << ',' << traj.vehicle_id << ',' << role << ','
        << fmt_short(traj.t0 + static_cast<double>(k) * traj.dt) << ',' << fmt_g(s.x) << ','
        << fmt_g(s.v) << ',' << fmt_g(s.a) << '\n';
  }
}

}  // namespace

void run_synth(const RunConfig& cfg, const std::string& out_dir) {
  ensure_dir(out_dir);
  SynthConfig s = cfg.synth;
  s.seed = cfg.seed;
  Dataset ds = synthesize(s);
  log_info("synthesized " + std::to_string(ds.platoons.size()) + " platoons");
  save_split_outputs(cfg, out_dir, ds);
  write_resolved(cfg, out_dir);
}

void run_extract(const RunConfig& cfg, const std::string& out_dir) {
  if (cfg.data.csv.empty()) throw UsageError("extract: data.csv is required");
  ensure_dir(out_dir);
  ParseStats stats;
  auto records = parse_trajectory_csv(cfg.data.csv, cfg.data.units, &stats);
  for (const auto& w : stats.warnings) log_warn(w);
  log_info("parsed " + std::to_string(stats.rows_parsed) + " rows, skipped " +
           std::to_string(stats.rows_skipped));
  Dataset ds = extract_platoons(records, cfg.data.min_vehicles, cfg.data.min_duration,
                                cfg.data.lanes, cfg.data.dt);
  if (ds.platoons.empty()) log_warn("extract: no platoons matched the filters");
  save_split_outputs(cfg, out_dir, ds);
  write_resolved(cfg, out_dir);
}

TrainReport run_train(const RunConfig& cfg, const std::string& out_dir) {
  if (cfg.model.kind != "lstm") throw UsageError("train: model.kind must be \"lstm\"");
  if (cfg.data.train_dataset.empty() || cfg.data.eval_dataset.empty())
    throw UsageError("train: data.train_dataset and data.eval_dataset are required");
  ensure_dir(out_dir);
  Dataset train_ds = load_dataset(cfg.data.train_dataset);
  Dataset eval_ds = load_dataset(cfg.data.eval_dataset);
  const bool pair_mode = cfg.train.mode == "pair";
  const TrainMode mode = pair_mode ? TrainMode::Pair : TrainMode::PlatoonLevel;
  const std::vector<Platoon> train_set =
      pair_mode ? to_pairs(train_ds.platoons) : train_ds.platoons;
  const std::vector<Platoon> eval_set = pair_mode ? to_pairs(eval_ds.platoons) : eval_ds.platoons;

  TrainConfig tc;
  tc.epochs = cfg.train.epochs;
  tc.alpha = cfg.train.alpha;
  tc.method = cfg.train.optimizer == "sgd" ? OptMethod::Sgd : OptMethod::Adam;
  tc.schedule = cfg.train.schedule;
  tc.batch_size = cfg.train.batch_size;
  tc.run_seed = cfg.seed;
  tc.dt = cfg.data.dt;
  tc.checkpoint_path = cfg.train.checkpoint;

  // One draw shared by every sweep member, so families differ only in the
  // sampling schedule.
  const NetworkParams initial =
      init_params(cfg.model.layers, combine_keys({0x696e6974, cfg.seed}));

  const auto run_one = [&](const TrainConfig& tc_run, const std::string& dir, bool resume) {
    ensure_dir(dir);
    TrainReport rep = fit(initial, train_set, eval_set, tc_run, mode, resume);
    save_model(dir + "/model.ptgm", rep.final_params);
    save_model(dir + "/model_best.ptgm", rep.best_params);
    write_losses_csv(dir + "/losses.csv", rep);
    return rep;
  };

  if (!cfg.train.sweep.empty()) {
    std::ostringstream sweep;
    sweep << "family,best_epoch,best_inference,mae,mmaae\n";
    TrainReport last;
    for (const auto& name : cfg.train.sweep) {
      TrainConfig tc_run = tc;
      tc_run.schedule =
          schedule_for_family(decay_family_from_name(name), tc.schedule.epoch_max);
      const std::string dir = out_dir + "/" + name;
      if (!cfg.train.checkpoint.empty()) tc_run.checkpoint_path = dir + "/checkpoint.ptgc";
      TrainReport rep = run_one(tc_run, dir, false);
      const LstmModel model(rep.best_params);
      const auto generated = generate_dataset(model, eval_set);
      sweep << name << ',' << rep.best_epoch << ',' << fmt_g(rep.best_inference) << ','
            << fmt_g(mae(eval_set, generated)) << ',' << fmt_g(mmaae(eval_set, generated))
            << '\n';
      last = std::move(rep);
    }
    write_text(out_dir + "/sweep.csv", sweep.str());
    write_resolved(cfg, out_dir);
    return last;
  }

  TrainReport rep = run_one(tc, out_dir, cfg.train.resume);
  if (!cfg.model.file.empty()) save_model(cfg.model.file, rep.final_params);
  write_resolved(cfg, out_dir);
  return rep;
}

void run_generate(const RunConfig& cfg, const std::string& out_dir) {
  if (cfg.data.eval_dataset.empty()) throw UsageError("generate: data.eval_dataset is required");
  ensure_dir(out_dir);
  Dataset actual = load_dataset(cfg.data.eval_dataset);

  std::unique_ptr<CarFollowingModel> model;
  if (cfg.model.kind == "idm") {
    model = std::make_unique<IdmModel>(cfg.model.idm);
  } else {
    if (cfg.model.file.empty())
      throw UsageError("generate: model.file is required for an lstm model");
    model = std::make_unique<LstmModel>(load_model(cfg.model.file));
  }

  Dataset out;
  out.platoons = generate_dataset(*model, actual.platoons);
  out.platoon_lanes = actual.platoon_lanes;
  out.meta = actual.meta;
  out.meta.source = "generated";
  save_dataset(out_dir + "/generated.json", out);

  std::ostringstream csv;
  csv << "platoon_id,vehicle_id,role,t,x,v,a\n";
  for (std::size_t p = 0; p < actual.platoons.size(); ++p) {
    for (const auto& traj : actual.platoons[p].vehicles)
      append_trajectory_rows(csv, actual.platoons[p].platoon_id, traj, "actual");
    // The generated platoon reuses the actual leader; only followers are new.
    for (std::size_t i = 1; i < out.platoons[p].vehicles.size(); ++i)
      append_trajectory_rows(csv, out.platoons[p].platoon_id, out.platoons[p].vehicles[i],
                             "generated");
  }
  write_text(out_dir + "/trajectories.csv", csv.str());
  write_resolved(cfg, out_dir);
}

void run_evaluate(const RunConfig& cfg, const std::string& out_dir) {
  if (cfg.data.eval_dataset.empty()) throw UsageError("evaluate: data.eval_dataset is required");
  if (cfg.eval.generated.empty()) throw UsageError("evaluate: eval.generated is required");
  ensure_dir(out_dir);
  Dataset actual = load_dataset(cfg.data.eval_dataset);
  Dataset generated = load_dataset(cfg.eval.generated);
  MetricsReport rep = compute_metrics(actual.platoons, generated.platoons);

  json m;
  m["mae"] = rep.mae;
  m["mmaae"] = rep.mmaae;
  m["ae_samples"] = rep.ae_samples.size();
  m["pmaae_samples"] = rep.pmaae_samples.size();
  m["platoons"] = actual.platoons.size();
  write_text(out_dir + "/metrics.json", m.dump(2) + "\n");

  write_cdf_csv(out_dir + "/ae_cdf.csv", rep.ae_samples);
  write_cdf_csv(out_dir + "/pmaae_cdf.csv", rep.pmaae_samples);

  for (std::size_t p = 0; p < rep.grids.size(); ++p) {
    const auto& grid = rep.grids[p];
    const Platoon& pl = actual.platoons[p];
    std::ostringstream g;
    g << "vehicle";
    for (Eigen::Index t = 0; t < grid.cols(); ++t)
      g << ",t=" << fmt_short(static_cast<double>(t) * pl.dt());
    g << '\n';
    for (Eigen::Index r = 0; r < grid.rows(); ++r) {
      g << (r + 2);  // 1-based vehicle position in the platoon
      for (Eigen::Index t = 0; t < grid.cols(); ++t) g << ',' << fmt_g(grid(r, t));
      g << '\n';
    }
    write_text(out_dir + "/grid_" + std::to_string(pl.platoon_id) + ".csv", g.str());
  }
  write_resolved(cfg, out_dir);
}

GradCheckReport run_gradcheck_cmd(const RunConfig& cfg, const std::string& out_dir) {
  ensure_dir(out_dir);
  GradCheckOptions opts = cfg.gradcheck;
  opts.seed = cfg.seed;
  GradCheckReport rep = run_gradcheck(opts);
  write_text(out_dir + "/gradcheck.txt", rep.format());
  write_resolved(cfg, out_dir);
  return rep;
}

}  // namespace ptgen
