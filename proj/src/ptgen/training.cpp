#include "ptgen/training.hpp"

#include <cmath>
#include <filesystem>
#include <numeric>

#include "ptgen/errors.hpp"
#include "ptgen/log.hpp"
#include "ptgen/model_io.hpp"
#include "ptgen/rng.hpp"

namespace ptgen {

void TrainConfig::validate() const {
  if (epochs < 1) throw UsageError("train config: epochs must be at least 1");
  if (!(alpha >= 0.0)) throw UsageError("train config: alpha must be non-negative");
  if (!(dt > 0.0)) throw UsageError("train config: dt must be positive");
  if (batch_size < 0) throw UsageError("train config: batch_size must be non-negative");
  if (schedule.epoch_max < 1) throw UsageError("train config: schedule epoch_max must be at least 1");
}

double pair_loss(const Platoon& actual, const std::vector<double>& generated_follower_x) {
  if (actual.size() != 2) throw UsageError("pair_loss requires a 2-vehicle platoon");
  int T = actual.steps();
  if (static_cast<int>(generated_follower_x.size()) != T)
    throw UsageError("pair_loss: generated positions must match trajectory length");
  const Trajectory& follower = actual.vehicles[1];
  double sum = 0.0;
  for (int t = 1; t < T; ++t) {
    double err = generated_follower_x[t] - follower.states[t].x;
    sum += err * err;
  }
  return sum / T;
}

double platoon_loss(const Platoon& actual, const Platoon& generated) {
  int I = actual.size();
  int T = actual.steps();
  if (generated.size() != I || generated.steps() != T)
    throw UsageError("platoon_loss: shape mismatch between actual and generated platoons");
  if (I < 2) throw UsageError("platoon_loss: platoon needs at least 2 vehicles");
  double sum = 0.0;
  for (int i = 1; i < I; ++i) {
    for (int t = 1; t < T; ++t) {
      double err = generated.vehicles[i].states[t].x - actual.vehicles[i].states[t].x;
      sum += err * err;
    }
  }
  return sum / (static_cast<double>(T) * I);
}

double platoon_loss(const std::vector<Platoon>& actual, const std::vector<Platoon>& generated) {
  if (actual.size() != generated.size() || actual.empty())
    throw UsageError("platoon_loss: datasets must be non-empty and matched");
  double sum = 0.0;
  for (std::size_t n = 0; n < actual.size(); ++n) sum += platoon_loss(actual[n], generated[n]);
  return sum / static_cast<double>(actual.size());
}

MaskedRollout masked_rollout(const NetworkParams& p, const std::vector<VehicleState>& own_actual,
                             const std::vector<VehicleState>& leader_actual,
                             const std::vector<VehicleState>& leader_generated,
                             const SampleMask& mask, double dt, bool record, InputLog* log) {
  int T = static_cast<int>(own_actual.size());
  if (T < 2) throw UsageError("masked_rollout: need at least 2 steps");
  if (static_cast<int>(leader_actual.size()) != T ||
      static_cast<int>(leader_generated.size()) != T)
    throw UsageError("masked_rollout: leader length mismatch");
  if (mask.length() < T - 1) throw UsageError("masked_rollout: mask shorter than rollout");

  MaskedRollout out;
  out.tape.dt = dt;
  out.gen.reserve(T);
  out.gen.push_back(own_actual[0]);
  MemoryState mem = zero_memory(p);
  for (int t = 0; t < T - 1; ++t) {
    bool use_actual = mask.bits[t] != 0;
    const VehicleState& own = use_actual ? own_actual[t] : out.gen[t];
    const VehicleState& lead = use_actual ? leader_actual[t] : leader_generated[t];
    ObservationFeatures obs = features(own, lead);
    if (log) log->entries.push_back(obs);
    double a;
    if (record) {
      auto res = forward_step_recorded(p, obs, mem, out.tape);
      a = res.first;
      mem = std::move(res.second);
      out.tape.steps.back().v_clamped = own.v + a * dt < 0.0;
    } else {
      auto res = forward_step(p, obs, mem);
      a = res.first;
      mem = std::move(res.second);
    }
    out.gen.push_back(integrate_step(own, a, dt));
    double err = out.gen[t + 1].x - own_actual[t + 1].x;
    out.sq_err_sum += err * err;
  }
  return out;
}

FrozenRollout freeze_rollout(const std::vector<VehicleState>& own_actual,
                             const std::vector<VehicleState>& leader_actual,
                             const std::vector<VehicleState>& leader_generated,
                             const SampleMask& mask, const MaskedRollout& rolled, double dt) {
  int T = static_cast<int>(own_actual.size());
  FrozenRollout fr;
  fr.dt = dt;
  for (int t = 0; t < T - 1; ++t) {
    bool use_actual = mask.bits[t] != 0;
    const VehicleState& own = use_actual ? own_actual[t] : rolled.gen[t];
    const VehicleState& lead = use_actual ? leader_actual[t] : leader_generated[t];
    fr.obs.push_back(features(own, lead));
    fr.base_x.push_back(own.x);
    fr.base_v.push_back(own.v);
    fr.target_x.push_back(own_actual[t + 1].x);
  }
  return fr;
}

double frozen_loss(const NetworkParams& p, const FrozenRollout& fr) {
  MemoryState mem = zero_memory(p);
  double sum = 0.0;
  for (std::size_t j = 0; j < fr.obs.size(); ++j) {
    auto res = forward_step(p, fr.obs[j], mem);
    mem = std::move(res.second);
    double v = fr.base_v[j] + res.first * fr.dt;
    if (v < 0.0) v = 0.0;
    double x_hat = fr.base_x[j] + v * fr.dt;
    double err = x_hat - fr.target_x[j];
    sum += err * err;
  }
  return sum / static_cast<double>(fr.obs.size() + 1);  // pair convention: divide by T
}

namespace {

void add_into(std::vector<double>& acc, const std::vector<double>& g) {
  if (acc.empty()) {
    acc = g;
    return;
  }
  if (acc.size() != g.size()) throw UsageError("gradient accumulation size mismatch");
  for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += g[k];
}

// Rolls out every follower of one platoon under the mask policy, accumulates
// parameter gradients (without the 1/N batch factor), and returns the
// platoon's loss term.
double process_platoon(const NetworkParams& params, const Platoon& pl, bool platoon_level,
                       double eps, int epoch, const TrainConfig& cfg,
                       std::vector<double>& grad_acc, InputLog* log) {
  pl.validate();
  if (std::abs(pl.dt() - cfg.dt) > 1e-12)
    throw UsageError("dataset dt does not match configured dt");
  if (!platoon_level && pl.size() != 2)
    throw UsageError("pair training requires 2-vehicle platoons");

  int T = pl.steps();
  int I = pl.size();
  double weight = platoon_level ? 1.0 / (static_cast<double>(T) * I) : 1.0 / T;

  SampleMask ones;
  ones.bits.assign(T, 1);

  double loss_term = 0.0;
  const std::vector<VehicleState>* prev_gen = &pl.vehicles[0].states;
  std::vector<VehicleState> prev_gen_store;
  for (int i = 1; i < I; ++i) {
    SampleMask mask =
        platoon_level ? sample_mask(eps, T, mask_key(cfg.run_seed, epoch, pl.platoon_id, i + 1))
                      : ones;
    MaskedRollout rolled = masked_rollout(params, pl.vehicles[i].states,
                                          pl.vehicles[i - 1].states, *prev_gen, mask, cfg.dt,
                                          /*record=*/true, log);
    std::vector<double> pgrads(T - 1);
    for (int t = 1; t < T; ++t) {
      double err = rolled.gen[t].x - pl.vehicles[i].states[t].x;
      pgrads[t - 1] = 2.0 * err * weight;
    }
    add_into(grad_acc, backward_rollout(params, rolled.tape, pgrads));
    loss_term += weight * rolled.sq_err_sum;
    prev_gen_store = std::move(rolled.gen);
    prev_gen = &prev_gen_store;
  }
  return loss_term;
}

double run_epoch(NetworkParams& params, const std::vector<Platoon>& data, const TrainConfig& cfg,
                 int epoch, OptimizerState& opt, bool platoon_level, InputLog* log) {
  cfg.validate();
  if (data.empty()) throw DataError("training dataset is empty");
  if (epoch < 0) throw UsageError("epoch index must be non-negative");

  int n = static_cast<int>(data.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  int batch = n;
  if (cfg.batch_size > 0) {
    batch = std::min(cfg.batch_size, n);
    KeyedRng rng({0x73687566ull, cfg.run_seed, static_cast<std::uint64_t>(epoch)});
    for (int i = n - 1; i > 0; --i) {
      int j = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(i + 1));
      std::swap(order[i], order[j]);
    }
  }

  double eps = platoon_level ? epsilon(cfg.schedule, epoch) : 1.0;
  double loss_sum = 0.0;
  for (int start = 0; start < n; start += batch) {
    int count = std::min(batch, n - start);
    std::vector<double> grads(flatten(params).size(), 0.0);
    double batch_loss = 0.0;
    for (int b = 0; b < count; ++b) {
      batch_loss +=
          process_platoon(params, data[order[start + b]], platoon_level, eps, epoch, cfg, grads, log);
    }
    batch_loss /= count;
    if (!std::isfinite(batch_loss))
      throw NumericError("training loss is not finite (epoch " + std::to_string(epoch) + ")");
    for (double& g : grads) g /= count;
    optimizer_update(params, grads, opt);
    loss_sum += batch_loss * count;
  }
  return loss_sum / n;
}

}  // namespace

double train_pair_epoch(NetworkParams& params, const std::vector<Platoon>& pairs,
                        const TrainConfig& cfg, int epoch, OptimizerState& opt, InputLog* log) {
  return run_epoch(params, pairs, cfg, epoch, opt, /*platoon_level=*/false, log);
}

double train_platoon_epoch(NetworkParams& params, const std::vector<Platoon>& platoons,
                           const TrainConfig& cfg, int epoch, OptimizerState& opt, InputLog* log) {
  return run_epoch(params, platoons, cfg, epoch, opt, /*platoon_level=*/true, log);
}

double inference_loss(const NetworkParams& params, const std::vector<Platoon>& dataset,
                      TrainMode mode, double dt) {
  if (dataset.empty()) throw DataError("inference dataset is empty");
  double total = 0.0;
  for (const Platoon& pl : dataset) {
    pl.validate();
    int T = pl.steps();
    int I = pl.size();
    if (mode == TrainMode::Pair && I != 2)
      throw UsageError("pair inference requires 2-vehicle platoons");
    SampleMask zeros;
    zeros.bits.assign(T, 0);
    double weight = mode == TrainMode::PlatoonLevel ? 1.0 / (static_cast<double>(T) * I) : 1.0 / T;
    const std::vector<VehicleState>* prev_gen = &pl.vehicles[0].states;
    std::vector<VehicleState> prev_gen_store;
    double term = 0.0;
    for (int i = 1; i < I; ++i) {
      MaskedRollout rolled = masked_rollout(params, pl.vehicles[i].states,
                                            pl.vehicles[i - 1].states, *prev_gen, zeros, dt,
                                            /*record=*/false);
      term += weight * rolled.sq_err_sum;
      prev_gen_store = std::move(rolled.gen);
      prev_gen = &prev_gen_store;
    }
    total += term;
  }
  return total / static_cast<double>(dataset.size());
}

void set_normalization(NetworkParams& params, const std::vector<Platoon>& train_set) {
  if (train_set.empty()) throw DataError("cannot derive normalization from an empty dataset");
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  long count = 0;
  for (const Platoon& pl : train_set) {
    for (int i = 1; i < pl.size(); ++i) {
      for (int t = 0; t + 1 < pl.steps(); ++t) {
        ObservationFeatures o = features(pl.vehicles[i].states[t], pl.vehicles[i - 1].states[t]);
        mean += Eigen::Vector3d(o.v_f, o.dv, o.dx);
        ++count;
      }
    }
  }
  mean /= static_cast<double>(count);
  Eigen::Vector3d var = Eigen::Vector3d::Zero();
  for (const Platoon& pl : train_set) {
    for (int i = 1; i < pl.size(); ++i) {
      for (int t = 0; t + 1 < pl.steps(); ++t) {
        ObservationFeatures o = features(pl.vehicles[i].states[t], pl.vehicles[i - 1].states[t]);
        Eigen::Vector3d d = Eigen::Vector3d(o.v_f, o.dv, o.dx) - mean;
        var += d.cwiseProduct(d);
      }
    }
  }
  var /= static_cast<double>(count);
  params.norm_mean = mean;
  params.norm_std = var.cwiseSqrt().cwiseMax(1e-8);
}

TrainReport fit(const NetworkParams& initial, const std::vector<Platoon>& train_set,
                const std::vector<Platoon>& eval_set, const TrainConfig& cfg, TrainMode mode,
                bool resume) {
  cfg.validate();
  if (train_set.empty()) throw DataError("training set is empty");
  if (eval_set.empty()) throw DataError("evaluation set is empty");

  TrainReport rep;
  NetworkParams params = initial;
  OptimizerState opt;
  opt.method = cfg.method;
  opt.alpha = cfg.alpha;
  int start_epoch = 0;
  int diverge_count = 0;

  if (resume) {
    if (cfg.checkpoint_path.empty())
      throw UsageError("resume requested but no checkpoint path configured");
    if (!std::filesystem::exists(cfg.checkpoint_path))
      throw IoError("checkpoint not found: " + cfg.checkpoint_path);
    Checkpoint c = load_checkpoint(cfg.checkpoint_path);
    params = c.params;
    opt = c.opt;
    start_epoch = c.epoch_next;
    diverge_count = c.diverge_count;
    rep.train_loss = c.train_loss;
    rep.inference_loss = c.inference_loss;
    rep.best_params = c.best_params;
    rep.best_epoch = c.best_epoch;
    rep.best_inference = c.best_inference;
    log_info("resumed from " + cfg.checkpoint_path + " at epoch " + std::to_string(start_epoch));
  } else {
    set_normalization(params, train_set);
  }

  for (int k = start_epoch; k < cfg.epochs;) {
    NetworkParams snap = params;
    OptimizerState snap_opt = opt;
    double tl = 0.0;
    bool diverged = false;
    try {
      tl = mode == TrainMode::Pair ? train_pair_epoch(params, train_set, cfg, k, opt)
                                   : train_platoon_epoch(params, train_set, cfg, k, opt);
    } catch (const NumericError& e) {
      log_warn(std::string("epoch ") + std::to_string(k) + " diverged: " + e.what());
      diverged = true;
    }
    if (diverged) {
      params = std::move(snap);
      opt = std::move(snap_opt);
      if (++diverge_count >= 2)
        throw NumericError("training diverged twice; aborting (last alpha " +
                           std::to_string(opt.alpha) + ")");
      opt.alpha /= 2.0;
      log_warn("retrying epoch " + std::to_string(k) + " with alpha " + std::to_string(opt.alpha));
      continue;
    }

    double il = inference_loss(params, eval_set, mode, cfg.dt);
    rep.train_loss.push_back(tl);
    rep.inference_loss.push_back(il);
    if (rep.best_epoch < 0 || il < rep.best_inference) {
      rep.best_params = params;
      rep.best_epoch = k;
      rep.best_inference = il;
    }
    log_info("epoch " + std::to_string(k) + " train " + std::to_string(tl) + " inference " +
             std::to_string(il));

    ++k;
    if (!cfg.checkpoint_path.empty()) {
      Checkpoint c;
      c.params = params;
      c.best_params = rep.best_params;
      c.opt = opt;
      c.epoch_next = k;
      c.diverge_count = diverge_count;
      c.best_epoch = rep.best_epoch;
      c.best_inference = rep.best_inference;
      c.train_loss = rep.train_loss;
      c.inference_loss = rep.inference_loss;
      save_checkpoint(cfg.checkpoint_path, c);
    }
  }

  rep.final_params = std::move(params);
  if (rep.best_epoch < 0) {
    rep.best_params = rep.final_params;
    rep.best_inference = 0.0;
  }
  return rep;
}

}  // namespace ptgen
