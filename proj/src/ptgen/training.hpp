#ifndef PTGEN_TRAINING_HPP
#define PTGEN_TRAINING_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "ptgen/core.hpp"
#include "ptgen/network.hpp"
#include "ptgen/sampling.hpp"

namespace ptgen {

struct TrainConfig {
  int epochs = 100;
  double alpha = 1e-3;
  OptMethod method = OptMethod::Adam;
  DecaySchedule schedule;
  // 0 trains the literal algorithm: one update per epoch over the whole set.
  // A positive value switches to minibatches of that size with a
  // deterministic per-epoch shuffle.
  int batch_size = 0;
  std::uint64_t run_seed = 0;
  double dt = 0.5;
  std::string checkpoint_path;  // empty disables checkpointing

  void validate() const;
};

// Pair-level loss, Algorithm 1 convention: sum squared position error over
// t = 2..T, divide by T (not T-1).
double pair_loss(const Platoon& actual, const std::vector<double>& generated_follower_x);

// Platoon-level loss: additionally sum followers i = 2..I and divide by the
// full platoon size I.
double platoon_loss(const Platoon& actual, const Platoon& generated);

// Mean of platoon_loss over matched datasets (the 1/N factor).
double platoon_loss(const std::vector<Platoon>& actual, const std::vector<Platoon>& generated);

// Per-step network inputs in visit order; lets tests assert that two training
// procedures fed the network identical observations.
struct InputLog {
  std::vector<ObservationFeatures> entries;
};

// One follower rollout under a sample mask: at step t the network sees the
// actual states when bits[t-1] is set and the generated ones otherwise, and
// the new state integrates from the same chosen own state. Fed-back
// generated states are gradient constants (the tape only tracks the memory
// recurrence and the within-step integration chain).
struct MaskedRollout {
  std::vector<VehicleState> gen;  // follower states, gen[0] = actual initial
  GradientTape tape;              // steps()-1 records when recording
  double sq_err_sum = 0.0;        // sum over t = 2..T of (x_hat - x)^2
};

MaskedRollout masked_rollout(const NetworkParams& p, const std::vector<VehicleState>& own_actual,
                             const std::vector<VehicleState>& leader_actual,
                             const std::vector<VehicleState>& leader_generated,
                             const SampleMask& mask, double dt, bool record,
                             InputLog* log = nullptr);

// Inputs frozen from a recorded rollout, for finite-difference gradient
// oracles: replaying them under perturbed params differentiates exactly the
// function backward_rollout differentiates.
struct FrozenRollout {
  std::vector<ObservationFeatures> obs;  // per decision step
  std::vector<double> base_x, base_v;    // integration bases per step
  std::vector<double> target_x;          // actual positions at t = 2..T
  double dt = 0.5;
};

FrozenRollout freeze_rollout(const std::vector<VehicleState>& own_actual,
                             const std::vector<VehicleState>& leader_actual,
                             const std::vector<VehicleState>& leader_generated,
                             const SampleMask& mask, const MaskedRollout& rolled, double dt);

// Pair-convention loss of a frozen replay: (1/T) * sum of squared errors.
double frozen_loss(const NetworkParams& p, const FrozenRollout& fr);

// One epoch of Algorithm 1: teacher-forced rollouts over 2-vehicle platoons,
// loss (1/N)(1/T) sum_{t=2..T}. Updates params in place through opt; returns
// the epoch loss.
double train_pair_epoch(NetworkParams& params, const std::vector<Platoon>& pairs,
                        const TrainConfig& cfg, int epoch, OptimizerState& opt,
                        InputLog* log = nullptr);

// One epoch of Algorithm 2: per platoon, followers are rolled out in upstream
// order under per-rollout masks drawn at eps_k; vehicle i's generated
// predecessor comes from the same pass; loss (1/N)(1/T)(1/I) over t,i >= 2.
double train_platoon_epoch(NetworkParams& params, const std::vector<Platoon>& platoons,
                           const TrainConfig& cfg, int epoch, OptimizerState& opt,
                           InputLog* log = nullptr);

enum class TrainMode { Pair, PlatoonLevel };

struct TrainReport {
  std::vector<double> train_loss;      // per-epoch optimization loss
  std::vector<double> inference_loss;  // per-epoch pure-rollout loss on the eval set
  NetworkParams final_params;
  NetworkParams best_params;  // lowest inference loss seen
  int best_epoch = -1;
  double best_inference = 0.0;
};

// Multi-epoch driver: fills normalization constants from the training set,
// runs epochs, tracks the best-by-inference params, checkpoints after every
// epoch when cfg.checkpoint_path is set, and resumes from that file when
// asked. A non-finite epoch loss rolls the epoch back and halves alpha once;
// the second occurrence aborts.
TrainReport fit(const NetworkParams& initial, const std::vector<Platoon>& train_set,
                const std::vector<Platoon>& eval_set, const TrainConfig& cfg, TrainMode mode,
                bool resume = false);

// Pure-rollout (eps = 0) loss of the model on a dataset, pair or platoon
// convention by mode.
double inference_loss(const NetworkParams& params, const std::vector<Platoon>& dataset,
                      TrainMode mode, double dt);

// Z-score constants over every observation a teacher-forced pass would see.
void set_normalization(NetworkParams& params, const std::vector<Platoon>& train_set);

}  // namespace ptgen

#endif
