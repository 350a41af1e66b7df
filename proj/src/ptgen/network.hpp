#ifndef PTGEN_NETWORK_HPP
#define PTGEN_NETWORK_HPP

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "ptgen/models.hpp"

namespace ptgen {

// Gate order used for parameter storage, flattening and serialization.
enum GateIndex { kGateInput = 0, kGateForget = 1, kGateOutput = 2, kGateCandidate = 3 };

struct LstmLayerParams {
  std::array<Eigen::MatrixXd, 4> W;  // input weights, [hidden x in]
  std::array<Eigen::MatrixXd, 4> U;  // recurrent weights, [hidden x hidden]
  std::array<Eigen::VectorXd, 4> b;  // biases, [hidden]
};

// All trainable parameters of the car-following network: stacked LSTM layers,
// a scalar linear head, and the per-feature normalization constants applied
// to the inputs (stored here so inference needs no side data).
struct NetworkParams {
  int input_dim = 3;
  std::vector<int> layer_sizes;  // e.g. {10, 10, 5}
  std::vector<LstmLayerParams> layers;
  Eigen::VectorXd head_w;
  double head_b = 0.0;
  Eigen::VectorXd norm_mean;
  Eigen::VectorXd norm_std;

  int n_params() const;
};

NetworkParams zero_params(const std::vector<int>& layer_sizes, int input_dim = 3);

// Weights uniform in [-r, r] with r = 1/sqrt(fan_in); biases zero except the
// forget-gate biases, which start at 1. Normalization constants start at
// identity (mean 0, std 1) and are filled in from training data later.
NetworkParams init_params(const std::vector<int>& layer_sizes, std::uint64_t seed,
                          int input_dim = 3);

MemoryState zero_memory(const NetworkParams& p);

// One forward decision step: normalize the observation, run the stacked LSTM
// cells, apply the linear head. Pure function of (params, obs, mem).
std::pair<double, MemoryState> forward_step(const NetworkParams& p,
                                            const ObservationFeatures& obs,
                                            const MemoryState& mem);

// Per-step activations recorded during a training rollout, enough to run the
// reverse pass without recomputing the forward one.
struct LayerCache {
  Eigen::VectorXd x;       // layer input
  Eigen::VectorXd h_prev;
  Eigen::VectorXd c_prev;
  Eigen::VectorXd gi, gf, go, gc;  // post-activation gates
  Eigen::VectorXd c;
  Eigen::VectorXd tanh_c;
};

struct StepRecord {
  std::vector<LayerCache> layers;
  // Set by the rollout driver when integrate_step clamped the velocity at
  // zero; the position gradient for this step then dies at the clamp.
  bool v_clamped = false;
};

struct GradientTape {
  double dt = 0.5;
  std::vector<StepRecord> steps;
};

// forward_step that also appends a StepRecord to the tape.
std::pair<double, MemoryState> forward_step_recorded(const NetworkParams& p,
                                                     const ObservationFeatures& obs,
                                                     const MemoryState& mem, GradientTape& tape);

// Exact reverse-mode gradient of a rollout loss. position_grads[j] is
// dL/d(x_hat) for the position produced by recorded step j; inside each step
// the gradient passes through the integration chain a -> v -> x (a factor
// dt^2, zero where the velocity clamp fired), and across steps only through
// the recurrent memory. Fed-back generated states are treated as constants.
// Returns a flat gradient vector laid out like flatten().
std::vector<double> backward_rollout(const NetworkParams& p, const GradientTape& tape,
                                     const std::vector<double>& position_grads);

// Trainable parameters as one flat vector. Layout, in order: per layer, per
// gate (input, forget, output, candidate): W row-major, U row-major, b; then
// head weights and head bias. Normalization constants are not trainable and
// are not included.
std::vector<double> flatten(const NetworkParams& p);
void unflatten(const std::vector<double>& flat, NetworkParams& p);

// Central differences per parameter; the independent oracle for
// backward_rollout.
std::vector<double> finite_difference_gradient(
    const std::function<double(const NetworkParams&)>& loss, const NetworkParams& at,
    double step);

enum class OptMethod { Sgd, Adam };

struct OptimizerState {
  OptMethod method = OptMethod::Adam;
  double alpha = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t step = 0;
  std::vector<double> m;  // sized on first update
  std::vector<double> v;
};

void optimizer_update(NetworkParams& params, const std::vector<double>& grads,
                      OptimizerState& opt);

// The trained network as a car-following model.
class LstmModel final : public CarFollowingModel {
 public:
  explicit LstmModel(NetworkParams params) : params_(std::move(params)) {}

  std::pair<double, MemoryState> decide(const VehicleState& follower,
                                        const VehicleState& leader,
                                        const MemoryState& mem) const override {
    return forward_step(params_, features(follower, leader), mem);
  }

  MemoryState initial_memory() const override { return zero_memory(params_); }

  const NetworkParams& params() const { return params_; }

 private:
  NetworkParams params_;
};

}  // namespace ptgen

#endif
