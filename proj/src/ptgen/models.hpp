#ifndef PTGEN_MODELS_HPP
#define PTGEN_MODELS_HPP

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "ptgen/core.hpp"

namespace ptgen {

// Opaque per-vehicle memory carried between decision steps. Parametric models
// leave it empty; recurrent models keep per-layer hidden and cell vectors.
struct MemoryState {
  std::vector<Eigen::VectorXd> h;
  std::vector<Eigen::VectorXd> c;

  bool empty() const { return h.empty() && c.empty(); }
};

// The general car-following decision block: given the follower state, the
// leader state and the memory from the previous step, produce the follower
// acceleration for the next step and the updated memory. Implementations are
// immutable after construction and hold no per-vehicle state; the memory is
// always passed explicitly.
class CarFollowingModel {
 public:
  virtual ~CarFollowingModel() = default;

  virtual std::pair<double, MemoryState> decide(const VehicleState& follower,
                                                const VehicleState& leader,
                                                const MemoryState& mem) const = 0;

  virtual MemoryState initial_memory() const = 0;
};

struct IdmParams {
  double a_max = 1.4;      // maximum acceleration [m/s^2]
  double b = 2.0;          // desired deceleration [m/s^2]
  double v0 = 30.0;        // desired velocity [m/s]
  double g_jam = 2.0;      // minimum gap in the jam [m]
  double t_headway = 1.5;  // safe time headway [s]
  double delta = 4.0;      // velocity exponent

  bool valid() const {
    return a_max > 0 && b > 0 && v0 > 0 && g_jam > 0 && t_headway > 0 && delta > 0;
  }
};

// Hard floor on the IDM output; the raw braking term is unbounded as the gap
// closes, which would blow up rollouts started from bad states.
inline constexpr double kEmergencyBrake = 8.0;  // [m/s^2]

double idm_acceleration(const ObservationFeatures& obs, const IdmParams& p);

// Gap at which idm_acceleration(v, dv=0, gap) = 0, found by bisection.
double idm_equilibrium_gap(double v, const IdmParams& p);

class IdmModel final : public CarFollowingModel {
 public:
  explicit IdmModel(IdmParams params = {}) : params_(params) {
    if (!params_.valid()) throw UsageError("IdmModel: parameters must be strictly positive");
  }

  std::pair<double, MemoryState> decide(const VehicleState& follower,
                                        const VehicleState& leader,
                                        const MemoryState& mem) const override;

  MemoryState initial_memory() const override { return {}; }

  const IdmParams& params() const { return params_; }

 private:
  IdmParams params_;
};

// One full decision step: acceleration from the model, state via
// integrate_step, updated memory from the model.
std::pair<VehicleState, MemoryState> step_block(const CarFollowingModel& model,
                                                const VehicleState& follower,
                                                const VehicleState& leader,
                                                const MemoryState& mem, double dt);

}  // namespace ptgen

#endif
