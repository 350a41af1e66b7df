#ifndef PTGEN_CORE_HPP
#define PTGEN_CORE_HPP

#include <cmath>
#include <cstdint>
#include <vector>

#include "ptgen/errors.hpp"

namespace ptgen {

// State of one vehicle at one decision step: longitudinal position [m],
// velocity [m/s], acceleration [m/s^2].
struct VehicleState {
  double x = 0.0;
  double v = 0.0;
  double a = 0.0;
};

// Model inputs for one decision: follower velocity, velocity of the leader
// relative to the follower, and the gap between them.
struct ObservationFeatures {
  double v_f = 0.0;  // follower velocity [m/s]
  double dv = 0.0;   // v_leader - v_follower [m/s]
  double dx = 0.0;   // x_leader - x_follower [m], clamped at kMinGap
};

// Lower bound on the observed gap. The kinematics do not forbid overlap, so
// the gap fed to a model is clamped to keep its inputs bounded.
inline constexpr double kMinGap = 0.1;

// Advance one decision step: v' = max(0, v + a_next*dt), x' = x + v'*dt.
// Velocity is clamped at zero (a stopped vehicle holds position rather than
// reversing).
inline VehicleState integrate_step(const VehicleState& s, double a_next, double dt) {
  if (!(dt > 0.0) || !std::isfinite(a_next) || !std::isfinite(s.x) || !std::isfinite(s.v)) {
    throw NumericError("integrate_step: non-finite state or acceleration");
  }
  VehicleState out;
  out.v = s.v + a_next * dt;
  if (out.v < 0.0) out.v = 0.0;
  out.x = s.x + out.v * dt;
  out.a = a_next;
  return out;
}

inline ObservationFeatures features(const VehicleState& follower, const VehicleState& leader) {
  ObservationFeatures obs;
  obs.v_f = follower.v;
  obs.dv = leader.v - follower.v;
  obs.dx = leader.x - follower.x;
  if (obs.dx < kMinGap) obs.dx = kMinGap;
  return obs;
}

// Per-vehicle time series on a uniform grid; the state at step k is taken at
// time t0 + k*dt.
struct Trajectory {
  std::uint64_t vehicle_id = 0;
  double t0 = 0.0;
  double dt = 0.5;
  std::vector<VehicleState> states;

  int steps() const { return static_cast<int>(states.size()); }
};

// Ordered chain of vehicles sharing one studied period; index 0 is the first
// leader and vehicle i drives directly behind vehicle i-1.
struct Platoon {
  std::uint64_t platoon_id = 0;
  std::vector<Trajectory> vehicles;

  int size() const { return static_cast<int>(vehicles.size()); }
  int steps() const { return vehicles.empty() ? 0 : vehicles.front().steps(); }
  double dt() const { return vehicles.empty() ? 0.0 : vehicles.front().dt; }

  void validate() const {
    if (vehicles.size() < 2) throw DataError("platoon needs at least 2 vehicles");
    const Trajectory& lead = vehicles.front();
    if (!(lead.dt > 0.0)) throw DataError("platoon dt must be positive");
    if (lead.states.empty()) throw DataError("platoon has empty trajectories");
    for (std::size_t i = 1; i < vehicles.size(); ++i) {
      const Trajectory& t = vehicles[i];
      if (t.steps() != lead.steps() || t.dt != lead.dt || t.t0 != lead.t0) {
        throw DataError("platoon trajectories must share t0, dt and length");
      }
      if (!(vehicles[i - 1].states.front().x > t.states.front().x)) {
        throw DataError("platoon ordering violated: follower ahead of its leader at t0");
      }
    }
  }
};

}  // namespace ptgen

#endif
