#include "ptgen/models.hpp"

#include <algorithm>
#include <cmath>

namespace ptgen {

double idm_acceleration(const ObservationFeatures& obs, const IdmParams& p) {
  // Desired gap: jam distance, headway term, and the braking-interaction term
  // driven by the closing speed v_F - v_L = -dv.
  double closing = -obs.dv;
  double s_star = p.g_jam + obs.v_f * p.t_headway +
                  obs.v_f * closing / (2.0 * std::sqrt(p.a_max * p.b));
  double ratio = s_star / obs.dx;
  double a = p.a_max * (1.0 - std::pow(obs.v_f / p.v0, p.delta) - ratio * ratio);
  return std::clamp(a, -kEmergencyBrake, p.a_max);
}

double idm_equilibrium_gap(double v, const IdmParams& p) {
  if (!(v >= 0.0) || v >= p.v0) {
    throw UsageError("idm_equilibrium_gap: need 0 <= v < v0");
  }
  // At dv = 0 the acceleration is strictly increasing in the gap, negative at
  // the desired gap s* and positive as the gap grows, so the root is unique.
  double s_star = p.g_jam + v * p.t_headway;
  double lo = s_star;
  double hi = std::max(2.0 * s_star, 10.0);
  ObservationFeatures obs{v, 0.0, hi};
  while (idm_acceleration(obs, p) <= 0.0) {
    hi *= 2.0;
    obs.dx = hi;
    if (hi > 1e12) throw NumericError("idm_equilibrium_gap: no bracket found");
  }
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    obs.dx = mid;
    if (idm_acceleration(obs, p) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-13 * hi) break;
  }
  return 0.5 * (lo + hi);
}

std::pair<double, MemoryState> IdmModel::decide(const VehicleState& follower,
                                                const VehicleState& leader,
                                                const MemoryState& mem) const {
  (void)mem;  // memoryless model
  double a = idm_acceleration(features(follower, leader), params_);
  return {a, MemoryState{}};
}

std::pair<VehicleState, MemoryState> step_block(const CarFollowingModel& model,
                                                const VehicleState& follower,
                                                const VehicleState& leader,
                                                const MemoryState& mem, double dt) {
  auto [a, mem_next] = model.decide(follower, leader, mem);
  if (!std::isfinite(a)) throw NumericError("step_block: model produced non-finite acceleration");
  return {integrate_step(follower, a, dt), std::move(mem_next)};
}

}  // namespace ptgen
