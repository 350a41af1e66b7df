#include "ptgen/eval.hpp"

#include <algorithm>
#include <cmath>

#include "ptgen/errors.hpp"

namespace ptgen {

void GenerationTask::validate() const {
  if (leader.steps() < 2) throw UsageError("generation task: leader needs at least 2 steps");
  if (!(leader.dt > 0.0)) throw UsageError("generation task: leader dt must be positive");
  if (follower_init.empty()) throw UsageError("generation task: no followers");
  if (!follower_ids.empty() && follower_ids.size() != follower_init.size())
    throw UsageError("generation task: follower id count mismatch");
  double ahead = leader.states.front().x;
  for (const VehicleState& s : follower_init) {
    if (!(s.x < ahead))
      throw UsageError("generation task: follower initial positions must strictly decrease");
    ahead = s.x;
  }
}

Platoon generate_platoon(const CarFollowingModel& model, const GenerationTask& task) {
  task.validate();
  int T = task.leader.steps();
  double dt = task.leader.dt;

  Platoon out;
  out.platoon_id = task.platoon_id;
  out.vehicles.push_back(task.leader);
  const std::vector<VehicleState>* upstream = &task.leader.states;
  for (std::size_t f = 0; f < task.follower_init.size(); ++f) {
    Trajectory traj;
    traj.vehicle_id = task.follower_ids.empty() ? 0 : task.follower_ids[f];
    traj.t0 = task.leader.t0;
    traj.dt = dt;
    traj.states.reserve(T);
    VehicleState init = task.follower_init[f];
    init.a = 0.0;
    traj.states.push_back(init);

    MemoryState mem = model.initial_memory();
    for (int t = 0; t < T - 1; ++t) {
      auto [next, mem2] = step_block(model, traj.states[t], (*upstream)[t], mem, dt);
      traj.states.push_back(next);
      mem = std::move(mem2);
    }
    out.vehicles.push_back(std::move(traj));
    upstream = &out.vehicles.back().states;
  }
  return out;
}

GenerationTask make_task(const Platoon& actual) {
  actual.validate();
  GenerationTask task;
  task.platoon_id = actual.platoon_id;
  task.leader = actual.vehicles[0];
  for (int i = 1; i < actual.size(); ++i) {
    task.follower_init.push_back(actual.vehicles[i].states.front());
    task.follower_ids.push_back(actual.vehicles[i].vehicle_id);
  }
  return task;
}

std::vector<Platoon> generate_dataset(const CarFollowingModel& model,
                                      const std::vector<Platoon>& actual) {
  std::vector<Platoon> out;
  out.reserve(actual.size());
  for (const Platoon& pl : actual) out.push_back(generate_platoon(model, make_task(pl)));
  return out;
}

double Cdf::operator()(double x) const {
  if (sorted.empty()) return 0.0;
  auto it = std::upper_bound(sorted.begin(), sorted.end(), x);
  return static_cast<double>(it - sorted.begin()) / static_cast<double>(sorted.size());
}

namespace {

void check_matched(const std::vector<Platoon>& actual, const std::vector<Platoon>& generated) {
  if (actual.size() != generated.size() || actual.empty())
    throw UsageError("metrics: datasets must be non-empty and matched");
  for (std::size_t n = 0; n < actual.size(); ++n) {
    if (generated[n].size() != actual[n].size() || generated[n].steps() != actual[n].steps())
      throw UsageError("metrics: platoon shape mismatch at index " + std::to_string(n));
    if (actual[n].size() < 2) throw UsageError("metrics: platoon needs at least 2 vehicles");
  }
}

}  // namespace

double mae(const std::vector<Platoon>& actual, const std::vector<Platoon>& generated) {
  check_matched(actual, generated);
  double total = 0.0;
  for (std::size_t n = 0; n < actual.size(); ++n) {
    int I = actual[n].size();
    int T = actual[n].steps();
    double sum = 0.0;
    for (int i = 1; i < I; ++i)
      for (int t = 1; t < T; ++t)
        sum += std::abs(generated[n].vehicles[i].states[t].x - actual[n].vehicles[i].states[t].x);
    total += sum / (static_cast<double>(T) * I);
  }
  return total / static_cast<double>(actual.size());
}

double mmaae(const std::vector<Platoon>& actual, const std::vector<Platoon>& generated) {
  check_matched(actual, generated);
  double total = 0.0;
  for (std::size_t n = 0; n < actual.size(); ++n) {
    double worst = 0.0;
    for (int i = 1; i < actual[n].size(); ++i)
      for (int t = 1; t < actual[n].steps(); ++t)
        worst = std::max(worst, std::abs(generated[n].vehicles[i].states[t].x -
                                         actual[n].vehicles[i].states[t].x));
    total += worst;
  }
  return total / static_cast<double>(actual.size());
}

Cdf ae_distribution(const std::vector<Platoon>& actual, const std::vector<Platoon>& generated) {
  check_matched(actual, generated);
  Cdf cdf;
  for (std::size_t n = 0; n < actual.size(); ++n)
    for (int i = 1; i < actual[n].size(); ++i)
      for (int t = 1; t < actual[n].steps(); ++t)
        cdf.sorted.push_back(std::abs(generated[n].vehicles[i].states[t].x -
                                      actual[n].vehicles[i].states[t].x));
  std::sort(cdf.sorted.begin(), cdf.sorted.end());
  return cdf;
}

Cdf pmaae_distribution(const std::vector<Platoon>& actual,
                       const std::vector<Platoon>& generated) {
  check_matched(actual, generated);
  Cdf cdf;
  for (std::size_t n = 0; n < actual.size(); ++n) {
    double worst = 0.0;
    for (int i = 1; i < actual[n].size(); ++i)
      for (int t = 1; t < actual[n].steps(); ++t)
        worst = std::max(worst, std::abs(generated[n].vehicles[i].states[t].x -
                                         actual[n].vehicles[i].states[t].x));
    cdf.sorted.push_back(worst);
  }
  std::sort(cdf.sorted.begin(), cdf.sorted.end());
  return cdf;
}

Eigen::MatrixXd error_grid(const Platoon& actual, const Platoon& generated) {
  if (generated.size() != actual.size() || generated.steps() != actual.steps())
    throw UsageError("error_grid: platoon shape mismatch");
  int I = actual.size();
  int T = actual.steps();
  Eigen::MatrixXd grid(I - 1, T);
  for (int i = 1; i < I; ++i)
    for (int t = 0; t < T; ++t)
      grid(i - 1, t) =
          std::abs(generated.vehicles[i].states[t].x - actual.vehicles[i].states[t].x);
  return grid;
}

MetricsReport compute_metrics(const std::vector<Platoon>& actual,
                              const std::vector<Platoon>& generated) {
  MetricsReport rep;
  rep.mae = mae(actual, generated);
  rep.mmaae = mmaae(actual, generated);
  rep.ae_samples = ae_distribution(actual, generated).sorted;
  rep.pmaae_samples = pmaae_distribution(actual, generated).sorted;
  for (std::size_t n = 0; n < actual.size(); ++n)
    rep.grids.push_back(error_grid(actual[n], generated[n]));
  return rep;
}

}  // namespace ptgen
