#ifndef PTGEN_EVAL_HPP
#define PTGEN_EVAL_HPP

#include <Eigen/Dense>
#include <vector>

#include "ptgen/core.hpp"
#include "ptgen/models.hpp"

namespace ptgen {

// Everything needed to generate a platoon: the first leader's full
// trajectory and each follower's state at the first step (acceleration is
// taken as 0 there).
struct GenerationTask {
  std::uint64_t platoon_id = 0;
  Trajectory leader;
  std::vector<VehicleState> follower_init;  // ordered downstream, position strictly decreasing
  std::vector<std::uint64_t> follower_ids;  // optional; 0s when absent

  void validate() const;
};

// Pure-rollout generation: followers are produced in upstream order, each
// one driven by the GENERATED trajectory of its predecessor (the actual
// trajectory only for the first follower). Returns the actual leader plus
// generated followers.
Platoon generate_platoon(const CarFollowingModel& model, const GenerationTask& task);

// Task for regenerating the followers of a recorded platoon from its leader
// and the followers' initial states.
GenerationTask make_task(const Platoon& actual);

// generate_platoon over a dataset, shape-matched to the input for metrics.
std::vector<Platoon> generate_dataset(const CarFollowingModel& model,
                                      const std::vector<Platoon>& actual);

// Right-continuous empirical CDF over a sample set.
struct Cdf {
  std::vector<double> sorted;  // ascending

  double operator()(double x) const;
};

// Eq. 3 convention: mean absolute position error, sums from t=2 and i=2,
// divided by the full T and I.
double mae(const std::vector<Platoon>& actual, const std::vector<Platoon>& generated);

// Eq. 4: mean over platoons of the maximum absolute error over (i, t).
double mmaae(const std::vector<Platoon>& actual, const std::vector<Platoon>& generated);

// Eq. 5: every per-(platoon, follower, step) absolute error.
Cdf ae_distribution(const std::vector<Platoon>& actual, const std::vector<Platoon>& generated);

// Eq. 6: one maximum per platoon.
Cdf pmaae_distribution(const std::vector<Platoon>& actual, const std::vector<Platoon>& generated);

// Absolute error per follower and step; row r holds follower r+2 (1-based
// vehicle index), columns run over all T steps.
Eigen::MatrixXd error_grid(const Platoon& actual, const Platoon& generated);

struct MetricsReport {
  double mae = 0.0;
  double mmaae = 0.0;
  std::vector<double> ae_samples;     // sorted ascending
  std::vector<double> pmaae_samples;  // sorted ascending
  std::vector<Eigen::MatrixXd> grids;
};

MetricsReport compute_metrics(const std::vector<Platoon>& actual,
                              const std::vector<Platoon>& generated);

}  // namespace ptgen

#endif
