#ifndef PTGEN_GRADCHECK_HPP
#define PTGEN_GRADCHECK_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "ptgen/network.hpp"

namespace ptgen {

struct GradCheckOptions {
  std::vector<int> layer_sizes{4, 4, 3};
  int steps = 10;  // rollout length T
  int trials = 20;
  double fd_step = 1e-5;
  double tolerance = 1e-4;
  std::uint64_t seed = 0;
  // Fault-injection hook: adds perturb_amount to the analytic gradient at
  // this flat index before comparing. Negative = off.
  long perturb_index = -1;
  double perturb_amount = 0.0;
};

struct GradCheckBlock {
  std::string name;
  double worst_rel_err = 0.0;
};

struct GradCheckReport {
  double max_rel_err = 0.0;
  bool pass = false;
  std::vector<GradCheckBlock> blocks;  // worst error per parameter block

  std::string format() const;
};

// Compares backward_rollout against central finite differences of the
// frozen-replay loss on a tiny network, over several random rollouts with
// random sample masks. The trial data keeps velocities and gaps far from the
// integration clamps so the compared function is smooth.
GradCheckReport run_gradcheck(const GradCheckOptions& opts);

}  // namespace ptgen

#endif
