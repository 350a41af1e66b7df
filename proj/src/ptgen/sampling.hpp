#ifndef PTGEN_SAMPLING_HPP
#define PTGEN_SAMPLING_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace ptgen {

enum class DecayFamily {
  AlwaysActual,
  Linear,
  Exponential,
  InverseSigmoid,
  AlwaysGenerated,
};

DecayFamily decay_family_from_name(const std::string& name);
std::string decay_family_name(DecayFamily f);

// Probability schedule for scheduled sampling: eps_k is the probability that
// a decision step consumes actual states instead of generated ones at epoch k.
struct DecaySchedule {
  DecayFamily family = DecayFamily::AlwaysActual;
  double w = 0.0;  // decay rate
  double c = 0.0;  // offset
  int epoch_max = 1;
};

// eps_k: clamp(decay(k), 0, 1) for k in [0, epoch_max], and 0 beyond
// epoch_max. Families: always_actual -> 1, linear -> w*k + c, exponential ->
// w^k + c, inverse_sigmoid -> 1 - 1/(1 + e^{-w*(k-c)}), always_generated -> 0.
double epsilon(const DecaySchedule& s, int k);

// Per-rollout coin flips, 1 = feed actual state, 0 = feed generated state.
// bits[t-1] governs the decision taken at step t.
struct SampleMask {
  std::vector<std::uint8_t> bits;

  int length() const { return static_cast<int>(bits.size()); }
};

SampleMask sample_mask(double eps, int T, std::uint64_t rng_seed);

// Seed for the mask of one (epoch, platoon, follower) rollout. Keyed seeding
// keeps masks independent of the order rollouts are visited in.
std::uint64_t mask_key(std::uint64_t run_seed, int epoch, std::uint64_t platoon_id,
                       int vehicle_index);

}  // namespace ptgen

#endif
