#include "ptgen/sampling.hpp"

#include <algorithm>
#include <cmath>

#include "ptgen/errors.hpp"
#include "ptgen/rng.hpp"

namespace ptgen {

DecayFamily decay_family_from_name(const std::string& name) {
  if (name == "always_actual") return DecayFamily::AlwaysActual;
  if (name == "linear") return DecayFamily::Linear;
  if (name == "exponential") return DecayFamily::Exponential;
  if (name == "inverse_sigmoid") return DecayFamily::InverseSigmoid;
  if (name == "always_generated") return DecayFamily::AlwaysGenerated;
  throw UsageError("unknown decay family: " + name);
}

std::string decay_family_name(DecayFamily f) {
  switch (f) {
    case DecayFamily::AlwaysActual: return "always_actual";
    case DecayFamily::Linear: return "linear";
    case DecayFamily::Exponential: return "exponential";
    case DecayFamily::InverseSigmoid: return "inverse_sigmoid";
    case DecayFamily::AlwaysGenerated: return "always_generated";
  }
  throw UsageError("unknown decay family value");
}

double epsilon(const DecaySchedule& s, int k) {
  if (k < 0) throw UsageError("epsilon: epoch index must be non-negative");
  if (s.epoch_max < 1) throw UsageError("epsilon: epoch_max must be at least 1");
  if (s.family == DecayFamily::AlwaysGenerated) return 0.0;
  if (k > s.epoch_max) return 0.0;
  double d = 0.0;
  switch (s.family) {
    case DecayFamily::AlwaysActual:
      return 1.0;
    case DecayFamily::Linear:
      d = s.w * k + s.c;
      break;
    case DecayFamily::Exponential:
      d = std::pow(s.w, k) + s.c;
      break;
    case DecayFamily::InverseSigmoid:
      d = 1.0 - 1.0 / (1.0 + std::exp(-s.w * (k - s.c)));
      break;
    case DecayFamily::AlwaysGenerated:
      break;  // handled above
  }
  return std::clamp(d, 0.0, 1.0);
}

SampleMask sample_mask(double eps, int T, std::uint64_t rng_seed) {
  if (!(eps >= 0.0 && eps <= 1.0)) throw UsageError("sample_mask: eps must be in [0, 1]");
  if (T < 1) throw UsageError("sample_mask: length must be at least 1");
  KeyedRng rng(rng_seed);
  SampleMask mask;
  mask.bits.resize(T);
  for (int t = 0; t < T; ++t) mask.bits[t] = rng.uniform() < eps ? 1 : 0;
  return mask;
}

std::uint64_t mask_key(std::uint64_t run_seed, int epoch, std::uint64_t platoon_id,
                       int vehicle_index) {
  return combine_keys({0x6d61736bull,  // domain tag so mask draws never collide
                       run_seed, static_cast<std::uint64_t>(epoch), platoon_id,
                       static_cast<std::uint64_t>(vehicle_index)});
}

}  // namespace ptgen
