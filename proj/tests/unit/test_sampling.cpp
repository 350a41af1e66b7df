#include <doctest.h>

#include <cmath>

#include "ptgen/errors.hpp"
#include "ptgen/sampling.hpp"

using namespace ptgen;

TEST_SUITE("sampling") {

TEST_CASE("inverse sigmoid hits one half at its midpoint exactly") {
  DecaySchedule s{DecayFamily::InverseSigmoid, 0.25, 25.0, 100};
  // 1 - 1/(1 + e^0) is exactly 0.5 in floating point.
  CHECK(epsilon(s, 25) == 0.5);
  CHECK(epsilon(s, 0) > 0.99);
  CHECK(epsilon(s, 100) < 0.01);
}

TEST_CASE("linear schedule endpoints are exact") {
  DecaySchedule s{DecayFamily::Linear, -2.0 / 100.0, 1.0, 100};
  CHECK(epsilon(s, 0) == 1.0);
  CHECK(epsilon(s, 50) == 0.0);  // -0.02 * 50 rounds to exactly -1
  CHECK(epsilon(s, 75) == 0.0);  // clamped below zero
  CHECK(epsilon(s, 25) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("exponential schedule matches repeated multiplication") {
  DecaySchedule s{DecayFamily::Exponential, 0.9, 0.0, 100};
  double want = 1.0;
  for (int k = 0; k < 10; ++k) want *= 0.9;
  CHECK(epsilon(s, 10) == doctest::Approx(want).epsilon(1e-12));
  CHECK(epsilon(s, 0) == 1.0);
}

TEST_CASE("constant families and the post-horizon cutoff") {
  DecaySchedule always{DecayFamily::AlwaysActual, 0.0, 0.0, 50};
  DecaySchedule never{DecayFamily::AlwaysGenerated, 0.0, 0.0, 50};
  for (int k = 0; k <= 50; k += 10) {
    CHECK(epsilon(always, k) == 1.0);
    CHECK(epsilon(never, k) == 0.0);
  }
  // Past epoch_max every family reads 0, including always_actual.
  CHECK(epsilon(always, 51) == 0.0);
  CHECK(epsilon(never, 51) == 0.0);
  DecaySchedule exp{DecayFamily::Exponential, 0.9, 0.0, 50};
  CHECK(epsilon(exp, 51) == 0.0);
}

TEST_CASE("published schedules are monotone non-increasing") {
  const int E = 100;
  DecaySchedule all[] = {
      {DecayFamily::AlwaysActual, 0.0, 0.0, E},
      {DecayFamily::Linear, -2.0 / E, 1.0, E},
      {DecayFamily::Exponential, 0.9, 0.0, E},
      {DecayFamily::InverseSigmoid, 0.25, E / 4.0, E},
      {DecayFamily::AlwaysGenerated, 0.0, 0.0, E},
  };
  for (const auto& s : all) {
    double prev = 1.0;
    for (int k = 0; k <= E + 10; ++k) {
      const double e = epsilon(s, k);
      CHECK(e <= prev + 1e-15);
      CHECK(e >= 0.0);
      CHECK(e <= 1.0);
      prev = e;
    }
  }
}

TEST_CASE("epsilon input contract") {
  DecaySchedule s{DecayFamily::Linear, -0.02, 1.0, 100};
  CHECK_THROWS_AS(epsilon(s, -1), UsageError);
  DecaySchedule bad = s;
  bad.epoch_max = 0;
  CHECK_THROWS_AS(epsilon(bad, 0), UsageError);
}

TEST_CASE("masks at the extremes are deterministic constants") {
  SampleMask ones = sample_mask(1.0, 12, 99);
  SampleMask zeros = sample_mask(0.0, 12, 99);
  CHECK(ones.length() == 12);
  CHECK(zeros.length() == 12);
  for (int i = 0; i < 12; ++i) {
    CHECK(ones.bits[i] == 1);
    CHECK(zeros.bits[i] == 0);
  }
}

TEST_CASE("mask draws hit the requested rate and reproduce by seed") {
  const int T = 10000;
  SampleMask m = sample_mask(0.5, T, 1234);
  int on = 0;
  for (auto b : m.bits) on += b;
  const double rate = static_cast<double>(on) / T;
  CHECK(rate > 0.48);
  CHECK(rate < 0.52);

  SampleMask again = sample_mask(0.5, T, 1234);
  CHECK(again.bits == m.bits);
  SampleMask other = sample_mask(0.5, T, 1235);
  CHECK(other.bits != m.bits);
}

TEST_CASE("mask contract rejects bad arguments") {
  CHECK_THROWS_AS(sample_mask(-0.1, 5, 1), UsageError);
  CHECK_THROWS_AS(sample_mask(1.1, 5, 1), UsageError);
  CHECK_THROWS_AS(sample_mask(0.5, 0, 1), UsageError);
}

TEST_CASE("mask keys separate every rollout coordinate") {
  const auto k = mask_key(7, 3, 11, 2);
  CHECK(k != mask_key(8, 3, 11, 2));
  CHECK(k != mask_key(7, 4, 11, 2));
  CHECK(k != mask_key(7, 3, 12, 2));
  CHECK(k != mask_key(7, 3, 11, 3));
  CHECK(k == mask_key(7, 3, 11, 2));
}

TEST_CASE("family names round trip") {
  for (auto f : {DecayFamily::AlwaysActual, DecayFamily::Linear, DecayFamily::Exponential,
                 DecayFamily::InverseSigmoid, DecayFamily::AlwaysGenerated}) {
    CHECK(decay_family_from_name(decay_family_name(f)) == f);
  }
  CHECK_THROWS_AS(decay_family_from_name("sigmoid"), UsageError);
}

}  // TEST_SUITE
