#include <doctest.h>

#include <cmath>

#include "ptgen/models.hpp"

using namespace ptgen;

TEST_SUITE("models") {

TEST_CASE("idm acceleration matches the closed form") {
  IdmParams p;  // a_max 1.4, b 2.0, v0 30, g_jam 2, T 1.5, delta 4
  // v = 10, dv = 0, gap = 30: s* = 2 + 10*1.5 = 17,
  // a = 1.4 * (1 - (10/30)^4 - (17/30)^2) = 1.4 * 5399/8100.
  const double expected = 1.4 * 5399.0 / 8100.0;
  CHECK(idm_acceleration({10.0, 0.0, 30.0}, p) == doctest::Approx(expected).epsilon(1e-14));

  // Approaching slower traffic adds the dynamic headway term:
  // dv = -5 (closing), s* = 17 + 10*5/(2*sqrt(2.8)).
  const double s_star = 17.0 + 10.0 * 5.0 / (2.0 * std::sqrt(1.4 * 2.0));
  const double expected2 = 1.4 * (1.0 - std::pow(10.0 / 30.0, 4) - std::pow(s_star / 30.0, 2));
  CHECK(idm_acceleration({10.0, -5.0, 30.0}, p) == doctest::Approx(expected2).epsilon(1e-14));
}

TEST_CASE("idm brakes are clamped at the emergency limit") {
  IdmParams p;
  // Nearly touching at speed: raw IDM demand is far below -8.
  const double a = idm_acceleration({30.0, -20.0, 0.5}, p);
  CHECK(a == -kEmergencyBrake);
  // And the ceiling is a_max on an empty road.
  const double a_free = idm_acceleration({0.0, 0.0, 1e9}, p);
  CHECK(a_free <= p.a_max);
  CHECK(a_free == doctest::Approx(p.a_max * (1.0 - std::pow(2.0 / 1e9, 2))).epsilon(1e-12));
}

TEST_CASE("idm acceleration is monotone in the inputs") {
  IdmParams p;
  // Larger gap, same speeds: never less acceleration.
  double prev = -1e9;
  for (double dx = 5.0; dx <= 100.0; dx += 5.0) {
    const double a = idm_acceleration({15.0, 0.0, dx}, p);
    CHECK(a >= prev);
    CHECK(std::isfinite(a));
    prev = a;
  }
  // Faster follower, same gap: never more acceleration.
  prev = 1e9;
  for (double v = 0.0; v <= 29.0; v += 1.0) {
    const double a = idm_acceleration({v, 0.0, 40.0}, p);
    CHECK(a <= prev);
    CHECK(std::isfinite(a));
    prev = a;
  }
}

TEST_CASE("equilibrium gap solves a = 0 and has the closed form at v = 10") {
  IdmParams p;
  // At a(10, 0, g) = 0: (17/g)^2 = 1 - (1/3)^4 = 80/81, so g = 153/sqrt(80).
  const double g10 = idm_equilibrium_gap(10.0, p);
  CHECK(g10 == doctest::Approx(153.0 / std::sqrt(80.0)).epsilon(1e-10));
  CHECK(idm_acceleration({10.0, 0.0, g10}, p) == doctest::Approx(0.0).epsilon(1e-10));

  // At standstill the equilibrium gap is the jam gap.
  CHECK(idm_equilibrium_gap(0.0, p) == doctest::Approx(p.g_jam).epsilon(1e-10));

  // The fixed point holds across speeds.
  for (double v = 2.0; v < 29.0; v += 4.5) {
    const double g = idm_equilibrium_gap(v, p);
    CHECK(std::abs(idm_acceleration({v, 0.0, g}, p)) < 1e-9);
  }
}

TEST_CASE("equilibrium gap requires a speed below the desired one") {
  IdmParams p;
  CHECK_THROWS_AS(idm_equilibrium_gap(30.0, p), UsageError);
  CHECK_THROWS_AS(idm_equilibrium_gap(35.0, p), UsageError);
  CHECK_THROWS_AS(idm_equilibrium_gap(-1.0, p), UsageError);
}

TEST_CASE("idm model decide matches the raw formula and keeps no memory") {
  IdmParams p;
  IdmModel model(p);
  VehicleState f{100.0, 10.0, 0.0};
  VehicleState l{130.0, 10.0, 0.0};
  auto [a, mem] = model.decide(f, l, model.initial_memory());
  CHECK(a == doctest::Approx(1.4 * 5399.0 / 8100.0).epsilon(1e-14));
  CHECK(mem.empty());
}

TEST_CASE("idm model rejects non-positive parameters") {
  IdmParams p;
  p.b = 0.0;
  CHECK_THROWS_AS(IdmModel{p}, UsageError);
}

TEST_CASE("step_block chains decide and integrate") {
  IdmModel model{IdmParams{}};
  VehicleState f{100.0, 10.0, 0.0};
  VehicleState l{130.0, 10.0, 0.0};
  auto [next, mem] = step_block(model, f, l, model.initial_memory(), 0.5);
  const double a = 1.4 * 5399.0 / 8100.0;
  CHECK(next.a == doctest::Approx(a).epsilon(1e-14));
  CHECK(next.v == doctest::Approx(10.0 + a * 0.5).epsilon(1e-14));
  CHECK(next.x == doctest::Approx(100.0 + (10.0 + a * 0.5) * 0.5).epsilon(1e-14));
}

}  // TEST_SUITE
