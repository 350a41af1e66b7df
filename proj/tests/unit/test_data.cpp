#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "ptgen/data.hpp"

using namespace ptgen;

namespace {

std::string fixture(const std::string& name) {
  return std::string(PTGEN_TEST_DATA_DIR) + "/" + name;
}

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name, const std::string& content) : path(name) {
    std::ofstream out(path, std::ios::binary);
    out << content;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_SUITE("data") {

TEST_CASE("ngsim-style header parses with feet conversion") {
  ParseStats stats;
  auto recs = parse_trajectory_csv(fixture("ngsim_small.csv"), Unit::Feet, &stats);
  REQUIRE(recs.size() == 3);
  CHECK(stats.rows_parsed == 3);
  CHECK(stats.rows_skipped == 0);
  CHECK_FALSE(stats.acceleration_derived);

  CHECK(recs[0].vehicle_id == 1);
  CHECK(recs[0].frame_time == 0.0);
  CHECK(recs[0].lane_id == 2);
  CHECK(recs[0].position == doctest::Approx(100.0 * 0.3048).epsilon(1e-14));
  CHECK(recs[0].velocity == doctest::Approx(30.0 * 0.3048).epsilon(1e-14));
  CHECK(recs[0].preceding_id == 0);

  CHECK(recs[1].vehicle_id == 2);
  CHECK(recs[1].acceleration == doctest::Approx(0.5 * 0.3048).epsilon(1e-14));
  CHECK(recs[1].preceding_id == 1);

  // Empty preceding field reads as "no leader".
  CHECK(recs[2].preceding_id == 0);

  // Meters mode keeps the raw numbers.
  auto raw = parse_trajectory_csv(fixture("ngsim_small.csv"), Unit::Meters);
  CHECK(raw[0].position == 100.0);
}

TEST_CASE("malformed rows are skipped with line-numbered warnings") {
  TempFile csv("bad_rows.csv",
              "vehicle_id,time,lane_id,position,velocity,acceleration,preceding\n"
              "1,0.0,2,100.0,10.0,0.0,0\n"
              "2,0.0,2,90.0,abc,0.0,1\n"
              "3,0.0,2\n"
              "4,0.0,2,80.0,-5.0,0.0,3\n"
              "5,0.0,2,70.0,9.5,0.0,4\n");
  ParseStats stats;
  auto recs = parse_trajectory_csv(csv.path, Unit::Meters, &stats);
  CHECK(recs.size() == 2);
  CHECK(stats.rows_parsed == 2);
  CHECK(stats.rows_skipped == 3);
  REQUIRE(!stats.warnings.empty());
  // Warnings carry the 1-based line number of the offending row.
  CHECK(stats.warnings[0].find("3") != std::string::npos);
}

TEST_CASE("header problems are fatal") {
  TempFile missing("no_velocity.csv", "vehicle_id,time,lane_id,position,preceding\n1,0,1,5,0\n");
  CHECK_THROWS_AS(parse_trajectory_csv(missing.path, Unit::Meters), DataError);
  TempFile empty("empty.csv", "");
  CHECK_THROWS_AS(parse_trajectory_csv(empty.path, Unit::Meters), DataError);
  CHECK_THROWS_AS(parse_trajectory_csv("does_not_exist.csv", Unit::Meters), IoError);
}

TEST_CASE("acceleration is derived from velocity differences when absent") {
  TempFile csv("no_accel.csv",
              "vehicle_id,time,lane_id,position,velocity,preceding\n"
              "1,0.0,1,100.0,10.0,0\n"
              "1,0.5,1,105.5,11.0,0\n"
              "1,1.0,1,110.0,9.0,0\n");
  ParseStats stats;
  auto recs = parse_trajectory_csv(csv.path, Unit::Meters, &stats);
  REQUIRE(recs.size() == 3);
  CHECK(stats.acceleration_derived);
  // Backward differences: a[k] = (v[k] - v[k-1]) / dt, first copies second.
  CHECK(recs[1].acceleration == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(recs[2].acceleration == doctest::Approx(-4.0).epsilon(1e-12));
  CHECK(recs[0].acceleration == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("chain fixture extracts one five-vehicle platoon") {
  auto recs = parse_trajectory_csv(fixture("platoon_chain.csv"), Unit::Meters);
  Dataset ds = extract_platoons(recs, 5, 20.0, {}, 0.5);
  REQUIRE(ds.platoons.size() == 1);
  const Platoon& pl = ds.platoons[0];
  CHECK(pl.size() == 5);
  CHECK(pl.steps() == 40);  // 20 s at 0.5 s counted as steps * dt
  CHECK(pl.dt() == 0.5);
  CHECK(pl.vehicles[0].t0 == doctest::Approx(0.0));
  for (int i = 0; i < 5; ++i) {
    CHECK(pl.vehicles[i].vehicle_id == static_cast<std::uint64_t>(i + 1));
    CHECK(pl.vehicles[i].states[0].x == doctest::Approx(100.0 - 20.0 * i).epsilon(1e-9));
    CHECK(pl.vehicles[i].states[39].x ==
          doctest::Approx(100.0 - 20.0 * i + 10.0 * 19.5).epsilon(1e-9));
  }
  REQUIRE(ds.platoon_lanes.size() == 1);
  CHECK(ds.platoon_lanes[0] == 2);
}

TEST_CASE("a lane change breaks the five-vehicle chain") {
  auto recs = parse_trajectory_csv(fixture("platoon_lanechange.csv"), Unit::Meters);
  Dataset five = extract_platoons(recs, 5, 20.0, {}, 0.5);
  CHECK(five.platoons.empty());

  // The remaining four-vehicle chain persists from t = 10 on.
  Dataset four = extract_platoons(recs, 4, 20.0, {}, 0.5);
  REQUIRE(four.platoons.size() == 1);
  const Platoon& pl = four.platoons[0];
  CHECK(pl.size() == 4);
  CHECK(pl.vehicles[0].t0 == doctest::Approx(10.0));
  std::vector<std::uint64_t> ids;
  for (const auto& t : pl.vehicles) ids.push_back(t.vehicle_id);
  CHECK(ids == std::vector<std::uint64_t>{1, 2, 4, 5});
}

TEST_CASE("lane filter drops chains on other lanes") {
  auto recs = parse_trajectory_csv(fixture("platoon_chain.csv"), Unit::Meters);
  CHECK(extract_platoons(recs, 5, 20.0, {2}, 0.5).platoons.size() == 1);
  CHECK(extract_platoons(recs, 5, 20.0, {1, 3}, 0.5).platoons.empty());
}

TEST_CASE("pair fixture yields one window on the coarse grid") {
  auto recs = parse_trajectory_csv(fixture("pair_2veh.csv"), Unit::Meters);
  Dataset ds = extract_platoons(recs, 2, 20.0, {}, 0.5);
  REQUIRE(ds.platoons.size() == 1);
  CHECK(ds.platoons[0].size() == 2);
  CHECK(ds.platoons[0].steps() == 40);
  // The input is already on the 0.5 s grid, so states pass through intact.
  CHECK(ds.platoons[0].vehicles[0].states[0].x == 200.0);
  CHECK(ds.platoons[0].vehicles[1].states[0].x == 170.0);
}

TEST_CASE("longer windows subsume equal-start shorter chains") {
  // Vehicles 1 <- 2 <- 3 chained throughout; vehicle 4 tails the chain only
  // for the first 30 s. Both windows start at t = 0; the 3-vehicle one is a
  // subset and is dropped, but its continuation window survives.
  std::vector<RawRecord> recs;
  for (int k = 0; k < 450; ++k) {
    const double t = 0.1 * k;
    for (int j = 1; j <= 4; ++j) {
      if (j == 4 && t >= 30.0 - 1e-9) continue;
      RawRecord r;
      r.vehicle_id = static_cast<std::uint64_t>(j);
      r.frame_time = t;
      r.lane_id = 1;
      r.position = 200.0 - 15.0 * (j - 1) + 12.0 * t;
      r.velocity = 12.0;
      r.acceleration = 0.0;
      r.preceding_id = static_cast<std::uint64_t>(j - 1);
      recs.push_back(r);
    }
  }
  Dataset ds = extract_platoons(recs, 3, 20.0, {}, 0.5);
  REQUIRE(ds.platoons.size() == 2);
  CHECK(ds.platoons[0].size() == 4);  // {1,2,3,4} at t = 0
  CHECK(ds.platoons[0].vehicles[0].t0 == doctest::Approx(0.0));
  CHECK(ds.platoons[1].size() == 3);  // {1,2,3} continues at t = 20
  CHECK(ds.platoons[1].vehicles[0].t0 == doctest::Approx(20.0));
}

TEST_CASE("extraction needs a uniform time grid") {
  std::vector<RawRecord> recs;
  for (double t : {0.0, 0.1, 0.25}) {
    for (int j = 1; j <= 2; ++j) {
      RawRecord r;
      r.vehicle_id = static_cast<std::uint64_t>(j);
      r.frame_time = t;
      r.lane_id = 1;
      r.position = 100.0 - 20.0 * (j - 1);
      r.velocity = 10.0;
      r.preceding_id = static_cast<std::uint64_t>(j - 1);
      recs.push_back(r);
    }
  }
  CHECK_THROWS_AS(extract_platoons(recs, 2, 0.2, {}, 0.5), DataError);
}

TEST_CASE("resample is the identity on the target grid") {
  Trajectory t;
  t.dt = 0.5;
  for (int k = 0; k < 10; ++k) t.states.push_back({k * 5.0, 10.0, 0.0});
  Trajectory out = resample(t, 0.5);
  REQUIRE(out.states.size() == t.states.size());
  for (std::size_t k = 0; k < t.states.size(); ++k) {
    CHECK(out.states[k].x == t.states[k].x);
    CHECK(out.states[k].v == t.states[k].v);
  }
}

TEST_CASE("resample interpolates linear motion exactly") {
  Trajectory t;
  t.dt = 0.1;
  for (int k = 0; k < 101; ++k) {
    const double tt = 0.1 * k;
    t.states.push_back({2.0 + 3.0 * tt, 3.0, 0.0});
  }
  Trajectory out = resample(t, 0.5);
  CHECK(out.dt == 0.5);
  CHECK(out.states.size() == 21);  // span 10 s -> 21 samples
  for (std::size_t k = 0; k < out.states.size(); ++k) {
    const double tt = 0.5 * k;
    CHECK(out.states[k].x == doctest::Approx(2.0 + 3.0 * tt).epsilon(1e-12));
    CHECK(out.states[k].v == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(out.states[k].a == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("resample error on smooth motion is second order") {
  Trajectory t;
  t.dt = 0.1;
  for (int k = 0; k < 101; ++k) {
    const double tt = 0.1 * k;
    t.states.push_back({tt * tt, 2.0 * tt, 2.0});
  }
  // 0.25 s samples land between input nodes, so this measures interpolation
  // error: bounded by dt_in^2/8 * max|x''| = 0.0025 m.
  Trajectory out = resample(t, 0.25);
  for (std::size_t k = 0; k < out.states.size(); ++k) {
    const double tt = 0.25 * k;
    CHECK(std::abs(out.states[k].x - tt * tt) <= 0.01);
  }
}

TEST_CASE("synthesis is deterministic and sized as configured") {
  SynthConfig cfg;
  cfg.count = 3;
  cfg.platoon_size = 4;
  cfg.duration = 8.0;
  cfg.param_jitter = 0.2;
  cfg.noise_std = 0.05;
  cfg.seed = 9;
  ProfileSegment seg;
  seg.kind = ProfileSegment::Kind::Ramp;
  seg.duration = 8.0;
  seg.v0 = 10.0;
  seg.v1 = 16.0;
  cfg.profile = {seg};

  Dataset a = synthesize(cfg);
  Dataset b = synthesize(cfg);
  REQUIRE(a.platoons.size() == 3);
  CHECK(a.platoons[0].size() == 4);
  CHECK(a.platoons[0].steps() == 16);
  CHECK(a.meta.source == "synthesis");
  CHECK(!a.meta.synth_config.empty());
  for (std::size_t n = 0; n < a.platoons.size(); ++n)
    for (int i = 0; i < a.platoons[n].size(); ++i)
      for (int t = 0; t < a.platoons[n].steps(); ++t)
        CHECK(a.platoons[n].vehicles[i].states[t].x == b.platoons[n].vehicles[i].states[t].x);

  SynthConfig other = cfg;
  other.seed = 10;
  Dataset c = synthesize(other);
  CHECK(c.platoons[0].vehicles[1].states[5].x != a.platoons[0].vehicles[1].states[5].x);
}

TEST_CASE("synthetic platoons respect idm equilibrium under a hold profile") {
  SynthConfig cfg;
  cfg.count = 1;
  cfg.platoon_size = 4;
  cfg.duration = 20.0;
  cfg.seed = 2;
  ProfileSegment seg;  // hold at 12 m/s, no jitter, no noise
  seg.duration = 20.0;
  seg.v0 = 12.0;
  seg.v1 = 12.0;
  cfg.profile = {seg};

  Dataset ds = synthesize(cfg);
  const Platoon& pl = ds.platoons[0];
  const double gap = idm_equilibrium_gap(12.0, cfg.idm);
  for (int i = 1; i < pl.size(); ++i) {
    for (int t = 0; t < pl.steps(); ++t) {
      const double observed = pl.vehicles[i - 1].states[t].x - pl.vehicles[i].states[t].x;
      CHECK(std::abs(observed - gap) < 1e-6);
    }
  }
}

TEST_CASE("a braking leader propagates delayed dips downstream") {
  SynthConfig cfg;
  cfg.count = 1;
  cfg.platoon_size = 4;
  cfg.duration = 40.0;
  cfg.seed = 4;
  ProfileSegment cruise;
  cruise.duration = 10.0;
  cruise.v0 = cruise.v1 = 15.0;
  ProfileSegment brake;
  brake.kind = ProfileSegment::Kind::Ramp;
  brake.duration = 5.0;
  brake.v0 = 15.0;
  brake.v1 = 8.0;
  ProfileSegment recover;
  recover.kind = ProfileSegment::Kind::Ramp;
  recover.duration = 5.0;
  recover.v0 = 8.0;
  recover.v1 = 15.0;
  ProfileSegment tail;
  tail.duration = 20.0;
  tail.v0 = tail.v1 = 15.0;
  cfg.profile = {cruise, brake, recover, tail};

  Dataset ds = synthesize(cfg);
  const Platoon& pl = ds.platoons[0];
  std::vector<int> argmin(pl.size(), 0);
  for (int i = 0; i < pl.size(); ++i) {
    double lo = 1e18;
    for (int t = 0; t < pl.steps(); ++t) {
      if (pl.vehicles[i].states[t].v < lo) {
        lo = pl.vehicles[i].states[t].v;
        argmin[i] = t;
      }
    }
  }
  // Each follower bottoms out at or after its leader does.
  for (int i = 1; i < pl.size(); ++i) CHECK(argmin[i] >= argmin[i - 1]);
}

TEST_CASE("synthesis contract failures") {
  SynthConfig cfg;  // empty profile
  CHECK_THROWS_AS(synthesize(cfg), UsageError);

  SynthConfig fast;
  ProfileSegment seg;
  seg.v0 = seg.v1 = 40.0;  // at or above the idm desired speed
  seg.duration = 10.0;
  fast.profile = {seg};
  fast.duration = 10.0;
  CHECK_THROWS_AS(synthesize(fast), DataError);
}

TEST_CASE("fraction split is disjoint, complete and reproducible") {
  SynthConfig cfg;
  cfg.count = 8;
  cfg.platoon_size = 2;
  cfg.duration = 5.0;
  cfg.seed = 11;
  ProfileSegment seg;
  seg.duration = 5.0;
  cfg.profile = {seg};
  Dataset ds = synthesize(cfg);

  auto [train, eval] = split(ds, 0.25, 123);
  CHECK(train.platoons.size() == 6);
  CHECK(eval.platoons.size() == 2);
  std::set<std::uint64_t> seen;
  for (const auto& p : train.platoons) seen.insert(p.platoon_id);
  for (const auto& p : eval.platoons) seen.insert(p.platoon_id);
  CHECK(seen.size() == 8);

  auto [train2, eval2] = split(ds, 0.25, 123);
  CHECK(eval2.platoons[0].platoon_id == eval.platoons[0].platoon_id);
  auto [train3, eval3] = split(ds, 0.25, 124);
  CHECK((eval3.platoons[0].platoon_id != eval.platoons[0].platoon_id ||
         eval3.platoons[1].platoon_id != eval.platoons[1].platoon_id));
}

TEST_CASE("lane split sends the listed lanes to eval") {
  auto recs = parse_trajectory_csv(fixture("platoon_chain.csv"), Unit::Meters);
  Dataset ds = extract_platoons(recs, 2, 20.0, {}, 0.5);
  REQUIRE(!ds.platoons.empty());
  auto [train, eval] = split_by_lane(ds, {2});
  CHECK(train.platoons.empty());
  CHECK(eval.platoons.size() == ds.platoons.size());

  Dataset no_lanes = ds;
  no_lanes.platoon_lanes.clear();
  CHECK_THROWS_AS(split_by_lane(no_lanes, {2}), UsageError);
}

TEST_CASE("to_pairs slices platoons into consecutive pairs") {
  SynthConfig cfg;
  cfg.count = 1;
  cfg.platoon_size = 5;
  cfg.duration = 5.0;
  cfg.seed = 3;
  ProfileSegment seg;
  seg.duration = 5.0;
  cfg.profile = {seg};
  Dataset ds = synthesize(cfg);

  auto pairs = to_pairs(ds.platoons);
  REQUIRE(pairs.size() == 4);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    CHECK(pairs[k].platoon_id == k + 1);
    CHECK(pairs[k].size() == 2);
    CHECK(pairs[k].vehicles[0].vehicle_id == ds.platoons[0].vehicles[k].vehicle_id);
    CHECK(pairs[k].vehicles[1].vehicle_id == ds.platoons[0].vehicles[k + 1].vehicle_id);
    CHECK(pairs[k].vehicles[0].states[3].x == ds.platoons[0].vehicles[k].states[3].x);
  }
}

TEST_CASE("dataset json round trip preserves every number") {
  SynthConfig cfg;
  cfg.count = 2;
  cfg.platoon_size = 3;
  cfg.duration = 6.0;
  cfg.param_jitter = 0.1;
  cfg.noise_std = 0.03;
  cfg.seed = 17;
  ProfileSegment seg;
  seg.kind = ProfileSegment::Kind::Oscillation;
  seg.duration = 6.0;
  seg.v0 = 13.0;
  seg.amplitude = 2.0;
  seg.period = 7.0;
  cfg.profile = {seg};
  Dataset ds = synthesize(cfg);

  const std::string path = "roundtrip_ds.json";
  save_dataset(path, ds);
  Dataset back = load_dataset(path);
  std::remove(path.c_str());

  REQUIRE(back.platoons.size() == ds.platoons.size());
  CHECK(back.meta.source == ds.meta.source);
  CHECK(back.meta.dt == ds.meta.dt);
  for (std::size_t n = 0; n < ds.platoons.size(); ++n) {
    CHECK(back.platoons[n].platoon_id == ds.platoons[n].platoon_id);
    for (int i = 0; i < ds.platoons[n].size(); ++i) {
      CHECK(back.platoons[n].vehicles[i].vehicle_id == ds.platoons[n].vehicles[i].vehicle_id);
      CHECK(back.platoons[n].vehicles[i].t0 == ds.platoons[n].vehicles[i].t0);
      CHECK(back.platoons[n].vehicles[i].dt == ds.platoons[n].vehicles[i].dt);
      for (int t = 0; t < ds.platoons[n].steps(); ++t) {
        CHECK(back.platoons[n].vehicles[i].states[t].x == ds.platoons[n].vehicles[i].states[t].x);
        CHECK(back.platoons[n].vehicles[i].states[t].v == ds.platoons[n].vehicles[i].states[t].v);
        CHECK(back.platoons[n].vehicles[i].states[t].a == ds.platoons[n].vehicles[i].states[t].a);
      }
    }
  }
}

TEST_CASE("dataset loader rejects foreign json") {
  TempFile not_ds("not_dataset.json", "{\"format\": \"something-else\", \"version\": 1}");
  CHECK_THROWS_AS(load_dataset(not_ds.path), DataError);
  TempFile junk("junk.json", "this is not json");
  CHECK_THROWS_AS(load_dataset(junk.path), DataError);
}

}  // TEST_SUITE
