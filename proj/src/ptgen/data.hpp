#ifndef PTGEN_DATA_HPP
#define PTGEN_DATA_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ptgen/core.hpp"
#include "ptgen/models.hpp"

namespace ptgen {

enum class Unit { Meters, Feet };

// One row of an NGSIM-style trajectory table.
struct RawRecord {
  std::uint64_t vehicle_id = 0;
  double frame_time = 0.0;  // s
  int lane_id = 0;
  double position = 0.0;      // longitudinal, m
  double velocity = 0.0;      // m/s
  double acceleration = 0.0;  // m/s^2
  std::uint64_t preceding_id = 0;  // 0 = no leader
};

struct ParseStats {
  int rows_parsed = 0;
  int rows_skipped = 0;
  bool acceleration_derived = false;
  std::vector<std::string> warnings;  // first few, line-numbered
};

// Comma-separated text with a named header; see FORMATS.md for the accepted
// column aliases. Feet inputs are converted on the way in. Rows with
// malformed mandatory fields are skipped and counted; a malformed header is
// fatal. When no acceleration column exists it is derived per vehicle by
// backward velocity differences.
std::vector<RawRecord> parse_trajectory_csv(const std::string& path, Unit unit,
                                            ParseStats* stats = nullptr);

struct DatasetMeta {
  std::string source;  // file path or "synthesis"
  double dt = 0.5;
  int min_vehicles = 0;
  double min_duration = 0.0;
  std::vector<int> lanes;     // lane filter applied; empty = all
  std::string synth_config;   // JSON text of the SynthConfig when synthesized
};

struct Dataset {
  std::vector<Platoon> platoons;
  std::vector<int> platoon_lanes;  // parallel to platoons; empty when unknown
  DatasetMeta meta;
};

// Platoon extraction per the studied-period filters: vehicles chained by
// preceding_id within one lane, windows where the whole chain persists,
// trimmed to disjoint leading-aligned windows of exactly min_duration
// (duration counted as steps * dt), then resampled to dt_out.
Dataset extract_platoons(const std::vector<RawRecord>& records, int min_vehicles = 5,
                         double min_duration = 20.0, const std::vector<int>& lanes = {},
                         double dt_out = 0.5);

// Linear interpolation of position and velocity onto the dt_out grid;
// acceleration recomputed from the resampled velocity. Identity when the
// input is already on that grid.
Trajectory resample(const Trajectory& traj, double dt_out = 0.5);

struct ProfileSegment {
  enum class Kind { Hold, Ramp, Oscillation };
  Kind kind = Kind::Hold;
  double duration = 20.0;  // s
  double v0 = 15.0;        // hold speed / ramp start / oscillation mean
  double v1 = 15.0;        // ramp end
  double amplitude = 0.0;  // oscillation half-swing
  double period = 30.0;    // oscillation period
};

// Synthetic stand-in for recorded data: an IDM platoon tracking a scripted
// leader, with per-vehicle parameter jitter and optional observation noise.
struct SynthConfig {
  IdmParams idm;
  std::vector<ProfileSegment> profile;
  int platoon_size = 5;
  double duration = 20.0;
  double dt = 0.5;
  int count = 1;
  double param_jitter = 0.0;     // fraction, uniform per vehicle and parameter
  double noise_std = 0.0;        // additive position noise on the observed copy, m
  bool randomize_phase = true;   // per-platoon phase for oscillation segments
  std::uint64_t seed = 0;

  void validate() const;
};

Dataset synthesize(const SynthConfig& cfg);

// Deterministic fraction split; eval gets round(eval_fraction * n) platoons.
std::pair<Dataset, Dataset> split(const Dataset& ds, double eval_fraction, std::uint64_t seed);

// Platoons on the listed lanes go to eval; requires lane information.
std::pair<Dataset, Dataset> split_by_lane(const Dataset& ds, const std::vector<int>& eval_lanes);

// Every consecutive (leader, follower) slice as a 2-vehicle platoon, ids
// renumbered sequentially.
std::vector<Platoon> to_pairs(const std::vector<Platoon>& platoons);

// Canonical dataset document (JSON); doubles round-trip losslessly.
void save_dataset(const std::string& path, const Dataset& ds);
Dataset load_dataset(const std::string& path);

}  // namespace ptgen

#endif
