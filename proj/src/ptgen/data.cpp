#include "ptgen/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ptgen/errors.hpp"
#include "ptgen/log.hpp"
#include "ptgen/rng.hpp"

namespace ptgen {

namespace {

constexpr double kFootInMeters = 0.3048;
constexpr int kMaxStoredWarnings = 50;

std::string normalize_name(std::string s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\'' || c == ' ' || c == '\r' || c == '\t') continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

int find_column(const std::vector<std::string>& header, const std::vector<std::string>& aliases) {
  for (std::size_t i = 0; i < header.size(); ++i)
    for (const std::string& a : aliases)
      if (header[i] == a) return static_cast<int>(i);
  return -1;
}

void add_warning(ParseStats* stats, int line_no, const std::string& msg) {
  if (!stats) return;
  ++stats->rows_skipped;
  if (static_cast<int>(stats->warnings.size()) < kMaxStoredWarnings)
    stats->warnings.push_back("line " + std::to_string(line_no) + ": " + msg);
}

bool parse_double(const std::string& s, double& out) {
  try {
    std::size_t pos = 0;
    out = std::stod(s, &pos);
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    return pos == s.size();
  } catch (...) {
    return false;
  }
}

bool parse_u64(const std::string& s, std::uint64_t& out) {
  try {
    std::size_t pos = 0;
    out = std::stoull(s, &pos);
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    return pos == s.size();
  } catch (...) {
    return false;
  }
}

}  // namespace

std::vector<RawRecord> parse_trajectory_csv(const std::string& path, Unit unit,
                                            ParseStats* stats) {
  std::ifstream in(path);
  if (!in) throw IoError("parse_trajectory_csv: cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file, expected a header row");
  std::vector<std::string> header = split_csv_line(line);
  for (std::string& h : header) h = normalize_name(h);

  int col_vehicle = find_column(header, {"vehicle_id", "veh_id", "vehicle", "id"});
  int col_time = find_column(header, {"frame_time", "time", "t", "global_time", "timestamp"});
  int col_lane = find_column(header, {"lane_id", "lane"});
  int col_pos = find_column(header, {"position", "local_y", "x", "pos", "distance"});
  int col_vel = find_column(header, {"velocity", "v_vel", "speed", "v"});
  int col_acc = find_column(header, {"acceleration", "v_acc", "accel", "a"});
  int col_prec = find_column(
      header, {"preceding", "preceding_id", "preceding_vehicle_id", "prec_veh_id", "leader",
               "leader_id"});

  std::string missing;
  auto require = [&](int col, const char* name) {
    if (col < 0) missing += missing.empty() ? name : std::string(", ") + name;
  };
  require(col_vehicle, "vehicle id");
  require(col_time, "time");
  require(col_lane, "lane");
  require(col_pos, "position");
  require(col_vel, "velocity");
  require(col_prec, "preceding id");
  if (!missing.empty())
    throw DataError(path + ": header is missing required columns: " + missing);

  double scale = unit == Unit::Feet ? kFootInMeters : 1.0;
  std::vector<RawRecord> records;
  std::vector<bool> has_accel;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      add_warning(stats, line_no, "expected " + std::to_string(header.size()) + " fields, got " +
                                      std::to_string(fields.size()));
      continue;
    }
    RawRecord rec;
    if (!parse_u64(fields[col_vehicle], rec.vehicle_id)) {
      add_warning(stats, line_no, "bad vehicle id '" + fields[col_vehicle] + "'");
      continue;
    }
    if (!parse_double(fields[col_time], rec.frame_time) || rec.frame_time < 0.0) {
      add_warning(stats, line_no, "bad frame time '" + fields[col_time] + "'");
      continue;
    }
    double lane;
    if (!parse_double(fields[col_lane], lane)) {
      add_warning(stats, line_no, "bad lane '" + fields[col_lane] + "'");
      continue;
    }
    rec.lane_id = static_cast<int>(lane);
    if (!parse_double(fields[col_pos], rec.position)) {
      add_warning(stats, line_no, "bad position '" + fields[col_pos] + "'");
      continue;
    }
    if (!parse_double(fields[col_vel], rec.velocity) || rec.velocity < 0.0) {
      add_warning(stats, line_no, "bad velocity '" + fields[col_vel] + "'");
      continue;
    }
    std::string prec = fields[col_prec];
    if (normalize_name(prec).empty()) {
      rec.preceding_id = 0;
    } else if (!parse_u64(prec, rec.preceding_id)) {
      add_warning(stats, line_no, "bad preceding id '" + prec + "'");
      continue;
    }
    bool accel_ok = false;
    if (col_acc >= 0 && !normalize_name(fields[col_acc]).empty()) {
      if (!parse_double(fields[col_acc], rec.acceleration)) {
        add_warning(stats, line_no, "bad acceleration '" + fields[col_acc] + "'");
        continue;
      }
      accel_ok = true;
    }
    rec.position *= scale;
    rec.velocity *= scale;
    rec.acceleration *= scale;
    records.push_back(rec);
    has_accel.push_back(accel_ok);
    if (stats) ++stats->rows_parsed;
  }

  // Backfill missing accelerations by per-vehicle backward differences of
  // velocity over time.
  bool any_missing = false;
  for (bool h : has_accel)
    if (!h) any_missing = true;
  if (any_missing) {
    if (stats) stats->acceleration_derived = true;
    std::map<std::uint64_t, std::vector<std::size_t>> by_vehicle;
    for (std::size_t k = 0; k < records.size(); ++k)
      by_vehicle[records[k].vehicle_id].push_back(k);
    for (auto& [veh, idxs] : by_vehicle) {
      std::sort(idxs.begin(), idxs.end(), [&](std::size_t a, std::size_t b) {
        return records[a].frame_time < records[b].frame_time;
      });
      for (std::size_t j = 0; j < idxs.size(); ++j) {
        if (has_accel[idxs[j]]) continue;
        if (j == 0) continue;  // fixed up below once a neighbour exists
        double dtv = records[idxs[j]].frame_time - records[idxs[j - 1]].frame_time;
        records[idxs[j]].acceleration =
            dtv > 0.0
                ? (records[idxs[j]].velocity - records[idxs[j - 1]].velocity) / dtv
                : 0.0;
      }
      if (!idxs.empty() && !has_accel[idxs[0]] && idxs.size() > 1)
        records[idxs[0]].acceleration = records[idxs[1]].acceleration;
    }
  }
  return records;
}

namespace {

// Uniform time grid shared by all records; extraction walks grid indices.
struct TimeGrid {
  std::vector<double> times;  // sorted unique
  double dt = 0.0;

  int index(double t) const {
    auto it = std::lower_bound(times.begin(), times.end(), t - 1e-6);
    if (it == times.end() || std::abs(*it - t) > 1e-6) return -1;
    return static_cast<int>(it - times.begin());
  }
};

TimeGrid build_grid(const std::vector<RawRecord>& records) {
  TimeGrid grid;
  grid.times.reserve(records.size());
  for (const RawRecord& r : records) grid.times.push_back(r.frame_time);
  std::sort(grid.times.begin(), grid.times.end());
  grid.times.erase(std::unique(grid.times.begin(), grid.times.end(),
                               [](double a, double b) { return std::abs(a - b) < 1e-6; }),
                   grid.times.end());
  if (grid.times.size() > 1) {
    grid.dt = grid.times[1] - grid.times[0];
    for (std::size_t g = 1; g + 1 < grid.times.size(); ++g) {
      double step = grid.times[g + 1] - grid.times[g];
      if (std::abs(step - grid.dt) > 1e-6)
        throw DataError("extract_platoons: records are not on a uniform time grid (gap " +
                        std::to_string(step) + " vs " + std::to_string(grid.dt) + ")");
    }
  }
  return grid;
}

}  // namespace

Dataset extract_platoons(const std::vector<RawRecord>& records, int min_vehicles,
                         double min_duration, const std::vector<int>& lanes, double dt_out) {
  if (min_vehicles < 2) throw UsageError("extract_platoons: min_vehicles must be at least 2");
  if (!(min_duration > 0.0) || !(dt_out > 0.0))
    throw UsageError("extract_platoons: durations must be positive");

  Dataset ds;
  ds.meta.source = "records";
  ds.meta.dt = dt_out;
  ds.meta.min_vehicles = min_vehicles;
  ds.meta.min_duration = min_duration;
  ds.meta.lanes = lanes;

  std::vector<RawRecord> filtered;
  for (const RawRecord& r : records)
    if (lanes.empty() || std::find(lanes.begin(), lanes.end(), r.lane_id) != lanes.end())
      filtered.push_back(r);
  if (filtered.empty()) return ds;

  TimeGrid grid = build_grid(filtered);
  int G = static_cast<int>(grid.times.size());
  if (G < 2) return ds;

  // presence[g]: vehicle -> record index at grid step g.
  std::vector<std::map<std::uint64_t, std::size_t>> presence(G);
  for (std::size_t k = 0; k < filtered.size(); ++k) {
    int g = grid.index(filtered[k].frame_time);
    if (g < 0) continue;
    if (!presence[g].emplace(filtered[k].vehicle_id, k).second)
      log_debug("duplicate record for vehicle " + std::to_string(filtered[k].vehicle_id) +
                " at t=" + std::to_string(filtered[k].frame_time));
  }

  auto link_valid = [&](int g, std::uint64_t follower) -> std::uint64_t {
    // Returns the leader id when the follower's chain link holds at step g.
    auto itf = presence[g].find(follower);
    if (itf == presence[g].end()) return 0;
    const RawRecord& f = filtered[itf->second];
    if (f.preceding_id == 0) return 0;
    auto itl = presence[g].find(f.preceding_id);
    if (itl == presence[g].end()) return 0;
    const RawRecord& l = filtered[itl->second];
    if (l.lane_id != f.lane_id) return 0;
    if (!(l.position > f.position)) return 0;
    return f.preceding_id;
  };

  // Candidate platoons: maximal chains found at any single grid step.
  std::set<std::vector<std::uint64_t>> candidates;
  for (int g = 0; g < G; ++g) {
    std::map<std::uint64_t, std::uint64_t> leader_of;  // follower -> leader at g
    std::set<std::uint64_t> is_leader;
    for (const auto& [veh, idx] : presence[g]) {
      std::uint64_t lead = link_valid(g, veh);
      if (lead != 0) {
        leader_of[veh] = lead;
        is_leader.insert(lead);
      }
    }
    for (const auto& [veh, lead] : leader_of) {
      if (is_leader.count(veh)) continue;  // not the tail of its chain
      std::vector<std::uint64_t> chain{veh};
      std::uint64_t cur = veh;
      while (true) {
        auto it = leader_of.find(cur);
        if (it == leader_of.end()) break;
        cur = it->second;
        chain.push_back(cur);
        if (chain.size() > presence[g].size()) throw DataError("preceding links form a cycle");
      }
      std::reverse(chain.begin(), chain.end());  // leader first
      if (static_cast<int>(chain.size()) >= min_vehicles) candidates.insert(chain);
    }
  }

  // Raw steps per studied window, duration counted as steps * dt.
  int K = static_cast<int>(std::llround(min_duration / grid.dt));
  if (K < 2) throw UsageError("extract_platoons: min_duration too short for the input rate");

  struct Window {
    std::vector<std::uint64_t> chain;
    int g_start = 0;
    int lane = 0;
  };
  std::vector<Window> windows;

  for (const auto& chain : candidates) {
    // chain_valid(g): every link holds and the whole chain sits in one lane.
    auto chain_lane = [&](int g) -> int {
      for (std::size_t j = 1; j < chain.size(); ++j)
        if (link_valid(g, chain[j]) != chain[j - 1]) return -1;
      auto it = presence[g].find(chain[0]);
      if (it == presence[g].end()) return -1;
      return filtered[it->second].lane_id;
    };
    int run_start = -1;
    int run_lane = -1;
    for (int g = 0; g <= G; ++g) {
      int lane = g < G ? chain_lane(g) : -1;
      if (lane >= 0 && (run_start < 0 || lane == run_lane)) {
        if (run_start < 0) {
          run_start = g;
          run_lane = lane;
        }
        continue;
      }
      if (run_start >= 0) {
        int run_len = g - run_start;
        for (int w = 0; w + K <= run_len; w += K)
          windows.push_back({chain, run_start + w, run_lane});
      }
      run_start = -1;
      run_lane = -1;
      if (lane >= 0) {  // lane flipped mid-run; a new run starts here
        run_start = g;
        run_lane = lane;
      }
    }
  }

  // Drop windows fully covered by a larger chain over the same period.
  std::vector<bool> dominated(windows.size(), false);
  for (std::size_t a = 0; a < windows.size(); ++a) {
    for (std::size_t b = 0; b < windows.size(); ++b) {
      if (a == b || dominated[a]) continue;
      if (windows[b].chain.size() <= windows[a].chain.size()) continue;
      if (windows[a].g_start < windows[b].g_start ||
          windows[a].g_start + K > windows[b].g_start + K)
        continue;
      bool subset = true;
      for (std::uint64_t v : windows[a].chain)
        if (std::find(windows[b].chain.begin(), windows[b].chain.end(), v) ==
            windows[b].chain.end()) {
          subset = false;
          break;
        }
      if (subset) dominated[a] = true;
    }
  }

  std::sort(windows.begin(), windows.end(), [](const Window& a, const Window& b) {
    if (a.g_start != b.g_start) return a.g_start < b.g_start;
    return a.chain < b.chain;
  });

  std::uint64_t next_id = 1;
  for (std::size_t w = 0; w < windows.size(); ++w) {
    if (dominated[w]) continue;
    const Window& win = windows[w];
    Platoon pl;
    pl.platoon_id = next_id;
    for (std::uint64_t veh : win.chain) {
      Trajectory traj;
      traj.vehicle_id = veh;
      traj.t0 = grid.times[win.g_start];
      traj.dt = grid.dt;
      for (int g = win.g_start; g < win.g_start + K; ++g) {
        const RawRecord& r = filtered[presence[g].at(veh)];
        traj.states.push_back({r.position, r.velocity, r.acceleration});
      }
      pl.vehicles.push_back(resample(traj, dt_out));
    }
    pl.validate();
    ds.platoons.push_back(std::move(pl));
    ds.platoon_lanes.push_back(win.lane);
    ++next_id;
  }
  return ds;
}

Trajectory resample(const Trajectory& traj, double dt_out) {
  if (!(dt_out > 0.0)) throw UsageError("resample: dt_out must be positive");
  if (traj.states.empty()) throw UsageError("resample: empty trajectory");
  if (traj.dt == dt_out) return traj;
  if (traj.steps() < 2) throw DataError("resample: cannot interpolate a single state");

  double span = (traj.steps() - 1) * traj.dt;
  int K = static_cast<int>(std::floor(span / dt_out + 1e-9)) + 1;
  if (K < 2) throw DataError("resample: output grid falls outside the input span");

  Trajectory out;
  out.vehicle_id = traj.vehicle_id;
  out.t0 = traj.t0;
  out.dt = dt_out;
  out.states.reserve(K);
  for (int k = 0; k < K; ++k) {
    double pos = k * dt_out / traj.dt;
    int i0 = static_cast<int>(std::floor(pos));
    if (i0 >= traj.steps() - 1) i0 = traj.steps() - 2;
    double frac = pos - i0;
    const VehicleState& s0 = traj.states[i0];
    const VehicleState& s1 = traj.states[i0 + 1];
    VehicleState s;
    s.x = s0.x + frac * (s1.x - s0.x);
    s.v = s0.v + frac * (s1.v - s0.v);
    out.states.push_back(s);
  }
  for (int k = 1; k < K; ++k)
    out.states[k].a = (out.states[k].v - out.states[k - 1].v) / dt_out;
  out.states[0].a = K > 1 ? out.states[1].a : 0.0;
  return out;
}

void SynthConfig::validate() const {
  if (!idm.valid()) throw UsageError("synth config: idm parameters must be strictly positive");
  if (profile.empty()) throw UsageError("synth config: leader profile is empty");
  for (const ProfileSegment& seg : profile) {
    if (!(seg.duration > 0.0)) throw UsageError("synth config: segment duration must be positive");
    if (seg.kind == ProfileSegment::Kind::Oscillation && !(seg.period > 0.0))
      throw UsageError("synth config: oscillation period must be positive");
  }
  if (platoon_size < 2) throw UsageError("synth config: platoon_size must be at least 2");
  if (!(duration > 0.0) || !(dt > 0.0)) throw UsageError("synth config: duration and dt must be positive");
  if (count < 1) throw UsageError("synth config: count must be at least 1");
  if (param_jitter < 0.0 || param_jitter > 0.5)
    throw UsageError("synth config: param_jitter must be in [0, 0.5]");
  if (noise_std < 0.0) throw UsageError("synth config: noise_std must be non-negative");
}

namespace {

double profile_speed(const std::vector<ProfileSegment>& profile, double t, double phase) {
  double start = 0.0;
  for (const ProfileSegment& seg : profile) {
    if (t <= start + seg.duration || &seg == &profile.back()) {
      double local = t - start;
      switch (seg.kind) {
        case ProfileSegment::Kind::Hold:
          return seg.v0;
        case ProfileSegment::Kind::Ramp: {
          double f = std::clamp(local / seg.duration, 0.0, 1.0);
          return seg.v0 + f * (seg.v1 - seg.v0);
        }
        case ProfileSegment::Kind::Oscillation:
          return seg.v0 +
                 seg.amplitude * std::sin(2.0 * 3.14159265358979323846 *
                                          (local / seg.period + phase));
      }
    }
    start += seg.duration;
  }
  return profile.back().v1;
}

IdmParams jitter_params(const IdmParams& base, double jitter, KeyedRng& rng) {
  IdmParams p = base;
  p.a_max *= 1.0 + jitter * rng.uniform(-1.0, 1.0);
  p.b *= 1.0 + jitter * rng.uniform(-1.0, 1.0);
  p.v0 *= 1.0 + jitter * rng.uniform(-1.0, 1.0);
  p.g_jam *= 1.0 + jitter * rng.uniform(-1.0, 1.0);
  p.t_headway *= 1.0 + jitter * rng.uniform(-1.0, 1.0);
  return p;
}

}  // namespace

Dataset synthesize(const SynthConfig& cfg) {
  cfg.validate();
  int T = static_cast<int>(std::llround(cfg.duration / cfg.dt));
  if (T < 2) throw UsageError("synth config: duration must cover at least 2 steps");

  nlohmann::json cfg_json;  // provenance snapshot, see save_dataset
  {
    nlohmann::json segs = nlohmann::json::array();
    for (const ProfileSegment& s : cfg.profile) {
      const char* kind = s.kind == ProfileSegment::Kind::Hold ? "hold"
                         : s.kind == ProfileSegment::Kind::Ramp ? "ramp"
                                                                : "oscillation";
      segs.push_back({{"kind", kind},
                      {"duration", s.duration},
                      {"v0", s.v0},
                      {"v1", s.v1},
                      {"amplitude", s.amplitude},
                      {"period", s.period}});
    }
    cfg_json = {{"platoon_size", cfg.platoon_size}, {"duration", cfg.duration},
                {"dt", cfg.dt},                     {"count", cfg.count},
                {"param_jitter", cfg.param_jitter}, {"noise_std", cfg.noise_std},
                {"randomize_phase", cfg.randomize_phase},
                {"seed", cfg.seed},                 {"profile", segs}};
  }

  Dataset ds;
  ds.meta.source = "synthesis";
  ds.meta.dt = cfg.dt;
  ds.meta.synth_config = cfg_json.dump();

  for (int n = 0; n < cfg.count; ++n) {
    double phase = 0.0;
    if (cfg.randomize_phase) {
      KeyedRng rng({0x70686173ull, cfg.seed, static_cast<std::uint64_t>(n)});
      phase = rng.uniform();
    }

    // Leader follows the script; its kinematics obey the integration rule.
    Trajectory leader;
    leader.vehicle_id = 1;
    leader.t0 = 0.0;
    leader.dt = cfg.dt;
    std::vector<double> v(T);
    for (int k = 0; k < T; ++k) {
      v[k] = profile_speed(cfg.profile, k * cfg.dt, phase);
      if (v[k] < 0.0)
        throw DataError("synthesize: leader profile yields negative speed at t=" +
                        std::to_string(k * cfg.dt));
    }
    leader.states.push_back({1000.0, v[0], 0.0});
    for (int k = 1; k < T; ++k) {
      VehicleState s;
      s.a = (v[k] - v[k - 1]) / cfg.dt;
      s.v = v[k];
      s.x = leader.states[k - 1].x + s.v * cfg.dt;
      leader.states.push_back(s);
    }

    Platoon pl;
    pl.platoon_id = static_cast<std::uint64_t>(n) + 1;
    pl.vehicles.push_back(std::move(leader));

    for (int i = 1; i < cfg.platoon_size; ++i) {
      KeyedRng rng({0x706172616dull, cfg.seed, static_cast<std::uint64_t>(n),
                    static_cast<std::uint64_t>(i)});
      IdmParams p = jitter_params(cfg.idm, cfg.param_jitter, rng);
      double v_init = v[0];
      if (!(v_init < p.v0))
        throw DataError("synthesize: initial speed reaches a vehicle's desired speed; "
                        "no equilibrium gap exists");
      double gap = idm_equilibrium_gap(v_init, p);

      Trajectory traj;
      traj.vehicle_id = static_cast<std::uint64_t>(i) + 1;
      traj.t0 = 0.0;
      traj.dt = cfg.dt;
      const std::vector<VehicleState>& ahead = pl.vehicles[i - 1].states;
      traj.states.push_back({ahead[0].x - gap, v_init, 0.0});
      for (int k = 0; k < T - 1; ++k) {
        double a = idm_acceleration(features(traj.states[k], ahead[k]), p);
        traj.states.push_back(integrate_step(traj.states[k], a, cfg.dt));
      }
      pl.vehicles.push_back(std::move(traj));
    }

    if (cfg.noise_std > 0.0) {
      for (int i = 0; i < pl.size(); ++i) {
        KeyedRng rng({0x6e6f6973ull, cfg.seed, static_cast<std::uint64_t>(n),
                      static_cast<std::uint64_t>(i)});
        for (VehicleState& s : pl.vehicles[i].states) s.x += rng.normal(0.0, cfg.noise_std);
      }
    }

    pl.validate();
    ds.platoons.push_back(std::move(pl));
  }
  return ds;
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double eval_fraction, std::uint64_t seed) {
  if (ds.platoons.empty()) throw DataError("split: dataset is empty");
  if (!(eval_fraction >= 0.0 && eval_fraction <= 1.0))
    throw UsageError("split: eval_fraction must be in [0, 1]");

  int n = static_cast<int>(ds.platoons.size());
  int n_eval = static_cast<int>(std::llround(eval_fraction * n));
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  KeyedRng rng({0x73706c69ull, seed});
  for (int i = n - 1; i > 0; --i) {
    int j = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(i + 1));
    std::swap(order[i], order[j]);
  }
  std::vector<bool> in_eval(n, false);
  for (int k = 0; k < n_eval; ++k) in_eval[order[k]] = true;

  Dataset train, eval;
  train.meta = ds.meta;
  eval.meta = ds.meta;
  for (int k = 0; k < n; ++k) {
    Dataset& side = in_eval[k] ? eval : train;
    side.platoons.push_back(ds.platoons[k]);
    if (!ds.platoon_lanes.empty()) side.platoon_lanes.push_back(ds.platoon_lanes[k]);
  }
  if (train.platoons.empty() || eval.platoons.empty())
    log_warn("split produced an empty side (eval_fraction " + std::to_string(eval_fraction) + ")");
  return {std::move(train), std::move(eval)};
}

std::pair<Dataset, Dataset> split_by_lane(const Dataset& ds, const std::vector<int>& eval_lanes) {
  if (ds.platoons.empty()) throw DataError("split_by_lane: dataset is empty");
  if (ds.platoon_lanes.size() != ds.platoons.size())
    throw UsageError("split_by_lane: dataset has no lane information");

  Dataset train, eval;
  train.meta = ds.meta;
  eval.meta = ds.meta;
  for (std::size_t k = 0; k < ds.platoons.size(); ++k) {
    bool in_eval = std::find(eval_lanes.begin(), eval_lanes.end(), ds.platoon_lanes[k]) !=
                   eval_lanes.end();
    Dataset& side = in_eval ? eval : train;
    side.platoons.push_back(ds.platoons[k]);
    side.platoon_lanes.push_back(ds.platoon_lanes[k]);
  }
  if (train.platoons.empty() || eval.platoons.empty())
    log_warn("lane split produced an empty side");
  return {std::move(train), std::move(eval)};
}

std::vector<Platoon> to_pairs(const std::vector<Platoon>& platoons) {
  std::vector<Platoon> pairs;
  std::uint64_t next_id = 1;
  for (const Platoon& pl : platoons) {
    for (int i = 1; i < pl.size(); ++i) {
      Platoon pair;
      pair.platoon_id = next_id++;
      pair.vehicles.push_back(pl.vehicles[i - 1]);
      pair.vehicles.push_back(pl.vehicles[i]);
      pairs.push_back(std::move(pair));
    }
  }
  return pairs;
}

namespace {

nlohmann::json platoon_to_json(const Platoon& pl) {
  nlohmann::json vehicles = nlohmann::json::array();
  for (const Trajectory& t : pl.vehicles) {
    nlohmann::json states = nlohmann::json::array();
    for (const VehicleState& s : t.states) states.push_back({s.x, s.v, s.a});
    vehicles.push_back({{"vehicle_id", t.vehicle_id},
                        {"t0", t.t0},
                        {"dt", t.dt},
                        {"states", std::move(states)}});
  }
  return {{"platoon_id", pl.platoon_id}, {"vehicles", std::move(vehicles)}};
}

Platoon platoon_from_json(const nlohmann::json& j) {
  Platoon pl;
  pl.platoon_id = j.at("platoon_id").get<std::uint64_t>();
  for (const auto& vj : j.at("vehicles")) {
    Trajectory t;
    t.vehicle_id = vj.at("vehicle_id").get<std::uint64_t>();
    t.t0 = vj.at("t0").get<double>();
    t.dt = vj.at("dt").get<double>();
    for (const auto& sj : vj.at("states")) {
      if (!sj.is_array() || sj.size() != 3) throw DataError("dataset state must be [x, v, a]");
      t.states.push_back({sj[0].get<double>(), sj[1].get<double>(), sj[2].get<double>()});
    }
    pl.vehicles.push_back(std::move(t));
  }
  return pl;
}

}  // namespace

void save_dataset(const std::string& path, const Dataset& ds) {
  nlohmann::json j;
  j["format"] = "ptgen-dataset";
  j["version"] = 1;
  j["meta"] = {{"source", ds.meta.source},
               {"dt", ds.meta.dt},
               {"min_vehicles", ds.meta.min_vehicles},
               {"min_duration", ds.meta.min_duration},
               {"lanes", ds.meta.lanes}};
  if (!ds.meta.synth_config.empty())
    j["meta"]["synth_config"] = nlohmann::json::parse(ds.meta.synth_config);
  if (!ds.platoon_lanes.empty()) j["platoon_lanes"] = ds.platoon_lanes;
  nlohmann::json platoons = nlohmann::json::array();
  for (const Platoon& pl : ds.platoons) platoons.push_back(platoon_to_json(pl));
  j["platoons"] = std::move(platoons);

  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("save_dataset: cannot open " + path + " for writing");
  out << j.dump(1) << "\n";
  if (!out) throw IoError("save_dataset: write failed for " + path);
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_dataset: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("load_dataset: " + path + " is not valid JSON: " + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "ptgen-dataset")
      throw DataError("load_dataset: " + path + " is not a dataset file");
    if (j.at("version").get<int>() != 1)
      throw DataError("load_dataset: unsupported dataset version");
    Dataset ds;
    const auto& meta = j.at("meta");
    ds.meta.source = meta.at("source").get<std::string>();
    ds.meta.dt = meta.at("dt").get<double>();
    ds.meta.min_vehicles = meta.at("min_vehicles").get<int>();
    ds.meta.min_duration = meta.at("min_duration").get<double>();
    ds.meta.lanes = meta.at("lanes").get<std::vector<int>>();
    if (meta.contains("synth_config")) ds.meta.synth_config = meta.at("synth_config").dump();
    if (j.contains("platoon_lanes")) ds.platoon_lanes = j.at("platoon_lanes").get<std::vector<int>>();
    for (const auto& pj : j.at("platoons")) ds.platoons.push_back(platoon_from_json(pj));
    if (!ds.platoon_lanes.empty() && ds.platoon_lanes.size() != ds.platoons.size())
      throw DataError("load_dataset: platoon_lanes length mismatch");
    return ds;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("load_dataset: " + path + " has malformed fields: " + e.what());
  }
}

}  // namespace ptgen
