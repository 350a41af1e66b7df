#include "ptgen/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ptgen/errors.hpp"
#include "ptgen/rng.hpp"
#include "ptgen/sampling.hpp"
#include "ptgen/training.hpp"

namespace ptgen {

namespace {

// Flat-index attribution: (name, size) per parameter block in flatten order.
std::vector<std::pair<std::string, int>> block_layout(const NetworkParams& p) {
  std::vector<std::pair<std::string, int>> blocks;
  const char* gate_names = "ifoc";
  int in = p.input_dim;
  for (std::size_t l = 0; l < p.layer_sizes.size(); ++l) {
    int hidden = p.layer_sizes[l];
    for (int g = 0; g < 4; ++g) {
      std::string tag = "L" + std::to_string(l) + "." + gate_names[g];
      blocks.push_back({tag + ".W", hidden * in});
      blocks.push_back({tag + ".U", hidden * hidden});
      blocks.push_back({tag + ".b", hidden});
    }
    in = hidden;
  }
  blocks.push_back({"head.w", p.layer_sizes.back()});
  blocks.push_back({"head.b", 1});
  return blocks;
}

// States with velocities near 12 m/s and a gap near 50 m: far enough from
// the v >= 0 and gap clamps that the tiny head (|a| < 2 m/s^2) can never
// reach them in a short rollout, keeping the checked function smooth.
void make_trial_data(KeyedRng& rng, int T, double dt, std::vector<VehicleState>& own,
                     std::vector<VehicleState>& leader) {
  double pf = rng.uniform(0.0, 6.28);
  double pl = rng.uniform(0.0, 6.28);
  own.clear();
  leader.clear();
  own.push_back({0.0, 12.0 + std::sin(pf), 0.0});
  leader.push_back({50.0 + rng.uniform(-5.0, 5.0), 12.0 + std::sin(pl), 0.0});
  for (int t = 1; t < T; ++t) {
    double vf = 12.0 + std::sin(0.9 * t + pf);
    double vl = 12.0 + std::sin(0.7 * t + pl);
    own.push_back({own[t - 1].x + vf * dt, vf, (vf - own[t - 1].v) / dt});
    leader.push_back({leader[t - 1].x + vl * dt, vl, (vl - leader[t - 1].v) / dt});
  }
}

}  // namespace

std::string GradCheckReport::format() const {
  std::ostringstream os;
  os << "gradient check: max relative error " << max_rel_err << " -> "
     << (pass ? "PASS" : "FAIL") << "\n";
  for (const GradCheckBlock& b : blocks)
    os << "  " << b.name << ": " << b.worst_rel_err << "\n";
  return os.str();
}

GradCheckReport run_gradcheck(const GradCheckOptions& opts) {
  if (opts.steps < 2) throw UsageError("gradcheck: need at least 2 steps");
  if (opts.trials < 1) throw UsageError("gradcheck: need at least 1 trial");
  if (!(opts.fd_step > 0.0)) throw UsageError("gradcheck: fd_step must be positive");

  const double dt = 0.5;
  GradCheckReport rep;

  for (int trial = 0; trial < opts.trials; ++trial) {
    NetworkParams params =
        init_params(opts.layer_sizes, combine_keys({0x67636b69ull, opts.seed,
                                                    static_cast<std::uint64_t>(trial)}));
    params.norm_mean << 12.0, 0.0, 50.0;
    params.norm_std << 2.0, 1.0, 5.0;

    KeyedRng rng({0x67636b64ull, opts.seed, static_cast<std::uint64_t>(trial)});
    std::vector<VehicleState> own, leader;
    make_trial_data(rng, opts.steps, dt, own, leader);
    SampleMask mask = sample_mask(0.5, opts.steps,
                                  combine_keys({0x67636b6dull, opts.seed,
                                                static_cast<std::uint64_t>(trial)}));

    MaskedRollout rolled = masked_rollout(params, own, leader, leader, mask, dt, true);
    int T = opts.steps;
    std::vector<double> pgrads(T - 1);
    for (int t = 1; t < T; ++t)
      pgrads[t - 1] = 2.0 * (rolled.gen[t].x - own[t].x) / T;

    std::vector<double> analytic = backward_rollout(params, rolled.tape, pgrads);
    if (opts.perturb_index >= 0 &&
        opts.perturb_index < static_cast<long>(analytic.size()))
      analytic[opts.perturb_index] += opts.perturb_amount;

    FrozenRollout fr = freeze_rollout(own, leader, leader, mask, rolled, dt);
    std::vector<double> fd = finite_difference_gradient(
        [&](const NetworkParams& p) { return frozen_loss(p, fr); }, params, opts.fd_step);

    auto blocks = block_layout(params);
    if (rep.blocks.empty())
      for (const auto& [name, size] : blocks) rep.blocks.push_back({name, 0.0});

    std::size_t k = 0;
    std::size_t block_idx = 0;
    int left = blocks[0].second;
    for (; k < analytic.size(); ++k) {
      while (left == 0) {
        ++block_idx;
        left = blocks[block_idx].second;
      }
      double denom = std::max({std::abs(analytic[k]), std::abs(fd[k]), 1e-5});
      double rel = std::abs(analytic[k] - fd[k]) / denom;
      rep.max_rel_err = std::max(rep.max_rel_err, rel);
      rep.blocks[block_idx].worst_rel_err = std::max(rep.blocks[block_idx].worst_rel_err, rel);
      --left;
    }
  }
  rep.pass = rep.max_rel_err < opts.tolerance;
  return rep;
}

}  // namespace ptgen
