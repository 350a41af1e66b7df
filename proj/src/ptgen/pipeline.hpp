#ifndef PTGEN_PIPELINE_HPP
#define PTGEN_PIPELINE_HPP

#include <string>

#include "ptgen/config.hpp"
#include "ptgen/gradcheck.hpp"
#include "ptgen/training.hpp"

namespace ptgen {

// Command bodies behind the CLI and the C API. Every command writes its
// outputs plus resolved_config.json into out_dir; nothing in the outputs
// depends on wall-clock time, so reruns with one seed are byte-identical.

// Synthesize a dataset and split it: train.json, eval.json, manifest.json.
void run_synth(const RunConfig& cfg, const std::string& out_dir);

// Same outputs, but platoons extracted from the CSV named by data.csv.
void run_extract(const RunConfig& cfg, const std::string& out_dir);

// Train per train.mode on data.train_dataset / data.eval_dataset. Writes
// model.ptgm (final), model_best.ptgm, losses.csv. When train.sweep names
// decay families, repeats per family under out_dir/<family>/ from the same
// initial weights and summarizes eval metrics in sweep.csv.
TrainReport run_train(const RunConfig& cfg, const std::string& out_dir);

// Generate follower trajectories for every platoon in data.eval_dataset
// from its leader: generated.json plus a long-form trajectories.csv.
void run_generate(const RunConfig& cfg, const std::string& out_dir);

// Compare eval.generated against data.eval_dataset: metrics.json,
// ae_cdf.csv, pmaae_cdf.csv, one grid_<platoon>.csv per platoon.
void run_evaluate(const RunConfig& cfg, const std::string& out_dir);

// Analytic-vs-numeric gradient audit; report text goes to gradcheck.txt.
GradCheckReport run_gradcheck_cmd(const RunConfig& cfg, const std::string& out_dir);

}  // namespace ptgen

#endif
