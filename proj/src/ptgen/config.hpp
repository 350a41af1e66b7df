#ifndef PTGEN_CONFIG_HPP
#define PTGEN_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "ptgen/data.hpp"
#include "ptgen/gradcheck.hpp"
#include "ptgen/models.hpp"
#include "ptgen/sampling.hpp"

namespace ptgen {

struct DataConfig {
  std::string dataset;        // raw dataset to split (synth/extract output)
  std::string train_dataset;  // explicit train/eval inputs for the commands
  std::string eval_dataset;
  std::string csv;            // raw trajectory table for extraction
  Unit units = Unit::Meters;
  int min_vehicles = 5;
  double min_duration = 20.0;
  std::vector<int> lanes;
  double dt = 0.5;
  double eval_fraction = 0.1;
  std::vector<int> eval_lanes;  // non-empty switches split to lane rule
};

struct ModelConfig {
  std::string kind = "lstm";  // lstm | idm
  std::vector<int> layers{10, 10, 5};
  std::string file;  // model path; trained output or inference input
  IdmParams idm;
};

struct TrainSection {
  std::string mode = "platoon";  // pair | platoon
  int epochs = 100;
  double alpha = 1e-3;
  std::string optimizer = "adam";  // adam | sgd
  int batch_size = 0;
  DecaySchedule schedule{DecayFamily::InverseSigmoid, 0.25, 25.0, 100};
  std::string checkpoint;
  bool resume = false;
  std::vector<std::string> sweep;  // decay families for a Table-II style run
};

struct EvalSection {
  std::string generated;  // generated dataset consumed by evaluate
};

struct RunConfig {
  std::uint64_t seed = 0;
  DataConfig data;
  ModelConfig model;
  TrainSection train;
  EvalSection eval;
  SynthConfig synth;
  GradCheckOptions gradcheck;
};

// Defaults for every field; the schedule carries the published parameter
// choices for its family.
RunConfig default_run_config();

// Parse a JSON config file over the defaults. Unknown keys are rejected with
// their full path; schedule w/c fall back to the family's published values
// for the configured epoch count.
RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(const std::string& json_text, const std::string& origin);

// Canonical fully-resolved dump; written next to every command's outputs.
std::string dump_run_config(const RunConfig& cfg);

// Schedule preset: the family's published w/c for the given horizon.
DecaySchedule schedule_for_family(DecayFamily family, int epoch_max);

}  // namespace ptgen

#endif
