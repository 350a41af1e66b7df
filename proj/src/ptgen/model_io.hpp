#ifndef PTGEN_MODEL_IO_HPP
#define PTGEN_MODEL_IO_HPP

#include <string>
#include <vector>

#include "ptgen/network.hpp"

namespace ptgen {

// PTGM v1, little-endian; byte layout documented in FORMATS.md. Round trips
// are bitwise lossless.
void save_model(const std::string& path, const NetworkParams& params);
NetworkParams load_model(const std::string& path);

// Mid-training snapshot: everything fit() needs to continue a run exactly as
// if it had never stopped. PTGC v1, little-endian.
struct Checkpoint {
  NetworkParams params;
  NetworkParams best_params;
  OptimizerState opt;
  int epoch_next = 0;
  int diverge_count = 0;
  int best_epoch = -1;
  double best_inference = 0.0;
  std::vector<double> train_loss;
  std::vector<double> inference_loss;
};

void save_checkpoint(const std::string& path, const Checkpoint& c);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace ptgen

#endif
