#pragma once

#include "fmatch/fmap.hpp"
#include "fmatch/partial.hpp"

#include <cstdint>
#include <string>

namespace fmatch {

struct ZoomoutConfig {
  int k_final = 120;
  int step = 1;
};

struct TrainingConfig {
  double learning_rate = 1e-4;
  int steps = 1000;
  int batch_size = 8;
  std::uint64_t seed = 0;
  std::string init = "identity"; // or "random"
};

struct RunConfig {
  int k = 30;
  int k_partial = 60;
  int rank_cap = 40;
  ZoomoutConfig zoomout;
  LossWeights loss_weights;
  double alpha = 0.0;              // commutativity ridge weight; 0 = plain solve
  std::string mode = "plain_lsq"; // or "commutativity_weighted"
  TrainingConfig training;
  std::string up_axis = "+y";
  std::string forward_axis = "+z";
  std::string descriptors = "hks+wks"; // hks, wks, hks+wks, optionally +xyz
  unsigned jobs = 1;

  FmapSolveOptions solve_options() const;
  TrainHyper train_hyper() const;
  PartialConfig partial_config() const;
};

// Parse a JSON config file. Unknown keys and wrong value types raise
// InputError naming the offending field.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& json_text, const std::string& origin);

// Canonical JSON rendering (fixed key order) and its hash; manifests store
// the hash so runs can be tied to the exact configuration.
std::string config_to_json(const RunConfig& cfg);
std::string config_hash(const RunConfig& cfg);

void validate_config(const RunConfig& cfg);

} // namespace fmatch
