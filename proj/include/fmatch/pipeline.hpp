#pragma once

#include "fmatch/config.hpp"
#include "fmatch/descriptors.hpp"
#include "fmatch/eval.hpp"
#include "fmatch/mesh.hpp"
#include "fmatch/p2p.hpp"
#include "fmatch/partial.hpp"
#include "fmatch/spectral.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fmatch {

inline constexpr const char* kToolVersion = "fmatch 0.1.0";

// A mesh with everything the matchers need: pose-normalized geometry, the
// cached eigenbasis, and the configured descriptor matrix.
struct ShapeData {
  TriMesh mesh;
  SpectralBasis basis;
  Eigen::MatrixXd descriptors;
  std::string mesh_path;
  std::string mesh_hash;
  std::string basis_path;
  std::string desc_path;
  bool cache_hit = false;
};

// Load a mesh and return its spectral basis and descriptors, reusing cache
// files in cache_dir when their content key matches (mesh bytes + the
// config fields that influence them). Corrupt caches are recomputed with a
// warning; a hit is logged to stderr.
ShapeData load_shape(const std::string& mesh_path, const RunConfig& cfg,
                     const std::string& cache_dir);

// Descriptor matrix for a spec string like "hks+wks+xyz".
Eigen::MatrixXd build_descriptors(const TriMesh& mesh, const SpectralBasis& basis,
                                  const std::string& spec);

struct MatchOutput {
  FunctionalMap c12; // as written to disk (refined if requested)
  PointMap map;
  LossReport loss;
  bool refined = false;
};

MatchOutput run_match(const std::string& source_path, const std::string& target_path,
                      const RunConfig& cfg, const std::string& cache_dir,
                      const std::string& out_dir, bool refine,
                      const std::optional<std::string>& weights_path = std::nullopt);

struct PartialMatchOutput {
  AlignmentMatrix alignment;
  PointMap map;
  double offdiag = 0.0;
  bool refined = false;
};

PartialMatchOutput run_partial_match(const std::string& full_path,
                                     const std::string& partial_path, const RunConfig& cfg,
                                     const std::string& cache_dir, const std::string& out_dir,
                                     bool refine,
                                     const std::optional<std::string>& weights_path = std::nullopt);

// Train descriptor-combination weights from a JSON pair manifest:
//   { "mode": "full"|"partial", "d_out": N,
//     "pairs": [ {"first": path, "second": path}, ... ] }
// In partial mode "first" is the full shape. Writes weights.fmmat, trace.csv
// and summary.json to out_dir.
TrainResult run_train_weights(const std::string& manifest_path, const RunConfig& cfg,
                              const std::string& cache_dir, const std::string& out_dir);

ErrorSummary run_eval(const std::string& predicted_path, const std::string& truth_path,
                      const std::string& mesh_path, const RunConfig& cfg,
                      const std::string& out_dir);

} // namespace fmatch
