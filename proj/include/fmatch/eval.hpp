#pragma once

#include "fmatch/mesh.hpp"
#include "fmatch/p2p.hpp"

#include <string>
#include <vector>

namespace fmatch {

// Geodesic distances from each listed source vertex to every vertex,
// computed with Dijkstra on the edge graph (edge weight = Euclidean length).
// Row i of the result holds distances from sources[i].
Eigen::MatrixXd geodesic_distances(const TriMesh& mesh, const std::vector<int>& sources,
                                   unsigned jobs = 1);

struct ErrorSummary {
  Eigen::VectorXd per_vertex_errors; // geodesic, normalized by sqrt(source area)
  double mean_x100 = 0.0;
  std::vector<double> pck_thresholds; // 0.00, 0.01, ..., 0.25
  std::vector<double> pck;            // fraction with error <= threshold
};

// Accuracy of a predicted map against ground truth (both in pullback
// convention: entry j = source vertex for target vertex j). Errors are
// geodesic distances on the source between predicted and true images.
ErrorSummary evaluate_map(const PointMap& predicted, const PointMap& truth,
                          const TriMesh& source_mesh, unsigned jobs = 1);

struct NamedSummary {
  std::string id; // pair label, e.g. "cat0:cat3"
  ErrorSummary summary;
};

// Three files in out_dir, byte-identical across runs: means.csv (one row per
// pair), pck.csv (pair,threshold,fraction), pck.svg (one curve per pair).
void write_report(const std::vector<NamedSummary>& summaries, const std::string& out_dir);

} // namespace fmatch
