#pragma once

#include "fmatch/fmap.hpp"
#include "fmatch/spectral.hpp"

#include <string>

namespace fmatch {

// Pointwise correspondence in pullback convention: assignment[j] is the
// SOURCE vertex matched to TARGET vertex j (consistent with C acting on
// source coefficients). Length equals the target vertex count.
struct PointMap {
  Eigen::VectorXi assignment;
  std::string source_id = "source";
  std::string target_id = "target";

  Eigen::Index size() const { return assignment.size(); }
};

// Row-wise exact nearest neighbor: out[j] = index of the row of points
// closest to row j of queries. Distances accumulate sequentially per
// coordinate so results equal a brute-force oracle bit for bit; ties go to
// the lowest index.
void nearest_rows(const Eigen::MatrixXd& points, const Eigen::MatrixXd& queries,
                  Eigen::VectorXi& out, unsigned jobs = 1);

// Exact nearest-neighbor conversion: for each target vertex j,
//   assignment[j] = argmin_i | (Phi2 C)_j - (Phi1)_i |.
PointMap fmap_to_p2p(const FunctionalMap& fmap, const SpectralBasis& basis1,
                     const SpectralBasis& basis2, unsigned jobs = 1);

// Adjoint conversion: C = Phi2[:, :k]^T M2 Pi Phi1[:, :k], with Pi the 0/1
// matrix of the assignment.
FunctionalMap p2p_to_fmap(const PointMap& map, const SpectralBasis& basis1,
                          const SpectralBasis& basis2, int k);

struct ZoomoutResult {
  FunctionalMap fmap;
  PointMap map;
};

// Spectral upsampling: alternate pointwise extraction and map re-estimation
// while growing the basis size from the size of c_init to k_final.
ZoomoutResult zoomout(const FunctionalMap& c_init, const SpectralBasis& basis1,
                      const SpectralBasis& basis2, int k_final, int step = 1, unsigned jobs = 1);

// Plain-text map file:
//   # p2p <source> <target> <n>
// followed by one 0-based source index per line.
void save_point_map(const PointMap& map, const std::string& path);
PointMap load_point_map(const std::string& path);

} // namespace fmatch
