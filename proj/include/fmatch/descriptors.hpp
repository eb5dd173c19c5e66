#pragma once

#include "fmatch/mesh.hpp"
#include "fmatch/spectral.hpp"

#include <string>
#include <vector>

namespace fmatch {

enum class DescriptorSource { Hks, Wks, External, Combined };

// Per-vertex probe functions, one column per descriptor.
struct DescriptorSet {
  Eigen::MatrixXd values; // n x d
  std::vector<std::string> labels;
  DescriptorSource source = DescriptorSource::External;

  Eigen::Index n() const { return values.rows(); }
  Eigen::Index d() const { return values.cols(); }
};

// Linear map from d_in input descriptors to d_out combined ones; the same
// matrix must be applied to both shapes of a pair (siamese constraint,
// enforced by the training loops).
struct CombinationWeights {
  Eigen::MatrixXd matrix; // d_in x d_out
};

// Heat kernel signature, one column per diffusion time:
//   hks_t(v) = sum_i exp(-lambda_i t) phi_i(v)^2
// Columns are normalized to unit mass-weighted L2 norm unless `normalize`
// is false.
DescriptorSet hks(const SpectralBasis& basis, const std::vector<double>& times,
                  bool normalize = true);

// Wave kernel signature, one column per energy level. Eigenvalues <= 1e-8
// are skipped; throws InputError if none remain.
DescriptorSet wks(const SpectralBasis& basis, const std::vector<double>& energies, double sigma,
                  bool normalize = true);

// Default samplings: 16 log-spaced HKS times on [4 ln10 / lambda_max,
// 4 ln10 / lambda_min+], and 16 WKS energies linear in log-eigenvalue range
// with sigma = 7 * range / 16.
std::vector<double> default_hks_times(const SpectralBasis& basis, int count = 16);
std::pair<std::vector<double>, double> default_wks_energies(const SpectralBasis& basis,
                                                            int count = 16);

// Vertex coordinates as three probe functions (weak-supervision probes for
// rigidly aligned inputs), mass-normalized per column.
DescriptorSet coordinate_descriptors(const TriMesh& mesh, const SpectralBasis& basis);

// Externally computed descriptors from CSV or FMMAT1. Row count must equal
// the mesh vertex count; non-finite entries are rejected with their cell
// coordinates.
DescriptorSet load_descriptors(const std::string& path, const TriMesh& mesh);

// values * w.matrix; emits a rank warning when the combination collapses
// (zero column in the output).
DescriptorSet combine(const DescriptorSet& desc, const CombinationWeights& w);

// Column-wise concatenation (same vertex count required).
DescriptorSet concat(const DescriptorSet& a, const DescriptorSet& b);

} // namespace fmatch
