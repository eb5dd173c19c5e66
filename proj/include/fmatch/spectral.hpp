#pragma once

#include "fmatch/mesh.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace fmatch {

// Cotangent stiffness plus lumped mass. Stiffness is positive semi-definite
// with zero row sums; off-diagonal entry for edge (i,j) is
// -(cot a + cot b)/2 over the incident triangles.
struct LaplacianPair {
  Eigen::SparseMatrix<double> stiffness;
  Eigen::VectorXd mass;      // diagonal of the mass matrix
  int clamped_cotangents = 0; // how many cot values hit the clamp
};

// Truncated eigenbasis of (stiffness, mass). Columns of phi are
// M-orthonormal, eigenvalues ascending, sign fixed so the entry of largest
// magnitude in each column is positive.
struct SpectralBasis {
  Eigen::MatrixXd phi;    // n x k
  Eigen::VectorXd lambda; // k, ascending, nonnegative
  Eigen::VectorXd mass;   // n, diagonal mass
  int k = 0;

  Eigen::Index n() const { return phi.rows(); }
  double total_area() const { return mass.sum(); }
};

struct EigOptions {
  enum class Method { Auto, Dense, Iterative };
  Method method = Method::Auto;  // Auto: dense for n <= 512
  double shift = -1e-8;          // keeps the singular constant mode factorizable
  double tol = 1e-10;            // relative eigenpair residual
  int max_iterations = 500;
  std::uint64_t seed = 0x5eedbeef;
};

LaplacianPair build_laplacian(const TriMesh& mesh);

// k algebraically smallest generalized eigenpairs of (W, M), 1 <= k < n.
// Throws SolverError (carrying the achieved residual) if the iteration does
// not converge.
SpectralBasis eigenbasis(const LaplacianPair& lap, int k, const EigOptions& opts = {});

// Spectral coefficients of per-vertex functions: phi^T M f. f is n x d.
Eigen::MatrixXd project(const SpectralBasis& basis, const Eigen::MatrixXd& f);

// Back to the vertex domain: phi * a. a is k x d.
Eigen::MatrixXd reconstruct(const SpectralBasis& basis, const Eigen::MatrixXd& a);

} // namespace fmatch
