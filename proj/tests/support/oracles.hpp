#pragma once

#include "fmatch/mesh.hpp"
#include "fmatch/spectral.hpp"

#include <functional>
#include <utility>

namespace fmatch::testsupport {

// Generalized eigenproblem solved by explicit diagonal whitening:
// eig(M^-1/2 W M^-1/2), eigenvectors scaled back by M^-1/2 and sign-fixed
// (largest-magnitude entry positive, ties to the lowest index). Independent
// of the library's solver code paths.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> whitened_eig(const Eigen::MatrixXd& stiffness,
                                                         const Eigen::VectorXd& mass, int k);

// All-pairs shortest paths over the face-edge graph, O(n^3).
Eigen::MatrixXd floyd_warshall(const TriMesh& mesh);

// Textbook nearest-row scan with sequential coordinate accumulation.
Eigen::VectorXi brute_force_nn(const Eigen::MatrixXd& points, const Eigen::MatrixXd& queries);

// Least squares map via an explicit inverse of the ridged normal matrix.
Eigen::MatrixXd normal_equations_fmap(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

// Central finite differences of a scalar function of a matrix; h balances
// truncation against roundoff for O(1) losses.
Eigen::MatrixXd fd_gradient(const std::function<double(const Eigen::MatrixXd&)>& f,
                            const Eigen::MatrixXd& X, double h = 1e-6);

// Largest relative mismatch between an analytic gradient and its
// finite-difference counterpart; entries are compared against
// max(|a|, |b|, floor) with floor tied to the gradient's overall scale so
// near-zero entries do not amplify finite-difference roundoff.
double max_rel_gradient_error(const Eigen::MatrixXd& analytic, const Eigen::MatrixXd& fd);

} // namespace fmatch::testsupport
