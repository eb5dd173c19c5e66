#pragma once

#include "fmatch/fmap.hpp"
#include "fmatch/p2p.hpp"
#include "fmatch/spectral.hpp"

#include <vector>

namespace fmatch {

struct PartialConfig {
  int k_partial = 60; // basis size on the partial shape
  int k_full = 60;    // basis size on the full shape
  int rank_cap = 40;
};

// Alignment between the partial eigenbasis and the first r full
// eigenfunctions: X is k_p x r, no orthogonality constraint.
struct AlignmentMatrix {
  Eigen::MatrixXd X;
  int r = 0;
};

// Largest 1-based index i with lambda_p[i] < max(lambda_f), clamped to
// cfg.rank_cap. Throws InputError("disjoint spectra") when no index
// qualifies.
int estimate_rank(const Eigen::VectorXd& lambda_partial, const Eigen::VectorXd& lambda_full,
                  const PartialConfig& cfg);

// Closed-form minimizer of |A_r - X^T B|^2 with the usual trace-tied ridge;
// A_r is the first r rows of the full coefficients.
AlignmentMatrix solve_alignment(const Eigen::MatrixXd& coeff_full,
                                const Eigen::MatrixXd& coeff_partial, int r);

// Dirichlet off-diagonal penalty: sum of squared off-diagonal entries of
// X^T diag(lambda_p) X.
double offdiag_energy(const AlignmentMatrix& alignment, const Eigen::VectorXd& lambda_partial);

// One (full, partial) pair prepared for training.
struct PartialTrainPair {
  Eigen::MatrixXd coeff_full;    // k_f x d_in
  Eigen::MatrixXd coeff_partial; // k_p x d_in
  Eigen::VectorXd lambda_partial;
  int r = 0;
};

// Full-dataset off-diagonal loss and gradient at fixed weights.
double partial_pairs_loss(const std::vector<PartialTrainPair>& pairs, const Eigen::MatrixXd& w,
                          Eigen::MatrixXd* grad_w = nullptr);

// Adam loop with the off-diagonal penalty as the only loss term; X is
// re-solved in closed form every step and gradients flow through the solve.
TrainResult partial_train_weights(const std::vector<PartialTrainPair>& pairs, int d_out,
                                  const TrainHyper& hyper);

// Nearest-neighbor map from partial vertices to full vertices in the aligned
// embedding (rows of Phi_p X vs the first r columns of Phi_f).
PointMap partial_p2p(const SpectralBasis& basis_full, const SpectralBasis& basis_partial,
                     const AlignmentMatrix& alignment, unsigned jobs = 1);

} // namespace fmatch
