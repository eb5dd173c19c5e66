#include "fmatch/partial.hpp"

#include "fmatch/errors.hpp"
#include "fmatch/util.hpp"

#include <algorithm>
#include <cmath>

namespace fmatch {

int estimate_rank(const Eigen::VectorXd& lambda_partial, const Eigen::VectorXd& lambda_full,
                  const PartialConfig& cfg) {
  if (lambda_partial.size() < 2 || lambda_full.size() < 2)
    throw InputError("estimate_rank: spectra must have at least 2 entries");
  const double max_full = lambda_full[lambda_full.size() - 1];
  int r = 0;
  for (Eigen::Index i = 0; i < lambda_partial.size(); ++i)
    if (lambda_partial[i] < max_full) r = static_cast<int>(i) + 1; // 1-based count
  if (r == 0)
    throw InputError(strf("estimate_rank: disjoint spectra (lambda_p[0]=%g >= max lambda_f=%g)",
                          lambda_partial[0], max_full));
  return std::min(r, cfg.rank_cap);
}

AlignmentMatrix solve_alignment(const Eigen::MatrixXd& coeff_full,
                                const Eigen::MatrixXd& coeff_partial, int r) {
  const Eigen::Index k_f = coeff_full.rows();
  const Eigen::Index k_p = coeff_partial.rows();
  const Eigen::Index d = coeff_full.cols();
  if (r < 1 || r > k_f)
    throw DimensionError(strf("solve_alignment: r=%d outside [1, %lld]", r,
                              static_cast<long long>(k_f)));
  if (coeff_partial.cols() != d)
    throw DimensionError("solve_alignment: descriptor counts differ between shapes");
  if (d < r)
    warn(strf("solve_alignment: only %lld descriptors for rank %d; system is rank deficient",
              static_cast<long long>(d), r));

  // min_Y |A_r - Y B|^2 with Y = X^T: same normal equations as the fmap
  // solve with (A,B) -> (B_partial, A_r).
  Eigen::MatrixXd A_r = coeff_full.topRows(r);
  const double eps = kRidgeScale * coeff_partial.squaredNorm() / static_cast<double>(k_p);
  Eigen::MatrixXd S = coeff_partial * coeff_partial.transpose();
  S.diagonal().array() += eps;
  Eigen::MatrixXd Y = S.ldlt().solve(coeff_partial * A_r.transpose()).transpose(); // r x k_p

  AlignmentMatrix out;
  out.X = Y.transpose();
  out.r = r;
  return out;
}

double offdiag_energy(const AlignmentMatrix& alignment, const Eigen::VectorXd& lambda_partial) {
  if (lambda_partial.size() != alignment.X.rows())
    throw DimensionError(strf("offdiag_energy: lambda length %lld does not match X rows %lld",
                              static_cast<long long>(lambda_partial.size()),
                              static_cast<long long>(alignment.X.rows())));
  Eigen::MatrixXd T =
      alignment.X.transpose() * lambda_partial.asDiagonal() * alignment.X; // r x r
  double diag_sq = T.diagonal().squaredNorm();
  return T.squaredNorm() - diag_sq;
}

double partial_pairs_loss(const std::vector<PartialTrainPair>& pairs, const Eigen::MatrixXd& w,
                          Eigen::MatrixXd* grad_w) {
  double loss = 0.0;
  if (grad_w) grad_w->setZero(w.rows(), w.cols());
  for (const PartialTrainPair& pair : pairs) {
    Eigen::MatrixXd A_full = pair.coeff_full * w;
    Eigen::MatrixXd B_partial = pair.coeff_partial * w;
    AlignmentMatrix align = solve_alignment(A_full, B_partial, pair.r);
    loss += offdiag_energy(align, pair.lambda_partial);
    if (!grad_w) continue;

    // E = off(Y L Y^T) with Y = X^T: dE/dY = 4 T_off Y L.
    Eigen::MatrixXd Y = align.X.transpose(); // r x k_p
    Eigen::MatrixXd T = Y * pair.lambda_partial.asDiagonal() * Y.transpose();
    T.diagonal().setZero();
    Eigen::MatrixXd grad_Y = 4.0 * T * Y * pair.lambda_partial.asDiagonal();

    // Through the closed-form solve, with roles (A,B) -> (B_partial, A_r).
    auto [dB_partial, dA_r] = solve_fmap_backward(B_partial, A_full.topRows(pair.r), grad_Y);
    Eigen::MatrixXd dA_full = Eigen::MatrixXd::Zero(A_full.rows(), A_full.cols());
    dA_full.topRows(pair.r) = dA_r;
    *grad_w += pair.coeff_full.transpose() * dA_full;
    *grad_w += pair.coeff_partial.transpose() * dB_partial;
  }
  return loss;
}

TrainResult partial_train_weights(const std::vector<PartialTrainPair>& pairs, int d_out,
                                  const TrainHyper& hyper) {
  if (pairs.empty()) throw InputError("partial_train_weights: no pairs");
  const Eigen::Index d_in = pairs[0].coeff_full.cols();
  for (const PartialTrainPair& p : pairs)
    if (p.coeff_full.cols() != d_in || p.coeff_partial.cols() != d_in)
      throw DimensionError("partial_train_weights: all pairs must share the descriptor count");

  auto step_fn = [&](const Eigen::MatrixXd& w, Eigen::MatrixXd& grad, Rng& rng) {
    std::vector<PartialTrainPair> batch;
    if (static_cast<std::size_t>(hyper.batch_size) >= pairs.size()) {
      batch = pairs;
    } else {
      for (int b = 0; b < hyper.batch_size; ++b) batch.push_back(pairs[rng.index(pairs.size())]);
    }
    return partial_pairs_loss(batch, w, &grad);
  };
  auto full_loss_fn = [&](const Eigen::MatrixXd& w) {
    return partial_pairs_loss(pairs, w, nullptr);
  };
  return adam_optimize(d_in, d_out, hyper, step_fn, full_loss_fn);
}

PointMap partial_p2p(const SpectralBasis& basis_full, const SpectralBasis& basis_partial,
                     const AlignmentMatrix& alignment, unsigned jobs) {
  const int r = alignment.r;
  if (alignment.X.rows() != basis_partial.k)
    throw DimensionError(strf("partial_p2p: X has %lld rows but partial basis stores k=%d",
                              static_cast<long long>(alignment.X.rows()), basis_partial.k));
  if (r > basis_full.k)
    throw DimensionError(strf("partial_p2p: r=%d exceeds full basis size %d", r, basis_full.k));
  if (r == 1) warn("partial_p2p: rank 1 gives a degenerate one-dimensional embedding");

  Eigen::MatrixXd emb_partial = basis_partial.phi * alignment.X; // n_p x r
  Eigen::MatrixXd emb_full = basis_full.phi.leftCols(r);         // n_f x r

  PointMap map;
  nearest_rows(emb_full, emb_partial, map.assignment, jobs);
  return map;
}

} // namespace fmatch
