#pragma once

#include "fmatch/descriptors.hpp"
#include "fmatch/util.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <vector>

namespace fmatch {

// Spectral map C between two truncated bases: a k2 x k1 matrix taking
// source coefficients to target coefficients.
struct FunctionalMap {
  Eigen::MatrixXd C;

  Eigen::Index k1() const { return C.cols(); }
  Eigen::Index k2() const { return C.rows(); }
};

struct FmapSolveOptions {
  enum class Mode { PlainLsq, CommutativityWeighted };
  Mode mode = Mode::PlainLsq;
  double alpha = 0.0; // regularizer weight; ignored in PlainLsq mode
};

struct LossWeights {
  double w1 = 1.0;
  double w2 = 1.0;
  double w3 = 0.001;
};

struct LossReport {
  double e1 = 0.0;
  double e2 = 0.0;
  double e3 = 0.0;
  double total = 0.0;
};

// Ridge used by all closed-form solves: eps = 1e-9 * tr(A A^T) / rows(A).
// Tied to the trace so the solve is invariant to descriptor scaling.
constexpr double kRidgeScale = 1e-9;

// Least-squares functional map from descriptor coefficients (Eq. solve):
//   PlainLsq:              C = B A^T (A A^T + eps I)^-1
//   CommutativityWeighted: per-row ridge alpha * (lambda2_i - lambda1_j)^2
// A is k1 x d, B is k2 x d. Emits a rank warning when d < k1.
FunctionalMap solve_fmap(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                         const FmapSolveOptions& opts = {},
                         const Eigen::VectorXd& lambda1 = {},
                         const Eigen::VectorXd& lambda2 = {});

// Gradients of a scalar loss through the PlainLsq solve. grad_C is dL/dC;
// returns (dL/dA, dL/dB). The ridge's dependence on tr(A A^T) is included.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> solve_fmap_backward(const Eigen::MatrixXd& A,
                                                                const Eigen::MatrixXd& B,
                                                                const Eigen::MatrixXd& grad_C);

// Structural energies. All are >= 0 and zero exactly on their
// characteristic sets.
double energy_bijectivity(const FunctionalMap& c12, const FunctionalMap& c21);
double energy_orthogonality(const FunctionalMap& c12, const FunctionalMap& c21);
double energy_lap_commutativity(const FunctionalMap& c12, const FunctionalMap& c21,
                                const Eigen::VectorXd& lambda1, const Eigen::VectorXd& lambda2);

LossReport total_loss(const FunctionalMap& c12, const FunctionalMap& c21,
                      const Eigen::VectorXd& lambda1, const Eigen::VectorXd& lambda2,
                      const LossWeights& weights = {});

// total_loss plus dL/dC12 and dL/dC21.
struct LossGradients {
  LossReport report;
  Eigen::MatrixXd grad_c12;
  Eigen::MatrixXd grad_c21;
};
LossGradients total_loss_with_grad(const FunctionalMap& c12, const FunctionalMap& c21,
                                   const Eigen::VectorXd& lambda1, const Eigen::VectorXd& lambda2,
                                   const LossWeights& weights = {});

// One precomputed shape pair for weight training: projected base descriptor
// coefficients (basis^T M F) and eigenvalues per side.
struct TrainPair {
  Eigen::MatrixXd coeff1; // k1 x d_in
  Eigen::MatrixXd coeff2; // k2 x d_in
  Eigen::VectorXd lambda1;
  Eigen::VectorXd lambda2;
};

struct TrainHyper {
  double learning_rate = 1e-4;
  int steps = 1000;
  int batch_size = 8;
  std::uint64_t seed = 0;
  enum class Init { Identity, Random };
  Init init = Init::Identity;
  LossWeights loss_weights{};
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
};

struct TrainResult {
  CombinationWeights weights;
  std::vector<double> loss_trace; // summed batch loss per step
  double initial_loss = 0.0;      // full-dataset loss at the initial weights
  double final_loss = 0.0;        // full-dataset loss at the returned weights
};

// Full-dataset loss and dL/dw at fixed weights (both map directions per
// pair, C solved by PlainLsq).
double pairs_loss(const std::vector<TrainPair>& pairs, const Eigen::MatrixXd& w,
                  const LossWeights& weights, Eigen::MatrixXd* grad_w = nullptr);

// Adam loop over the shared combination matrix w (d_in x d_out). Batches of
// `batch_size` pairs are drawn per step; when batch_size >= pairs.size()
// every pair is used exactly once per step. Throws DivergenceError when the
// loss turns non-finite.
TrainResult train_weights(const std::vector<TrainPair>& pairs, int d_out, const TrainHyper& hyper);

// Shared Adam driver; also used by the partial loop. step_fn(w, grad_out)
// returns the batch loss at w and fills grad_out.
TrainResult adam_optimize(
    Eigen::Index d_in, int d_out, const TrainHyper& hyper,
    const std::function<double(const Eigen::MatrixXd&, Eigen::MatrixXd&, Rng&)>& step_fn,
    const std::function<double(const Eigen::MatrixXd&)>& full_loss_fn);

} // namespace fmatch
