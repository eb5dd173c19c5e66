#include "fmatch/fmap.hpp"

#include "fmatch/errors.hpp"

#include <cmath>

namespace fmatch {

namespace {

void check_finite_input(const Eigen::MatrixXd& m, const char* name) {
  if (!m.allFinite()) throw InputError(strf("solve_fmap: %s contains non-finite values", name));
}

double ridge_epsilon(const Eigen::MatrixXd& A) {
  return kRidgeScale * A.squaredNorm() / static_cast<double>(A.rows()); // tr(AA^T) = |A|_F^2
}

} // namespace

FunctionalMap solve_fmap(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                         const FmapSolveOptions& opts, const Eigen::VectorXd& lambda1,
                         const Eigen::VectorXd& lambda2) {
  const Eigen::Index k1 = A.rows();
  const Eigen::Index k2 = B.rows();
  const Eigen::Index d = A.cols();
  if (d == 0) throw InputError("solve_fmap: no descriptors (d = 0)");
  if (B.cols() != d)
    throw DimensionError(strf("solve_fmap: descriptor counts differ (%lld vs %lld)",
                              static_cast<long long>(d), static_cast<long long>(B.cols())));
  check_finite_input(A, "A");
  check_finite_input(B, "B");
  if (d < k1)
    warn(strf("solve_fmap: only %lld descriptors for basis size %lld; system is rank deficient",
              static_cast<long long>(d), static_cast<long long>(k1)));

  const double eps = ridge_epsilon(A);
  Eigen::MatrixXd S = A * A.transpose();
  S.diagonal().array() += eps;

  FunctionalMap fmap;
  if (opts.mode == FmapSolveOptions::Mode::PlainLsq) {
    // One factorization serves every row of C.
    fmap.C = S.ldlt().solve(A * B.transpose()).transpose();
  } else {
    if (lambda1.size() != k1 || lambda2.size() != k2)
      throw DimensionError("solve_fmap: commutativity mode needs eigenvalues of both bases");
    fmap.C.resize(k2, k1);
    Eigen::MatrixXd rhs = A * B.transpose(); // k1 x k2
    for (Eigen::Index i = 0; i < k2; ++i) {
      Eigen::MatrixXd Si = S;
      Si.diagonal() += opts.alpha * (lambda2[i] - lambda1.array()).square().matrix();
      fmap.C.row(i) = Si.ldlt().solve(rhs.col(i)).transpose();
    }
  }
  return fmap;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> solve_fmap_backward(const Eigen::MatrixXd& A,
                                                                const Eigen::MatrixXd& B,
                                                                const Eigen::MatrixXd& grad_C) {
  // Forward: C = B A^T S^-1 with S = A A^T + eps(A) I, eps = c tr(A A^T).
  const Eigen::Index k1 = A.rows();
  const double c = kRidgeScale / static_cast<double>(k1);
  const double eps = c * A.squaredNorm();
  Eigen::MatrixXd S = A * A.transpose();
  S.diagonal().array() += eps;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(S);

  Eigen::MatrixXd Sinv_A = ldlt.solve(A);                   // k1 x d
  Eigen::MatrixXd grad_B = grad_C * Sinv_A;                 // k2 x d
  Eigen::MatrixXd H = B.transpose() * grad_C;               // d x k1
  Eigen::MatrixXd Q = ldlt.solve(A * H);                    // k1 x k1
  Q = ldlt.solve(Q.transpose()).transpose();                // S^-1 A H S^-1
  Eigen::MatrixXd grad_A =
      ldlt.solve(H.transpose()) - (Q + Q.transpose()) * A - 2.0 * c * Q.trace() * A;
  return {std::move(grad_A), std::move(grad_B)};
}

double energy_bijectivity(const FunctionalMap& c12, const FunctionalMap& c21) {
  if (c12.k1() != c21.k2() || c12.k2() != c21.k1())
    throw DimensionError("energy_bijectivity: C12 and C21 are not composable");
  const Eigen::Index k2 = c12.k2(), k1 = c12.k1();
  double e = (c12.C * c21.C - Eigen::MatrixXd::Identity(k2, k2)).squaredNorm();
  e += (c21.C * c12.C - Eigen::MatrixXd::Identity(k1, k1)).squaredNorm();
  return e;
}

double energy_orthogonality(const FunctionalMap& c12, const FunctionalMap& c21) {
  const Eigen::Index k1 = c12.k1(), k2 = c21.k1();
  double e = (c12.C.transpose() * c12.C - Eigen::MatrixXd::Identity(k1, k1)).squaredNorm();
  e += (c21.C.transpose() * c21.C - Eigen::MatrixXd::Identity(k2, k2)).squaredNorm();
  return e;
}

double energy_lap_commutativity(const FunctionalMap& c12, const FunctionalMap& c21,
                                const Eigen::VectorXd& lambda1, const Eigen::VectorXd& lambda2) {
  if (lambda1.size() != c12.k1() || lambda2.size() != c12.k2())
    throw DimensionError("energy_lap_commutativity: eigenvalue lengths do not match C12");
  double e = (c12.C * lambda1.asDiagonal() - lambda2.asDiagonal() * c12.C).squaredNorm();
  e += (c21.C * lambda2.asDiagonal() - lambda1.asDiagonal() * c21.C).squaredNorm();
  return e;
}

LossReport total_loss(const FunctionalMap& c12, const FunctionalMap& c21,
                      const Eigen::VectorXd& lambda1, const Eigen::VectorXd& lambda2,
                      const LossWeights& weights) {
  LossReport rep;
  rep.e1 = energy_bijectivity(c12, c21);
  rep.e2 = energy_orthogonality(c12, c21);
  rep.e3 = energy_lap_commutativity(c12, c21, lambda1, lambda2);
  rep.total = weights.w1 * rep.e1 + weights.w2 * rep.e2 + weights.w3 * rep.e3;
  return rep;
}

LossGradients total_loss_with_grad(const FunctionalMap& c12, const FunctionalMap& c21,
                                   const Eigen::VectorXd& lambda1, const Eigen::VectorXd& lambda2,
                                   const LossWeights& weights) {
  LossGradients out;
  out.report = total_loss(c12, c21, lambda1, lambda2, weights);

  const Eigen::MatrixXd& C12 = c12.C;
  const Eigen::MatrixXd& C21 = c21.C;
  const Eigen::Index k1 = c12.k1(), k2 = c12.k2();
  Eigen::MatrixXd I1 = Eigen::MatrixXd::Identity(k1, k1);
  Eigen::MatrixXd I2 = Eigen::MatrixXd::Identity(k2, k2);

  // E1 = |C12 C21 - I|^2 + |C21 C12 - I|^2
  Eigen::MatrixXd Ra = C12 * C21 - I2;
  Eigen::MatrixXd Rb = C21 * C12 - I1;
  Eigen::MatrixXd g12 = 2.0 * (Ra * C21.transpose() + C21.transpose() * Rb);
  Eigen::MatrixXd g21 = 2.0 * (C12.transpose() * Ra + Rb * C12.transpose());
  out.grad_c12 = weights.w1 * g12;
  out.grad_c21 = weights.w1 * g21;

  // E2 = |C12^T C12 - I|^2 + |C21^T C21 - I|^2
  out.grad_c12 += weights.w2 * 4.0 * C12 * (C12.transpose() * C12 - I1);
  out.grad_c21 += weights.w2 * 4.0 * C21 * (C21.transpose() * C21 - I2);

  // E3 with diagonal Lambda: residual R = C L1 - L2 C, grad = 2 (R L1 - L2 R)
  Eigen::MatrixXd R12 = C12 * lambda1.asDiagonal() - lambda2.asDiagonal() * C12;
  Eigen::MatrixXd R21 = C21 * lambda2.asDiagonal() - lambda1.asDiagonal() * C21;
  out.grad_c12 += weights.w3 * 2.0 *
                  (R12 * lambda1.asDiagonal() - lambda2.asDiagonal() * R12);
  out.grad_c21 += weights.w3 * 2.0 *
                  (R21 * lambda2.asDiagonal() - lambda1.asDiagonal() * R21);
  return out;
}

double pairs_loss(const std::vector<TrainPair>& pairs, const Eigen::MatrixXd& w,
                  const LossWeights& weights, Eigen::MatrixXd* grad_w) {
  double loss = 0.0;
  if (grad_w) grad_w->setZero(w.rows(), w.cols());
  for (const TrainPair& pair : pairs) {
    Eigen::MatrixXd A1 = pair.coeff1 * w;
    Eigen::MatrixXd A2 = pair.coeff2 * w;
    FunctionalMap c12 = solve_fmap(A1, A2);
    FunctionalMap c21 = solve_fmap(A2, A1);
    if (!grad_w) {
      loss += total_loss(c12, c21, pair.lambda1, pair.lambda2, weights).total;
      continue;
    }
    LossGradients lg = total_loss_with_grad(c12, c21, pair.lambda1, pair.lambda2, weights);
    loss += lg.report.total;
    auto [dA1_a, dA2_b] = solve_fmap_backward(A1, A2, lg.grad_c12);
    auto [dA2_a, dA1_b] = solve_fmap_backward(A2, A1, lg.grad_c21);
    *grad_w += pair.coeff1.transpose() * (dA1_a + dA1_b);
    *grad_w += pair.coeff2.transpose() * (dA2_a + dA2_b);
  }
  return loss;
}

TrainResult adam_optimize(
    Eigen::Index d_in, int d_out, const TrainHyper& hyper,
    const std::function<double(const Eigen::MatrixXd&, Eigen::MatrixXd&, Rng&)>& step_fn,
    const std::function<double(const Eigen::MatrixXd&)>& full_loss_fn) {
  Rng rng(hyper.seed);
  Eigen::MatrixXd w;
  if (hyper.init == TrainHyper::Init::Identity) {
    w = Eigen::MatrixXd::Identity(d_in, d_out);
  } else {
    w.resize(d_in, d_out);
    double scale = 1.0 / std::sqrt(static_cast<double>(d_in));
    for (Eigen::Index i = 0; i < d_in; ++i)
      for (Eigen::Index j = 0; j < d_out; ++j) w(i, j) = scale * rng.normal();
  }

  TrainResult result;
  result.initial_loss = full_loss_fn(w);

  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d_in, d_out);
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(d_in, d_out);
  Eigen::MatrixXd grad(d_in, d_out);
  result.loss_trace.reserve(static_cast<std::size_t>(hyper.steps));
  for (int step = 0; step < hyper.steps; ++step) {
    double loss = step_fn(w, grad, rng);
    if (!std::isfinite(loss))
      throw DivergenceError(strf("training diverged (non-finite loss at step %d)", step), step);
    result.loss_trace.push_back(loss);

    m = hyper.adam_beta1 * m + (1.0 - hyper.adam_beta1) * grad;
    v = hyper.adam_beta2 * v + (1.0 - hyper.adam_beta2) * grad.cwiseProduct(grad);
    double bc1 = 1.0 - std::pow(hyper.adam_beta1, step + 1);
    double bc2 = 1.0 - std::pow(hyper.adam_beta2, step + 1);
    Eigen::MatrixXd m_hat = m / bc1;
    Eigen::MatrixXd v_hat = v / bc2;
    w -= hyper.learning_rate * (m_hat.array() / (v_hat.array().sqrt() + hyper.adam_eps)).matrix();
  }

  result.final_loss = full_loss_fn(w);
  result.weights.matrix = std::move(w);
  return result;
}

TrainResult train_weights(const std::vector<TrainPair>& pairs, int d_out, const TrainHyper& hyper) {
  if (pairs.empty()) throw InputError("train_weights: no pairs");
  const Eigen::Index d_in = pairs[0].coeff1.cols();
  for (const TrainPair& p : pairs)
    if (p.coeff1.cols() != d_in || p.coeff2.cols() != d_in)
      throw DimensionError("train_weights: all pairs must share the same descriptor count");

  auto batch_indices = [&](Rng& rng) {
    std::vector<std::size_t> idx;
    if (static_cast<std::size_t>(hyper.batch_size) >= pairs.size()) {
      idx.resize(pairs.size());
      for (std::size_t i = 0; i < pairs.size(); ++i) idx[i] = i;
    } else {
      idx.resize(static_cast<std::size_t>(hyper.batch_size));
      for (auto& i : idx) i = rng.index(pairs.size());
    }
    return idx;
  };

  auto step_fn = [&](const Eigen::MatrixXd& w, Eigen::MatrixXd& grad, Rng& rng) {
    std::vector<TrainPair> batch;
    for (std::size_t i : batch_indices(rng)) batch.push_back(pairs[i]);
    return pairs_loss(batch, w, hyper.loss_weights, &grad);
  };
  auto full_loss_fn = [&](const Eigen::MatrixXd& w) {
    return pairs_loss(pairs, w, hyper.loss_weights, nullptr);
  };
  return adam_optimize(d_in, d_out, hyper, step_fn, full_loss_fn);
}

} // namespace fmatch
