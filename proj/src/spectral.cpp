#include "fmatch/spectral.hpp"

#include "fmatch/errors.hpp"
#include "fmatch/util.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <vector>

namespace fmatch {

namespace {

constexpr double kCotClamp = 1e4;

// Cotangent of the angle at `apex` in triangle (apex, b, c), clamped to
// survive near-degenerate triangles.
double clamped_cot(const Eigen::Vector3d& apex, const Eigen::Vector3d& b,
                   const Eigen::Vector3d& c, int* clamp_counter) {
  Eigen::Vector3d u = b - apex;
  Eigen::Vector3d v = c - apex;
  double cross = u.cross(v).norm();
  double dot = u.dot(v);
  double cot;
  if (cross <= 0.0) {
    cot = dot >= 0.0 ? kCotClamp : -kCotClamp;
    ++*clamp_counter;
  } else {
    cot = dot / cross;
    if (cot > kCotClamp) {
      cot = kCotClamp;
      ++*clamp_counter;
    } else if (cot < -kCotClamp) {
      cot = -kCotClamp;
      ++*clamp_counter;
    }
  }
  return cot;
}

// Fix eigenvector signs: entry of largest magnitude positive, ties broken by
// lowest vertex index (the scan keeps the first maximal entry).
void fix_signs(Eigen::MatrixXd& phi) {
  for (Eigen::Index c = 0; c < phi.cols(); ++c) {
    Eigen::Index best = 0;
    double best_abs = -1.0;
    for (Eigen::Index r = 0; r < phi.rows(); ++r) {
      double a = std::abs(phi(r, c));
      if (a > best_abs) {
        best_abs = a;
        best = r;
      }
    }
    if (phi(best, c) < 0.0) phi.col(c) = -phi.col(c);
  }
}

SpectralBasis dense_eigenbasis(const LaplacianPair& lap, int k) {
  Eigen::MatrixXd W = Eigen::MatrixXd(lap.stiffness);
  Eigen::MatrixXd M = lap.mass.asDiagonal();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(W, M);
  if (solver.info() != Eigen::Success)
    throw SolverError("dense generalized eigensolver failed", -1.0);
  SpectralBasis basis;
  basis.k = k;
  basis.mass = lap.mass;
  basis.lambda = solver.eigenvalues().head(k);
  basis.phi = solver.eigenvectors().leftCols(k);
  fix_signs(basis.phi);
  return basis;
}

// Shift-invert block subspace iteration for the smallest eigenpairs of
// (W, M): factor W - shift*M once, iterate Y <- (W - shift*M)^{-1} M X with
// M-orthonormalization and Rayleigh-Ritz in between.
SpectralBasis iterative_eigenbasis(const LaplacianPair& lap, int k, const EigOptions& opts) {
  const Eigen::Index n = lap.stiffness.rows();
  const int block = std::min<Eigen::Index>(n - 1, k + std::max(8, k / 2));

  Eigen::SparseMatrix<double> shifted = lap.stiffness;
  for (Eigen::Index i = 0; i < n; ++i)
    shifted.coeffRef(i, i) -= opts.shift * lap.mass[i];
  shifted.makeCompressed();
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(shifted);
  if (ldlt.info() != Eigen::Success)
    throw SolverError("LDLT factorization of shifted stiffness failed", -1.0);

  Rng rng(opts.seed);
  Eigen::MatrixXd X(n, block);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int j = 0; j < block; ++j) X(i, j) = rng.uniform(-1.0, 1.0);

  const Eigen::VectorXd& m = lap.mass;
  // The shift-inverted block can span ~16 decades (the near-null constant
  // mode is amplified by 1/|shift|), so the Gram matrix regularly loses
  // positive definiteness to roundoff. Whiten with a floor relative to the
  // dominant direction and re-try; collapsed directions re-grow over the
  // following iterations.
  auto m_orthonormalize = [&](Eigen::MatrixXd& Y) {
    for (int pass = 0; pass < 2; ++pass) {
      Eigen::MatrixXd G = Y.transpose() * (m.asDiagonal() * Y);
      Eigen::LLT<Eigen::MatrixXd> llt(G);
      if (llt.info() == Eigen::Success) {
        Y = llt.matrixL().solve(Y.transpose()).transpose();
        return;
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
      double floor = std::max(es.eigenvalues().maxCoeff() * 1e-14, 1e-300);
      Eigen::VectorXd d = es.eigenvalues().cwiseMax(floor).cwiseSqrt().cwiseInverse();
      Y = Y * es.eigenvectors() * d.asDiagonal();
    }
  };

  // Scale floor for the residual test; keeps the near-null constant mode
  // from dividing ~0 by ~0.
  double w_scale = 0.0;
  for (int outer = 0; outer < lap.stiffness.outerSize(); ++outer)
    for (Eigen::SparseMatrix<double>::InnerIterator it(lap.stiffness, outer); it; ++it)
      w_scale = std::max(w_scale, std::abs(it.value()));
  w_scale = std::max(w_scale, 1e-300);

  Eigen::VectorXd ritz;
  double worst_residual = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    Eigen::MatrixXd Y = ldlt.solve(m.asDiagonal() * X);
    m_orthonormalize(Y);
    Eigen::MatrixXd H = Y.transpose() * (lap.stiffness * Y);
    H = 0.5 * (H + H.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    X = Y * es.eigenvectors();
    ritz = es.eigenvalues();

    // Relative residual of the first k Ritz pairs. Non-finite values must
    // register as "not converged", not vanish inside std::max.
    worst_residual = 0.0;
    Eigen::MatrixXd WX = lap.stiffness * X.leftCols(k);
    for (int j = 0; j < k; ++j) {
      Eigen::VectorXd r = WX.col(j) - ritz[j] * (m.asDiagonal() * X.col(j));
      double scale = std::max({WX.col(j).norm(), std::abs(ritz[j]), w_scale * X.col(j).norm()});
      double rel = r.norm() / scale;
      if (!std::isfinite(rel)) rel = std::numeric_limits<double>::infinity();
      worst_residual = std::max(worst_residual, rel);
    }
    if (worst_residual <= opts.tol) {
      SpectralBasis basis;
      basis.k = k;
      basis.mass = lap.mass;
      basis.lambda = ritz.head(k);
      basis.phi = X.leftCols(k);
      fix_signs(basis.phi);
      return basis;
    }
  }
  throw SolverError(strf("eigenbasis: no convergence after %d iterations (residual %.3e, tol %.3e)",
                         opts.max_iterations, worst_residual, opts.tol),
                    worst_residual);
}

} // namespace

LaplacianPair build_laplacian(const TriMesh& mesh) {
  const Eigen::Index n = mesh.n_vertices();
  LaplacianPair lap;
  lap.mass = vertex_areas(mesh);

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(mesh.n_faces()) * 12);
  int clamped = 0;
  for (Eigen::Index f = 0; f < mesh.n_faces(); ++f) {
    int i0 = mesh.F(f, 0), i1 = mesh.F(f, 1), i2 = mesh.F(f, 2);
    Eigen::Vector3d p0 = mesh.V.row(i0), p1 = mesh.V.row(i1), p2 = mesh.V.row(i2);
    // half-cotangent of the angle opposite each edge
    double w12 = 0.5 * clamped_cot(p0, p1, p2, &clamped);
    double w02 = 0.5 * clamped_cot(p1, p0, p2, &clamped);
    double w01 = 0.5 * clamped_cot(p2, p0, p1, &clamped);
    auto add_edge = [&](int a, int b, double w) {
      trip.emplace_back(a, b, -w);
      trip.emplace_back(b, a, -w);
      trip.emplace_back(a, a, w);
      trip.emplace_back(b, b, w);
    };
    add_edge(i1, i2, w12);
    add_edge(i0, i2, w02);
    add_edge(i0, i1, w01);
  }
  lap.stiffness.resize(n, n);
  lap.stiffness.setFromTriplets(trip.begin(), trip.end());
  lap.stiffness.makeCompressed();
  lap.clamped_cotangents = clamped;
  if (clamped > 0) warn(strf("build_laplacian: %d cotangent value(s) clamped", clamped));
  return lap;
}

SpectralBasis eigenbasis(const LaplacianPair& lap, int k, const EigOptions& opts) {
  const Eigen::Index n = lap.stiffness.rows();
  if (k < 1 || k >= n)
    throw InputError(strf("eigenbasis: k must satisfy 1 <= k < n (k=%d, n=%lld)", k,
                          static_cast<long long>(n)));
  EigOptions::Method method = opts.method;
  if (method == EigOptions::Method::Auto)
    method = n <= 512 ? EigOptions::Method::Dense : EigOptions::Method::Iterative;
  return method == EigOptions::Method::Dense ? dense_eigenbasis(lap, k)
                                             : iterative_eigenbasis(lap, k, opts);
}

Eigen::MatrixXd project(const SpectralBasis& basis, const Eigen::MatrixXd& f) {
  if (f.rows() != basis.phi.rows())
    throw DimensionError(strf("project: f has %lld rows, basis has %lld vertices",
                              static_cast<long long>(f.rows()),
                              static_cast<long long>(basis.phi.rows())));
  return basis.phi.transpose() * (basis.mass.asDiagonal() * f);
}

Eigen::MatrixXd reconstruct(const SpectralBasis& basis, const Eigen::MatrixXd& a) {
  if (a.rows() != basis.k)
    throw DimensionError(strf("reconstruct: coefficients have %lld rows, basis size is %d",
                              static_cast<long long>(a.rows()), basis.k));
  return basis.phi * a;
}

} // namespace fmatch
