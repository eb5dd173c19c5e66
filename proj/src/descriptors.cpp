#include "fmatch/descriptors.hpp"

#include "fmatch/errors.hpp"
#include "fmatch/serialize.hpp"
#include "fmatch/util.hpp"

#include <algorithm>
#include <cmath>

namespace fmatch {

namespace {

constexpr double kEigenvalueFloor = 1e-8; // below this an eigenvalue counts as the constant mode

void mass_normalize_columns(Eigen::MatrixXd& values, const Eigen::VectorXd& mass) {
  for (Eigen::Index c = 0; c < values.cols(); ++c) {
    double norm = std::sqrt(values.col(c).dot(mass.asDiagonal() * values.col(c)));
    if (norm > 0.0) values.col(c) /= norm;
  }
}

void check_finite(const Eigen::MatrixXd& m, const std::string& context) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      if (!std::isfinite(m(r, c)))
        throw InputError(strf("%s: non-finite value at row %lld, column %lld", context.c_str(),
                              static_cast<long long>(r), static_cast<long long>(c)));
}

// Smallest eigenvalue above the constant-mode floor and the largest one.
std::pair<double, double> spectrum_range(const SpectralBasis& basis) {
  double lo = -1.0;
  for (Eigen::Index i = 0; i < basis.lambda.size(); ++i) {
    if (basis.lambda[i] > kEigenvalueFloor) {
      lo = basis.lambda[i];
      break;
    }
  }
  if (lo < 0.0)
    throw InputError("descriptor sampling: all eigenvalues are at the constant-mode floor");
  return {lo, basis.lambda[basis.lambda.size() - 1]};
}

} // namespace

DescriptorSet hks(const SpectralBasis& basis, const std::vector<double>& times, bool normalize) {
  if (times.empty()) throw InputError("hks: need at least one diffusion time");
  for (double t : times)
    if (!(t >= 0.0)) throw InputError(strf("hks: times must be nonnegative (got %g)", t));

  const Eigen::Index n = basis.n();
  Eigen::MatrixXd phi2 = basis.phi.cwiseProduct(basis.phi); // n x k
  DescriptorSet out;
  out.values.resize(n, static_cast<Eigen::Index>(times.size()));
  for (std::size_t j = 0; j < times.size(); ++j) {
    Eigen::VectorXd w = (-basis.lambda.array() * times[j]).exp();
    out.values.col(static_cast<Eigen::Index>(j)) = phi2 * w;
    out.labels.push_back(strf("hks_t%g", times[j]));
  }
  if (normalize) mass_normalize_columns(out.values, basis.mass);
  out.source = DescriptorSource::Hks;
  return out;
}

DescriptorSet wks(const SpectralBasis& basis, const std::vector<double>& energies, double sigma,
                  bool normalize) {
  if (energies.empty()) throw InputError("wks: need at least one energy level");
  if (!(sigma > 0.0)) throw InputError(strf("wks: sigma must be positive (got %g)", sigma));
  if (basis.k < 2) throw InputError("wks: basis size must be at least 2");

  std::vector<Eigen::Index> kept;
  for (Eigen::Index i = 0; i < basis.lambda.size(); ++i)
    if (basis.lambda[i] > kEigenvalueFloor) kept.push_back(i);
  if (kept.empty()) throw InputError("wks: all eigenvalues are below the constant-mode floor");

  const Eigen::Index n = basis.n();
  Eigen::MatrixXd phi2(n, static_cast<Eigen::Index>(kept.size()));
  Eigen::VectorXd log_lambda(static_cast<Eigen::Index>(kept.size()));
  for (std::size_t j = 0; j < kept.size(); ++j) {
    phi2.col(static_cast<Eigen::Index>(j)) =
        basis.phi.col(kept[j]).cwiseProduct(basis.phi.col(kept[j]));
    log_lambda[static_cast<Eigen::Index>(j)] = std::log(basis.lambda[kept[j]]);
  }

  DescriptorSet out;
  out.values.resize(n, static_cast<Eigen::Index>(energies.size()));
  for (std::size_t j = 0; j < energies.size(); ++j) {
    Eigen::VectorXd w =
        (-(energies[j] - log_lambda.array()).square() / (2.0 * sigma * sigma)).exp();
    double wsum = w.sum();
    out.values.col(static_cast<Eigen::Index>(j)) = phi2 * (w / wsum);
    out.labels.push_back(strf("wks_e%g", energies[j]));
  }
  if (normalize) mass_normalize_columns(out.values, basis.mass);
  out.source = DescriptorSource::Wks;
  return out;
}

std::vector<double> default_hks_times(const SpectralBasis& basis, int count) {
  auto [lo, hi] = spectrum_range(basis);
  const double c = 4.0 * std::log(10.0);
  double t_min = c / hi;
  double t_max = c / lo;
  std::vector<double> times(static_cast<std::size_t>(count));
  if (count == 1) {
    times[0] = std::sqrt(t_min * t_max);
    return times;
  }
  double step = (std::log(t_max) - std::log(t_min)) / (count - 1);
  for (int i = 0; i < count; ++i) times[static_cast<std::size_t>(i)] = std::exp(std::log(t_min) + step * i);
  return times;
}

std::pair<std::vector<double>, double> default_wks_energies(const SpectralBasis& basis, int count) {
  auto [lo, hi] = spectrum_range(basis);
  double e_min = std::log(lo);
  double e_max = std::log(hi);
  double range = e_max - e_min;
  double sigma = 7.0 * range / count;
  if (!(sigma > 0.0)) sigma = 1.0; // flat spectrum fallback
  std::vector<double> energies(static_cast<std::size_t>(count));
  if (count == 1) {
    energies[0] = 0.5 * (e_min + e_max);
  } else {
    double step = range / (count - 1);
    for (int i = 0; i < count; ++i) energies[static_cast<std::size_t>(i)] = e_min + step * i;
  }
  return {energies, sigma};
}

DescriptorSet coordinate_descriptors(const TriMesh& mesh, const SpectralBasis& basis) {
  DescriptorSet out;
  out.values = mesh.V;
  out.labels = {"x", "y", "z"};
  out.source = DescriptorSource::External;
  mass_normalize_columns(out.values, basis.mass);
  return out;
}

DescriptorSet load_descriptors(const std::string& path, const TriMesh& mesh) {
  DescriptorSet out;
  std::string data = read_file(path);
  if (data.size() >= 6 && data.compare(0, 6, "FMMAT1") == 0) {
    out.values = parse_fmmat(data, path);
  } else {
    std::vector<std::string> header;
    out.values = read_csv_matrix(path, &header);
    out.labels = header;
  }
  if (out.values.rows() != mesh.n_vertices())
    throw InputError(strf("%s: descriptor rows (%lld) do not match mesh vertices (%lld)",
                          path.c_str(), static_cast<long long>(out.values.rows()),
                          static_cast<long long>(mesh.n_vertices())));
  check_finite(out.values, path);
  if (out.labels.empty())
    for (Eigen::Index c = 0; c < out.values.cols(); ++c)
      out.labels.push_back(strf("c%lld", static_cast<long long>(c)));
  out.source = DescriptorSource::External;
  return out;
}

DescriptorSet combine(const DescriptorSet& desc, const CombinationWeights& w) {
  if (w.matrix.rows() != desc.d())
    throw DimensionError(strf("combine: weights have %lld rows, descriptors have %lld columns",
                              static_cast<long long>(w.matrix.rows()),
                              static_cast<long long>(desc.d())));
  DescriptorSet out;
  out.values = desc.values * w.matrix;
  for (Eigen::Index c = 0; c < out.values.cols(); ++c)
    out.labels.push_back(strf("comb%lld", static_cast<long long>(c)));
  out.source = DescriptorSource::Combined;
  for (Eigen::Index c = 0; c < out.values.cols(); ++c) {
    if (out.values.col(c).lpNorm<Eigen::Infinity>() == 0.0) {
      warn(strf("combine: output column %lld is identically zero (rank-deficient combination)",
                static_cast<long long>(c)));
      break;
    }
  }
  return out;
}

DescriptorSet concat(const DescriptorSet& a, const DescriptorSet& b) {
  if (a.n() != b.n())
    throw DimensionError(strf("concat: vertex counts differ (%lld vs %lld)",
                              static_cast<long long>(a.n()), static_cast<long long>(b.n())));
  DescriptorSet out;
  out.values.resize(a.n(), a.d() + b.d());
  out.values << a.values, b.values;
  out.labels = a.labels;
  out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
  out.source = a.source == b.source ? a.source : DescriptorSource::External;
  return out;
}

} // namespace fmatch
