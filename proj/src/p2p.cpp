#include "fmatch/p2p.hpp"

#include "fmatch/errors.hpp"
#include "fmatch/util.hpp"

#include <charconv>
#include <limits>
#include <sstream>

namespace fmatch {

// Plain sequential accumulation; tie goes to the lowest index because only a
// strictly smaller distance replaces the best.
void nearest_rows(const Eigen::MatrixXd& points, const Eigen::MatrixXd& queries,
                  Eigen::VectorXi& out, unsigned jobs) {
  const Eigen::Index n = points.rows();
  const Eigen::Index q = queries.rows();
  const Eigen::Index dim = points.cols();
  out.resize(q);
  parallel_for(
      static_cast<std::size_t>(q),
      [&](std::size_t jj) {
        const Eigen::Index j = static_cast<Eigen::Index>(jj);
        double best = std::numeric_limits<double>::infinity();
        Eigen::Index best_i = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
          double d = 0.0;
          for (Eigen::Index c = 0; c < dim; ++c) {
            double diff = queries(j, c) - points(i, c);
            d += diff * diff;
          }
          if (d < best) {
            best = d;
            best_i = i;
          }
        }
        out[j] = static_cast<int>(best_i);
      },
      jobs);
}

PointMap fmap_to_p2p(const FunctionalMap& fmap, const SpectralBasis& basis1,
                     const SpectralBasis& basis2, unsigned jobs) {
  const Eigen::Index k1 = fmap.k1();
  const Eigen::Index k2 = fmap.k2();
  if (k1 > basis1.k || k2 > basis2.k)
    throw DimensionError(strf("fmap_to_p2p: C is %lldx%lld but bases store k1=%d, k2=%d",
                              static_cast<long long>(k2), static_cast<long long>(k1), basis1.k,
                              basis2.k));
  Eigen::MatrixXd emb2 = basis2.phi.leftCols(k2) * fmap.C; // n2 x k1
  Eigen::MatrixXd emb1 = basis1.phi.leftCols(k1);          // n1 x k1
  PointMap map;
  nearest_rows(emb1, emb2, map.assignment, jobs);
  return map;
}

FunctionalMap p2p_to_fmap(const PointMap& map, const SpectralBasis& basis1,
                          const SpectralBasis& basis2, int k) {
  if (k < 1 || k > basis1.k || k > basis2.k)
    throw DimensionError(strf("p2p_to_fmap: k=%d exceeds stored basis sizes (%d, %d)", k,
                              basis1.k, basis2.k));
  if (map.size() != basis2.n())
    throw DimensionError(strf("p2p_to_fmap: map length %lld does not match target vertices %lld",
                              static_cast<long long>(map.size()),
                              static_cast<long long>(basis2.n())));
  // Pi Phi1 gathers source rows by assignment.
  Eigen::MatrixXd pulled(map.size(), k);
  for (Eigen::Index j = 0; j < map.size(); ++j) {
    int i = map.assignment[j];
    if (i < 0 || i >= basis1.n())
      throw InputError(strf("p2p_to_fmap: assignment[%lld]=%d outside source vertex range",
                            static_cast<long long>(j), i));
    pulled.row(j) = basis1.phi.row(i).head(k);
  }
  FunctionalMap out;
  out.C = basis2.phi.leftCols(k).transpose() * (basis2.mass.asDiagonal() * pulled);
  return out;
}

ZoomoutResult zoomout(const FunctionalMap& c_init, const SpectralBasis& basis1,
                      const SpectralBasis& basis2, int k_final, int step, unsigned jobs) {
  int k = static_cast<int>(c_init.k1());
  if (c_init.k1() != c_init.k2())
    throw DimensionError("zoomout: initial map must be square (k1 == k2)");
  if (step < 1) throw InputError("zoomout: step must be >= 1");
  if (k_final < k) throw InputError(strf("zoomout: k_final=%d below initial k=%d", k_final, k));
  if (k_final > basis1.k || k_final > basis2.k)
    throw InputError(strf("zoomout: k_final=%d exceeds stored basis sizes (%d, %d)", k_final,
                          basis1.k, basis2.k));

  ZoomoutResult result;
  result.fmap = c_init;
  while (k < k_final) {
    PointMap map = fmap_to_p2p(result.fmap, basis1, basis2, jobs);
    k = std::min(k + step, k_final);
    result.fmap = p2p_to_fmap(map, basis1, basis2, k);
  }
  result.map = fmap_to_p2p(result.fmap, basis1, basis2, jobs);
  return result;
}

void save_point_map(const PointMap& map, const std::string& path) {
  std::string out = strf("# p2p %s %s %lld\n", map.source_id.c_str(), map.target_id.c_str(),
                         static_cast<long long>(map.size()));
  for (Eigen::Index j = 0; j < map.size(); ++j) out += strf("%d\n", map.assignment[j]);
  atomic_write_file(path, out);
}

PointMap load_point_map(const std::string& path) {
  std::string data = read_file(path);
  PointMap map;
  std::vector<int> values;
  std::size_t pos = 0;
  long line_no = 0;
  long declared = -1;
  while (pos < data.size()) {
    std::size_t end = data.find('\n', pos);
    std::string line = data.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
    pos = end == std::string::npos ? data.size() : end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (line[0] == '#') {
      std::istringstream ss(line.substr(1));
      std::string tag;
      ss >> tag;
      if (tag == "p2p") ss >> map.source_id >> map.target_id >> declared;
      continue;
    }
    const char* b = line.data();
    const char* e = b + line.size();
    while (b < e && (*b == ' ' || *b == '\t')) ++b;
    int v = 0;
    auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc()) throw ParseError(path, line_no, "expected a vertex index");
    values.push_back(v);
  }
  if (values.empty()) throw InputError(path + ": empty point map");
  if (declared >= 0 && declared != static_cast<long>(values.size()))
    throw InputError(strf("%s: header declares %ld entries but file has %zu", path.c_str(),
                          declared, values.size()));
  map.assignment.resize(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i)
    map.assignment[static_cast<Eigen::Index>(i)] = values[i];
  return map;
}

} // namespace fmatch
