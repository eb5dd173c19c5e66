#include "fmatch/eval.hpp"

#include "fmatch/errors.hpp"
#include "fmatch/util.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <unordered_map>
#include <vector>

namespace fmatch {

namespace {

struct EdgeGraph {
  // CSR adjacency with Euclidean edge lengths.
  std::vector<int> offsets;
  std::vector<int> neighbors;
  std::vector<double> lengths;
};

EdgeGraph build_edge_graph(const TriMesh& mesh) {
  const int n = static_cast<int>(mesh.V.rows());
  std::vector<std::vector<std::pair<int, double>>> adj(n);
  auto add_edge = [&](int a, int b) {
    for (const auto& [nb, len] : adj[a])
      if (nb == b) return;
    double len = (mesh.V.row(a) - mesh.V.row(b)).norm();
    adj[a].emplace_back(b, len);
    adj[b].emplace_back(a, len);
  };
  for (Eigen::Index f = 0; f < mesh.F.rows(); ++f) {
    add_edge(mesh.F(f, 0), mesh.F(f, 1));
    add_edge(mesh.F(f, 1), mesh.F(f, 2));
    add_edge(mesh.F(f, 2), mesh.F(f, 0));
  }
  EdgeGraph g;
  g.offsets.resize(n + 1, 0);
  for (int v = 0; v < n; ++v) g.offsets[v + 1] = g.offsets[v] + static_cast<int>(adj[v].size());
  g.neighbors.resize(g.offsets[n]);
  g.lengths.resize(g.offsets[n]);
  for (int v = 0; v < n; ++v) {
    // Sorted neighbor order keeps traversal (and any tie handling) stable.
    std::sort(adj[v].begin(), adj[v].end());
    int at = g.offsets[v];
    for (const auto& [nb, len] : adj[v]) {
      g.neighbors[at] = nb;
      g.lengths[at] = len;
      ++at;
    }
  }
  return g;
}

void dijkstra(const EdgeGraph& g, int source, Eigen::Ref<Eigen::VectorXd> dist) {
  dist.setConstant(std::numeric_limits<double>::infinity());
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
  dist[source] = 0.0;
  heap.emplace(0.0, source);
  while (!heap.empty()) {
    auto [d, v] = heap.top();
    heap.pop();
    if (d > dist[v]) continue;
    for (int e = g.offsets[v]; e < g.offsets[v + 1]; ++e) {
      int u = g.neighbors[e];
      double nd = d + g.lengths[e];
      if (nd < dist[u]) {
        dist[u] = nd;
        heap.emplace(nd, u);
      }
    }
  }
}

} // namespace

Eigen::MatrixXd geodesic_distances(const TriMesh& mesh, const std::vector<int>& sources,
                                   unsigned jobs) {
  const int n = static_cast<int>(mesh.V.rows());
  for (int s : sources)
    if (s < 0 || s >= n)
      throw InputError(strf("geodesic_distances: source %d outside [0, %d)", s, n));
  EdgeGraph graph = build_edge_graph(mesh);
  Eigen::MatrixXd dist(static_cast<Eigen::Index>(sources.size()), n);
  std::vector<Eigen::VectorXd> rows(sources.size());
  parallel_for(
      sources.size(),
      [&](std::size_t i) {
        rows[i].resize(n);
        dijkstra(graph, sources[i], rows[i]);
      },
      jobs);
  for (std::size_t i = 0; i < sources.size(); ++i)
    dist.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  if (!dist.allFinite())
    throw InputError("geodesic_distances: mesh edge graph is not connected");
  return dist;
}

ErrorSummary evaluate_map(const PointMap& predicted, const PointMap& truth,
                          const TriMesh& source_mesh, unsigned jobs) {
  const Eigen::Index m = predicted.size();
  if (truth.size() != m)
    throw DimensionError(strf("evaluate_map: map length %lld vs ground truth %lld",
                              static_cast<long long>(m), static_cast<long long>(truth.size())));
  if (m == 0) throw InputError("evaluate_map: empty map");
  const int n = static_cast<int>(source_mesh.V.rows());
  for (Eigen::Index j = 0; j < m; ++j) {
    if (predicted.assignment[j] < 0 || predicted.assignment[j] >= n ||
        truth.assignment[j] < 0 || truth.assignment[j] >= n)
      throw InputError(strf("evaluate_map: entry %lld points outside the source mesh",
                            static_cast<long long>(j)));
  }

  // One Dijkstra per distinct ground-truth vertex; distance is symmetric so
  // either endpoint set would do, but the truth side is usually smaller
  // after cropping.
  std::vector<int> sources(truth.assignment.data(), truth.assignment.data() + m);
  std::sort(sources.begin(), sources.end());
  sources.erase(std::unique(sources.begin(), sources.end()), sources.end());
  std::unordered_map<int, int> source_row;
  source_row.reserve(sources.size());
  for (std::size_t i = 0; i < sources.size(); ++i) source_row[sources[i]] = static_cast<int>(i);
  Eigen::MatrixXd dist = geodesic_distances(source_mesh, sources, jobs);

  const double norm = std::sqrt(total_surface_area(source_mesh));
  ErrorSummary out;
  out.per_vertex_errors.resize(m);
  for (Eigen::Index j = 0; j < m; ++j)
    out.per_vertex_errors[j] =
        dist(source_row.at(truth.assignment[j]), predicted.assignment[j]) / norm;
  out.mean_x100 = 100.0 * out.per_vertex_errors.mean();

  for (int t = 0; t <= 25; ++t) {
    double threshold = 0.01 * t;
    Eigen::Index hit = 0;
    for (Eigen::Index j = 0; j < m; ++j)
      if (out.per_vertex_errors[j] <= threshold) ++hit;
    out.pck_thresholds.push_back(threshold);
    out.pck.push_back(static_cast<double>(hit) / static_cast<double>(m));
  }
  return out;
}

namespace {

// Fixed-layout polyline plot; all coordinates printed with %.17g so the
// bytes depend only on the data.
std::string render_pck_svg(const std::vector<NamedSummary>& summaries) {
  const double width = 640, height = 480;
  const double left = 70, right = 20, top = 40, bottom = 50;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;
  const double x_max = summaries[0].summary.pck_thresholds.back();

  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  const int n_colors = 8;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  svg << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  svg << "<text x=\"" << width / 2
      << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
      << "Correspondence accuracy</text>\n";

  // Axes with ticks every 0.05 horizontally and 0.2 vertically.
  svg << "<g stroke=\"black\" fill=\"none\"><path d=\"M" << fmt_double(left) << " "
      << fmt_double(top) << " L" << fmt_double(left) << " " << fmt_double(top + plot_h) << " L"
      << fmt_double(left + plot_w) << " " << fmt_double(top + plot_h) << "\"/></g>\n";
  svg << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"black\">\n";
  for (int t = 0; t <= 25; t += 5) {
    double frac = x_max > 0 ? (0.01 * t) / x_max : 0.0;
    double x = left + frac * plot_w;
    svg << "<line x1=\"" << fmt_double(x) << "\" y1=\"" << fmt_double(top + plot_h)
        << "\" x2=\"" << fmt_double(x) << "\" y2=\"" << fmt_double(top + plot_h + 5)
        << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << fmt_double(x) << "\" y=\"" << fmt_double(top + plot_h + 18)
        << "\" text-anchor=\"middle\">" << strf("%.2f", 0.01 * t) << "</text>\n";
  }
  for (int t = 0; t <= 5; ++t) {
    double frac = t / 5.0;
    double y = top + plot_h - frac * plot_h;
    svg << "<line x1=\"" << fmt_double(left - 5) << "\" y1=\"" << fmt_double(y) << "\" x2=\""
        << fmt_double(left) << "\" y2=\"" << fmt_double(y) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << fmt_double(left - 9) << "\" y=\"" << fmt_double(y + 4)
        << "\" text-anchor=\"end\">" << strf("%.1f", frac) << "</text>\n";
  }
  svg << "<text x=\"" << fmt_double(left + plot_w / 2) << "\" y=\"" << fmt_double(height - 12)
      << "\" text-anchor=\"middle\">geodesic error / sqrt(area)</text>\n";
  svg << "<text x=\"16\" y=\"" << fmt_double(top + plot_h / 2)
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << fmt_double(top + plot_h / 2)
      << ")\">fraction of correspondences</text>\n";
  svg << "</g>\n";

  for (std::size_t s = 0; s < summaries.size(); ++s) {
    const ErrorSummary& sum = summaries[s].summary;
    svg << "<polyline fill=\"none\" stroke=\"" << palette[s % n_colors]
        << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < sum.pck.size(); ++i) {
      double xf = x_max > 0 ? sum.pck_thresholds[i] / x_max : 0.0;
      double x = left + xf * plot_w;
      double y = top + plot_h - sum.pck[i] * plot_h;
      if (i) svg << " ";
      svg << fmt_double(x) << "," << fmt_double(y);
    }
    svg << "\"/>\n";
    double ly = top + 14 + 16.0 * static_cast<double>(s);
    svg << "<text x=\"" << fmt_double(left + plot_w - 6) << "\" y=\"" << fmt_double(ly)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" fill=\""
        << palette[s % n_colors] << "\">" << summaries[s].id << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

} // namespace

void write_report(const std::vector<NamedSummary>& summaries, const std::string& out_dir) {
  if (summaries.empty()) throw InputError("write_report: no summaries");

  std::string means = "# error = geodesic distance / sqrt(source area), mean scaled by 100\n";
  means += "pair,mean_x100\n";
  for (const NamedSummary& s : summaries)
    means += s.id + "," + fmt_double(s.summary.mean_x100) + "\n";
  atomic_write_file(out_dir + "/means.csv", means);

  std::string pck = "pair,threshold,fraction\n";
  for (const NamedSummary& s : summaries)
    for (std::size_t i = 0; i < s.summary.pck.size(); ++i)
      pck += s.id + "," + fmt_double(s.summary.pck_thresholds[i]) + "," +
             fmt_double(s.summary.pck[i]) + "\n";
  atomic_write_file(out_dir + "/pck.csv", pck);

  atomic_write_file(out_dir + "/pck.svg", render_pck_svg(summaries));
}

} // namespace fmatch
