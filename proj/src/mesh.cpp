#include "fmatch/mesh.hpp"

#include "fmatch/errors.hpp"
#include "fmatch/util.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fmatch {

namespace {

struct UnionFind {
  std::vector<Eigen::Index> parent;
  explicit UnionFind(Eigen::Index n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  Eigen::Index find(Eigen::Index x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(Eigen::Index a, Eigen::Index b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[b] = a;
  }
};

double triangle_area(const TriMesh& mesh, Eigen::Index f) {
  Eigen::Vector3d a = mesh.V.row(mesh.F(f, 0));
  Eigen::Vector3d b = mesh.V.row(mesh.F(f, 1));
  Eigen::Vector3d c = mesh.V.row(mesh.F(f, 2));
  return 0.5 * (b - a).cross(c - a).norm();
}

} // namespace

Axis axis_from_string(const std::string& s) {
  std::string t = s;
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "x" || t == "+x") return Axis::PosX;
  if (t == "-x") return Axis::NegX;
  if (t == "y" || t == "+y") return Axis::PosY;
  if (t == "-y") return Axis::NegY;
  if (t == "z" || t == "+z") return Axis::PosZ;
  if (t == "-z") return Axis::NegZ;
  throw InputError("invalid axis id '" + s + "' (expected one of +x,-x,+y,-y,+z,-z)");
}

std::string axis_to_string(Axis a) {
  switch (a) {
    case Axis::PosX: return "+x";
    case Axis::NegX: return "-x";
    case Axis::PosY: return "+y";
    case Axis::NegY: return "-y";
    case Axis::PosZ: return "+z";
    case Axis::NegZ: return "-z";
  }
  return "?";
}

namespace {
int axis_index(Axis a) {
  switch (a) {
    case Axis::PosX:
    case Axis::NegX: return 0;
    case Axis::PosY:
    case Axis::NegY: return 1;
    default: return 2;
  }
}
double axis_sign(Axis a) {
  return (a == Axis::NegX || a == Axis::NegY || a == Axis::NegZ) ? -1.0 : 1.0;
}
} // namespace

bool is_connected(const TriMesh& mesh, std::vector<Eigen::Index>* sizes) {
  const Eigen::Index n = mesh.n_vertices();
  if (n == 0) return false;
  UnionFind uf(n);
  for (Eigen::Index f = 0; f < mesh.n_faces(); ++f) {
    uf.unite(mesh.F(f, 0), mesh.F(f, 1));
    uf.unite(mesh.F(f, 1), mesh.F(f, 2));
  }
  std::vector<Eigen::Index> count(static_cast<std::size_t>(n), 0);
  for (Eigen::Index v = 0; v < n; ++v) ++count[static_cast<std::size_t>(uf.find(v))];
  std::vector<Eigen::Index> comp;
  for (Eigen::Index c : count)
    if (c > 0) comp.push_back(c);
  std::sort(comp.begin(), comp.end(), std::greater<>());
  if (sizes) *sizes = comp;
  return comp.size() == 1;
}

void validate_mesh(const TriMesh& mesh, const std::string& context) {
  const Eigen::Index n = mesh.n_vertices();
  if (n == 0) throw InputError(context + ": mesh has no vertices");
  for (Eigen::Index f = 0; f < mesh.n_faces(); ++f) {
    for (int c = 0; c < 3; ++c) {
      int idx = mesh.F(f, c);
      if (idx < 0 || idx >= n)
        throw InputError(strf("%s: face %lld references vertex %d outside [0, %lld)",
                              context.c_str(), static_cast<long long>(f), idx,
                              static_cast<long long>(n)));
    }
    if (mesh.F(f, 0) == mesh.F(f, 1) || mesh.F(f, 1) == mesh.F(f, 2) ||
        mesh.F(f, 0) == mesh.F(f, 2))
      throw InputError(strf("%s: face %lld is degenerate (repeated vertex index)",
                            context.c_str(), static_cast<long long>(f)));
  }
  std::vector<Eigen::Index> sizes;
  if (!is_connected(mesh, &sizes)) {
    std::string msg = context + ": edge graph is not connected; component sizes:";
    for (Eigen::Index s : sizes) msg += " " + std::to_string(s);
    throw InputError(msg);
  }
}

double total_surface_area(const TriMesh& mesh) {
  double area = 0.0;
  for (Eigen::Index f = 0; f < mesh.n_faces(); ++f) area += triangle_area(mesh, f);
  return area;
}

Eigen::VectorXd vertex_areas(const TriMesh& mesh, int* clamped_count) {
  const Eigen::Index n = mesh.n_vertices();
  Eigen::VectorXd areas = Eigen::VectorXd::Zero(n);
  double total = 0.0;
  for (Eigen::Index f = 0; f < mesh.n_faces(); ++f) {
    double a3 = triangle_area(mesh, f) / 3.0;
    total += 3.0 * a3;
    for (int c = 0; c < 3; ++c) areas[mesh.F(f, c)] += a3;
  }
  int clamped = 0;
  const double eps = 1e-12 * total;
  for (Eigen::Index v = 0; v < n; ++v) {
    if (areas[v] <= 0.0) {
      areas[v] = eps;
      ++clamped;
    }
  }
  if (clamped > 0)
    warn(strf("vertex_areas: %d isolated vertex area(s) clamped to %g", clamped, eps));
  if (clamped_count) *clamped_count = clamped;
  return areas;
}

std::pair<TriMesh, PoseNormalization> normalize_pose(const TriMesh& mesh, Axis up, Axis forward) {
  if (axis_index(up) == axis_index(forward))
    throw InputError("normalize_pose: up and forward axes must differ (got " +
                     axis_to_string(up) + " and " + axis_to_string(forward) + ")");
  const double area = total_surface_area(mesh);
  if (!(area > 0.0)) throw InputError("normalize_pose: mesh has zero surface area");

  PoseNormalization pn;
  pn.translation = -mesh.V.colwise().mean().transpose();
  pn.scale = 1.0 / std::sqrt(area); // area scales quadratically with length

  // Rows of the transform pick source axes: row 1 <- up, row 2 <- forward,
  // row 0 <- the remaining axis with positive sign.
  int iu = axis_index(up), If = axis_index(forward);
  int ir = 3 - iu - If;
  Eigen::Matrix3d R = Eigen::Matrix3d::Zero();
  R(1, iu) = axis_sign(up);
  R(2, If) = axis_sign(forward);
  R(0, ir) = 1.0;
  pn.axis_transform = R;

  TriMesh out;
  out.V.resize(mesh.V.rows(), 3);
  for (Eigen::Index v = 0; v < mesh.V.rows(); ++v)
    out.V.row(v) = pn.apply(mesh.V.row(v).transpose()).transpose();
  out.F = mesh.F;
  if (mesh.has_normals()) {
    out.N.resize(mesh.N.rows(), 3);
    for (Eigen::Index v = 0; v < mesh.N.rows(); ++v)
      out.N.row(v) = (R * mesh.N.row(v).transpose()).transpose();
  }
  return {std::move(out), pn};
}

} // namespace fmatch
