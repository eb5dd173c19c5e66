#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace fmatch {

// Triangle mesh. Vertices are rows of V, triangles rows of F (0-based
// indices). Immutable by convention once loaded; nothing here mutates a mesh
// in place.
struct TriMesh {
  Eigen::MatrixX3d V;
  Eigen::MatrixX3i F;
  Eigen::MatrixX3d N; // optional per-vertex normals; 0 rows when absent

  Eigen::Index n_vertices() const { return V.rows(); }
  Eigen::Index n_faces() const { return F.rows(); }
  bool has_normals() const { return N.rows() == V.rows() && V.rows() > 0; }
};

// Signed axis identifier for declared up/forward directions.
enum class Axis { PosX, NegX, PosY, NegY, PosZ, NegZ };

Axis axis_from_string(const std::string& s); // "+x", "-y", "z", ...
std::string axis_to_string(Axis a);

// Similarity transform bringing a mesh into canonical pose:
//   v_out = axis_transform * ((v_in + translation) * scale)
// axis_transform is a signed permutation (orthogonal, det +-1).
struct PoseNormalization {
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  double scale = 1.0;
  Eigen::Matrix3d axis_transform = Eigen::Matrix3d::Identity();

  Eigen::Vector3d apply(const Eigen::Vector3d& v) const {
    return axis_transform * ((v + translation) * scale);
  }
};

// Structural checks: index range, degenerate triangles, edge-graph
// connectivity. Throws InputError describing the first violation;
// the connectivity message names every component size.
void validate_mesh(const TriMesh& mesh, const std::string& context = "mesh");

// True iff the edge graph touches every vertex and forms one component.
// Component sizes (descending) are returned through `sizes` when given.
bool is_connected(const TriMesh& mesh, std::vector<Eigen::Index>* sizes = nullptr);

double total_surface_area(const TriMesh& mesh);

// Lumped vertex areas: one third of the incident triangle areas. Entries for
// isolated vertices are clamped to 1e-12 * total_area with a warning;
// clamped_count (if non-null) receives how many entries were clamped.
Eigen::VectorXd vertex_areas(const TriMesh& mesh, int* clamped_count = nullptr);

// Translate the centroid to the origin, scale to unit surface area, and remap
// the declared up/forward axes onto +y/+z (remaining axis goes to +x).
// Throws InputError on zero surface area or up/forward on the same axis.
std::pair<TriMesh, PoseNormalization> normalize_pose(const TriMesh& mesh, Axis up, Axis forward);

} // namespace fmatch
