#pragma once

#include "fmatch/mesh.hpp"

#include <cstdint>
#include <vector>

namespace fmatch::testsupport {

// Single face in the z=0 plane, right angle at v0, unit legs.
TriMesh right_triangle();

// Unit square split along the diagonal v0-v2.
TriMesh unit_square(double side = 1.0);

// All edges length 1.
TriMesh regular_tetrahedron();

// Right-corner tetrahedron: origin plus unit points on each axis.
TriMesh corner_tetrahedron();

// Four collinear vertices at x=0..3 triangulated into two zero-area faces;
// the edge graph is a path plus the chords the faces induce.
TriMesh collinear_strip();

// Two disjoint triangles (fails connectivity on purpose).
TriMesh two_triangles_apart();

// Regular (nu x nv)-vertex grid in the z=0 plane with the given spacing,
// each cell split into two triangles. Vertex (i,j) has index j*nu + i.
TriMesh flat_grid(int nu, int nv, double spacing);

// Same grid with a fixed wavy height field; no mirror or rotational
// symmetry, so spectral embeddings separate all vertices.
TriMesh grid_terrain(int nu, int nv);

// Icosahedron subdivided `subdivisions` times, vertices on the unit sphere
// (12, 42, 162, 642 ... vertices).
TriMesh icosphere(int subdivisions);

// Per-vertex radial perturbation: v <- v * (1 + amplitude * u), u uniform in
// [-1, 1) from the project RNG. Vertex directions are preserved, so the
// ground-truth correspondence to the input sphere is the identity.
TriMesh radial_noise(const TriMesh& sphere, double amplitude, std::uint64_t seed);

// UV sphere with an asymmetric radial modulation; (rings-1)*segments + 2
// vertices. Poles sit on the +y/-y axis.
TriMesh bumpy_sphere(int segments, int rings);

struct Crop {
  TriMesh mesh;
  Eigen::VectorXi orig_vertex; // orig_vertex[j] = index in the full mesh
};

// Keep the faces whose three vertices all have height (y) below the
// `fraction` quantile; vertices keep their relative order.
Crop crop_below_quantile(const TriMesh& mesh, double fraction);

// Relabel vertices: new index of old vertex i is perm[i].
TriMesh permute_vertices(const TriMesh& mesh, const std::vector<int>& perm);

// Vertices within `rings` edge hops of v (v included), ascending.
std::vector<int> ring_neighborhood(const TriMesh& mesh, int v, int rings);

} // namespace fmatch::testsupport
