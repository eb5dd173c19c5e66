#include "fmatch/mesh.hpp"

#include "fmatch/errors.hpp"
#include "fmatch/util.hpp"
#include "support/synthetic.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace fmatch;
namespace ts = fmatch::testsupport;

TEST_SUITE("mesh") {

TEST_CASE("vertex areas of a unit right triangle are 1/6 each") {
  Eigen::VectorXd a = vertex_areas(ts::right_triangle());
  REQUIRE(a.size() == 3);
  for (int i = 0; i < 3; ++i) CHECK(a[i] == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("vertex areas of a regular tetrahedron are sqrt(3)/4 each") {
  Eigen::VectorXd a = vertex_areas(ts::regular_tetrahedron());
  for (int i = 0; i < 4; ++i)
    CHECK(a[i] == doctest::Approx(std::sqrt(3.0) / 4.0).epsilon(1e-12));
}

TEST_CASE("areas sum to the total surface area") {
  TriMesh square = ts::unit_square(2.0);
  CHECK(total_surface_area(square) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(vertex_areas(square).sum() == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("vertex areas are permutation equivariant") {
  TriMesh mesh = ts::grid_terrain(6, 6);
  std::vector<int> perm(mesh.n_vertices());
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(7);
  for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.index(i)]);
  Eigen::VectorXd a = vertex_areas(mesh);
  Eigen::VectorXd b = vertex_areas(ts::permute_vertices(mesh, perm));
  for (Eigen::Index v = 0; v < a.size(); ++v)
    CHECK(b[perm[v]] == doctest::Approx(a[v]).epsilon(1e-12));
}

TEST_CASE("isolated vertices get a clamped area and a warning") {
  TriMesh mesh = ts::right_triangle();
  mesh.V.conservativeResize(4, 3);
  mesh.V.row(3) << 5, 5, 5;
  std::uint64_t warnings = warning_count();
  int clamped = 0;
  Eigen::VectorXd a = vertex_areas(mesh, &clamped);
  CHECK(clamped == 1);
  CHECK(warning_count() > warnings);
  CHECK(a[3] == doctest::Approx(1e-12 * 0.5).epsilon(1e-9));
  CHECK(a[3] > 0.0);
}

TEST_CASE("validate_mesh rejects out-of-range indices") {
  TriMesh mesh = ts::right_triangle();
  mesh.F(0, 2) = 9;
  CHECK_THROWS_WITH_AS(validate_mesh(mesh), doctest::Contains("vertex 9"), InputError);
}

TEST_CASE("validate_mesh rejects repeated indices in a face") {
  TriMesh mesh = ts::right_triangle();
  mesh.F(0, 1) = 0;
  CHECK_THROWS_WITH_AS(validate_mesh(mesh), doctest::Contains("degenerate"), InputError);
}

TEST_CASE("connectivity error names every component size") {
  TriMesh mesh = ts::two_triangles_apart();
  CHECK_FALSE(is_connected(mesh));
  CHECK_THROWS_WITH_AS(validate_mesh(mesh), doctest::Contains("3 3"), InputError);
}

TEST_CASE("normalize_pose centers, scales to unit area and is idempotent") {
  TriMesh mesh = ts::grid_terrain(5, 5);
  mesh.V.array() += 3.0; // move off-center
  auto [out, pose] = normalize_pose(mesh, Axis::PosY, Axis::PosZ);
  CHECK(total_surface_area(out) == doctest::Approx(1.0).epsilon(1e-12));
  Eigen::Vector3d centroid = out.V.colwise().mean();
  CHECK(centroid.norm() < 1e-9);
  CHECK(pose.axis_transform.isIdentity(0.0));

  auto [out2, pose2] = normalize_pose(out, Axis::PosY, Axis::PosZ);
  CHECK((out2.V - out.V).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(pose2.scale == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("declared axes are remapped onto +y/+z") {
  // up along +x: the x coordinate must become the y coordinate.
  TriMesh mesh = ts::grid_terrain(4, 4);
  auto [canonical, p1] = normalize_pose(mesh, Axis::PosY, Axis::PosZ);
  auto [remapped, p2] = normalize_pose(ts::grid_terrain(4, 4), Axis::PosX, Axis::PosZ);
  (void)p1;
  CHECK(remapped.V.col(1).isApprox(canonical.V.col(0), 1e-12));
  CHECK(std::abs(p2.axis_transform.determinant()) == doctest::Approx(1.0).epsilon(1e-12));
  Eigen::Matrix3d gram = p2.axis_transform.transpose() * p2.axis_transform;
  CHECK(gram.isIdentity(1e-15));
}

TEST_CASE("the returned pose reproduces the output vertices") {
  TriMesh mesh = ts::bumpy_sphere(8, 6);
  auto [out, pose] = normalize_pose(mesh, Axis::NegZ, Axis::PosX);
  for (Eigen::Index v = 0; v < mesh.n_vertices(); ++v) {
    Eigen::Vector3d mapped = pose.apply(mesh.V.row(v));
    CHECK((mapped - out.V.row(v).transpose()).norm() == 0.0);
  }
}

TEST_CASE("normalize_pose rejects equal axes and flat meshes") {
  TriMesh mesh = ts::right_triangle();
  CHECK_THROWS_AS(normalize_pose(mesh, Axis::PosY, Axis::NegY), InputError);
  TriMesh flat = mesh;
  flat.V.setZero();
  CHECK_THROWS_WITH_AS(normalize_pose(flat, Axis::PosY, Axis::PosZ),
                       doctest::Contains("area"), InputError);
}

TEST_CASE("axis names round-trip and bad ones are rejected") {
  for (Axis a : {Axis::PosX, Axis::NegX, Axis::PosY, Axis::NegY, Axis::PosZ, Axis::NegZ})
    CHECK(axis_from_string(axis_to_string(a)) == a);
  CHECK(axis_from_string("Z") == Axis::PosZ);
  CHECK_THROWS_AS(axis_from_string("+w"), InputError);
}

} // TEST_SUITE
