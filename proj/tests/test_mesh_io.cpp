#include "fmatch/mesh_io.hpp"

#include "fmatch/errors.hpp"
#include "support/synthetic.hpp"

#include <doctest.h>

#include <filesystem>
#include <string>

using namespace fmatch;
namespace ts = fmatch::testsupport;

namespace {

const char* kTetraOff =
    "OFF\n"
    "4 4 0\n"
    "0 0 0\n"
    "1 0 0\n"
    "0 1 0\n"
    "0 0 1\n"
    "3 0 1 2\n"
    "3 0 3 1\n"
    "3 0 2 3\n"
    "3 1 3 2\n";

} // namespace

TEST_SUITE("mesh_io") {

TEST_CASE("OFF tetrahedron parses with order preserved") {
  TriMesh mesh = parse_mesh(kTetraOff, MeshFormat::Off, "tetra.off");
  REQUIRE(mesh.n_vertices() == 4);
  REQUIRE(mesh.n_faces() == 4);
  CHECK(mesh.V.row(1) == Eigen::RowVector3d(1, 0, 0));
  CHECK(mesh.F(1, 1) == 3);
}

TEST_CASE("out-of-range face index is rejected with the bad index") {
  std::string text = kTetraOff;
  text.replace(text.find("3 1 3 2"), 7, "3 1 9 2");
  CHECK_THROWS_WITH_AS(parse_mesh(text, MeshFormat::Off, "bad.off"),
                       doctest::Contains("vertex 9"), InputError);
}

TEST_CASE("parse errors carry file and line context") {
  std::string text = "OFF\n4 4 0\n0 0 0\n1 0 zebra\n";
  try {
    parse_mesh(text, MeshFormat::Off, "zebra.off");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.path() == "zebra.off");
    CHECK(e.line() == 4);
  }
}

TEST_CASE("non-triangle OFF faces are rejected") {
  std::string text = "OFF\n4 1 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n4 0 1 2 3\n";
  CHECK_THROWS_AS(parse_mesh(text, MeshFormat::Off, "quad.off"), ParseError);
}

TEST_CASE("save/load round-trips every format exactly") {
  namespace fs = std::filesystem;
  fs::create_directories("tmp_meshio");
  TriMesh mesh = ts::grid_terrain(5, 4);
  for (const char* name : {"m.off", "m.obj", "m.ply"}) {
    std::string path = std::string("tmp_meshio/") + name;
    save_mesh(mesh, path);
    TriMesh back = load_mesh(path);
    REQUIRE(back.n_vertices() == mesh.n_vertices());
    REQUIRE(back.n_faces() == mesh.n_faces());
    CHECK((back.V - mesh.V).cwiseAbs().maxCoeff() == 0.0); // %.17g round-trips doubles
    CHECK((back.F - mesh.F).cwiseAbs().maxCoeff() == 0);
  }
  fs::remove_all("tmp_meshio");
}

TEST_CASE("OBJ accepts v//vn and negative relative indices") {
  std::string text =
      "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\n"
      "vn 0 0 1\nvn 0 0 1\nvn 0 0 1\nvn 0 0 1\n"
      "f 1//1 2//2 3//3\n"
      "f -4 -1 -3\n" // 1 4 2
      "f 1/2/3 3/1/2 4/4/4\n"
      "f 2 4 3\n";
  TriMesh mesh = parse_mesh(text, MeshFormat::Obj, "t.obj");
  REQUIRE(mesh.n_faces() == 4);
  CHECK(mesh.F.row(0) == Eigen::RowVector3i(0, 1, 2));
  CHECK(mesh.F.row(1) == Eigen::RowVector3i(0, 3, 1));
  CHECK(mesh.has_normals());
}

TEST_CASE("PLY respects declared property order") {
  std::string text =
      "ply\nformat ascii 1.0\n"
      "element vertex 4\n"
      "property float z\nproperty float x\nproperty float y\n"
      "element face 4\n"
      "property list uchar int vertex_indices\n"
      "end_header\n"
      "0 0 0\n0 1 0\n0 0 1\n1 0 0\n"
      "3 0 1 2\n3 0 3 1\n3 0 2 3\n3 1 3 2\n";
  TriMesh mesh = parse_mesh(text, MeshFormat::PlyAscii, "t.ply");
  CHECK(mesh.V.row(1) == Eigen::RowVector3d(1, 0, 0)); // x came second in the line
  CHECK(mesh.V.row(3) == Eigen::RowVector3d(0, 0, 1));
}

TEST_CASE("loading a disconnected mesh fails at load time") {
  namespace fs = std::filesystem;
  fs::create_directories("tmp_meshio");
  save_mesh(ts::two_triangles_apart(), "tmp_meshio/split.off");
  CHECK_THROWS_WITH_AS(load_mesh("tmp_meshio/split.off"), doctest::Contains("connected"),
                       InputError);
  fs::remove_all("tmp_meshio");
}

TEST_CASE("format inference rejects unknown extensions") {
  CHECK(mesh_format_from_path("x/y/mesh.OFF") == MeshFormat::Off);
  CHECK_THROWS_AS(mesh_format_from_path("mesh.stl"), InputError);
}

} // TEST_SUITE
