#include "fmatch/pipeline.hpp"

#include "fmatch/errors.hpp"
#include "fmatch/mesh_io.hpp"
#include "fmatch/serialize.hpp"
#include "fmatch/util.hpp"
#include "support/synthetic.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <string>

using namespace fmatch;
namespace ts = fmatch::testsupport;
namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

// Small configuration so the cached basis stays cheap to compute.
RunConfig small_config() {
  RunConfig cfg;
  cfg.k = 8;
  cfg.k_partial = 10;
  cfg.zoomout.k_final = 10;
  cfg.training.steps = 5;
  cfg.training.learning_rate = 1e-3;
  return cfg;
}

struct PipeDirs {
  std::string root = "tmp_pipeline";
  std::string cache = "tmp_pipeline/cache";
  std::string mesh_a = "tmp_pipeline/a.off";
  std::string mesh_b = "tmp_pipeline/b.off";

  PipeDirs() {
    fs::create_directories(cache);
    TriMesh a = ts::bumpy_sphere(8, 6);
    save_mesh(a, mesh_a);
    save_mesh(ts::radial_noise(a, 0.01, 5), mesh_b);
  }
  ~PipeDirs() { fs::remove_all(root); }
};

} // namespace

TEST_SUITE("pipeline") {

TEST_CASE("descriptor spec builds the requested columns") {
  TriMesh mesh = ts::bumpy_sphere(8, 6);
  SpectralBasis basis = eigenbasis(build_laplacian(mesh), 10);

  Eigen::MatrixXd h = build_descriptors(mesh, basis, "hks");
  CHECK(h.cols() == 16);
  CHECK(h == hks(basis, default_hks_times(basis)).values);

  Eigen::MatrixXd all = build_descriptors(mesh, basis, "hks+wks+xyz");
  REQUIRE(all.cols() == 35);
  CHECK(all.leftCols(16) == h);
  auto [energies, sigma] = default_wks_energies(basis);
  CHECK(all.middleCols(16, 16) == wks(basis, energies, sigma).values);
  CHECK(all.rightCols(3) == coordinate_descriptors(mesh, basis).values);

  CHECK_THROWS_WITH_AS(build_descriptors(mesh, basis, "hks+curvature"),
                       doctest::Contains("curvature"), InputError);
}

TEST_CASE("shape cache misses, hits, and heals itself") {
  PipeDirs dirs;
  RunConfig cfg = small_config();

  ShapeData first = load_shape(dirs.mesh_a, cfg, dirs.cache);
  CHECK_FALSE(first.cache_hit);
  CHECK(fs::exists(first.basis_path));
  CHECK(fs::exists(first.desc_path));
  CHECK(first.basis.k == 10);
  CHECK(first.descriptors.cols() == 32); // hks+wks

  ShapeData second = load_shape(dirs.mesh_a, cfg, dirs.cache);
  CHECK(second.cache_hit);
  CHECK(second.basis.lambda == first.basis.lambda);
  CHECK(second.descriptors == first.descriptors);

  // unreadable cache entries are recomputed with a warning
  atomic_write_file(first.basis_path, "not a cache file");
  std::uint64_t warnings = warning_count();
  ShapeData healed = load_shape(dirs.mesh_a, cfg, dirs.cache);
  CHECK(warning_count() == warnings + 1);
  CHECK_FALSE(healed.cache_hit);
  CHECK(load_shape(dirs.mesh_a, cfg, dirs.cache).cache_hit);

  // readable entries for the wrong mesh are also replaced
  SpectralBasis stray = eigenbasis(build_laplacian(ts::grid_terrain(5, 5)), 3);
  write_fmsb(first.basis_path, stray);
  write_fmmat(first.desc_path, Eigen::MatrixXd::Zero(25, 2));
  warnings = warning_count();
  healed = load_shape(dirs.mesh_a, cfg, dirs.cache);
  CHECK(warning_count() == warnings + 1);
  CHECK(healed.basis.n() == first.basis.n());

  // the cache key tracks the configuration
  RunConfig other = cfg;
  other.descriptors = "hks";
  CHECK(load_shape(dirs.mesh_a, other, dirs.cache).desc_path != first.desc_path);
}

TEST_CASE("matching a shape with itself gives the identity") {
  PipeDirs dirs;
  RunConfig cfg = small_config();
  // coordinate descriptors anchor the low modes; smooth multiscale columns
  // alone leave the last solve directions under the ridge floor
  cfg.descriptors = "hks+wks+xyz";
  std::string out = dirs.root + "/self";

  MatchOutput result = run_match(dirs.mesh_a, dirs.mesh_a, cfg, dirs.cache, out, false);
  CHECK_FALSE(result.refined);
  CHECK(result.c12.C.rows() == 8);
  CHECK((result.c12.C - Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-2);
  for (Eigen::Index j = 0; j < result.map.size(); ++j) CHECK(result.map.assignment[j] == j);

  PointMap stored = load_point_map(out + "/map.p2p");
  CHECK(stored.assignment == result.map.assignment);
  CHECK(stored.source_id == "a");
  CHECK(stored.target_id == "a");
  CHECK(read_fmmat(out + "/C.fmmat").rows() == 8);
  CHECK(read_file(out + "/loss.csv").rfind("e1,e2,e3,total\n", 0) == 0);

  Json manifest = Json::parse(read_file(out + "/manifest.json"));
  CHECK(manifest["tool"] == kToolVersion);
  CHECK(manifest["command"] == "match");
  CHECK(manifest["config_hash"] == config_hash(cfg));
  CHECK(manifest["seed"] == 0);
  CHECK(manifest["inputs"].contains(dirs.mesh_a));
  CHECK(manifest["outputs"] == Json::array({"C.fmmat", "map.p2p", "loss.csv"}));
}

TEST_CASE("match artifacts are byte-identical across reruns") {
  PipeDirs dirs;
  RunConfig cfg = small_config();

  run_match(dirs.mesh_a, dirs.mesh_b, cfg, dirs.cache, dirs.root + "/m1", false);
  run_match(dirs.mesh_a, dirs.mesh_b, cfg, dirs.cache, dirs.root + "/m2", false);
  for (const char* name : {"C.fmmat", "map.p2p", "loss.csv", "manifest.json"})
    CHECK(read_file(dirs.root + "/m1/" + name) == read_file(dirs.root + "/m2/" + name));
}

TEST_CASE("refinement grows the map to the final basis size") {
  PipeDirs dirs;
  RunConfig cfg = small_config();
  std::string out = dirs.root + "/refined";

  MatchOutput result = run_match(dirs.mesh_a, dirs.mesh_b, cfg, dirs.cache, out, true);
  CHECK(result.refined);
  CHECK(result.c12.C.rows() == cfg.zoomout.k_final);
  CHECK(result.map.size() == 42);
  CHECK(read_fmmat(out + "/C.fmmat").rows() == cfg.zoomout.k_final);
}

TEST_CASE("partial match emits the alignment artifacts") {
  PipeDirs dirs;
  TriMesh full = ts::bumpy_sphere(12, 10);
  ts::Crop crop = ts::crop_below_quantile(full, 0.55);
  std::string full_path = dirs.root + "/full.off";
  std::string part_path = dirs.root + "/part.off";
  save_mesh(full, full_path);
  save_mesh(crop.mesh, part_path);

  RunConfig cfg = small_config();
  cfg.k_partial = 12;
  cfg.zoomout.k_final = 12;
  std::string out = dirs.root + "/partial";
  PartialMatchOutput result =
      run_partial_match(full_path, part_path, cfg, dirs.cache, out, false);

  CHECK(result.alignment.X.rows() == 12);
  CHECK(result.alignment.X.cols() == result.alignment.r);
  CHECK(result.offdiag >= 0.0);
  CHECK(result.map.size() == crop.mesh.n_vertices());
  CHECK_FALSE(result.refined);

  CHECK(read_fmmat(out + "/X.fmmat").cols() == result.alignment.r);
  CHECK(load_point_map(out + "/map.p2p").target_id == "part");
  CHECK(read_file(out + "/energy.csv").rfind("r,offdiag\n", 0) == 0);

  Json side = Json::parse(read_file(out + "/alignment.json"));
  CHECK(side["r"] == result.alignment.r);
  CHECK(side["k_partial"] == 12);
  CHECK(side["refined"] == false);
  Json manifest = Json::parse(read_file(out + "/manifest.json"));
  CHECK(manifest["command"] == "partial-match");
}

TEST_CASE("weight training writes a reproducible run record") {
  PipeDirs dirs;
  RunConfig cfg = small_config();
  std::string manifest_path = dirs.root + "/train.json";
  atomic_write_file(manifest_path,
                    Json{{"mode", "full"},
                         {"d_out", 4},
                         {"pairs", Json::array({Json{{"first", dirs.mesh_a},
                                                     {"second", dirs.mesh_b}}})}}
                        .dump());

  TrainResult result = run_train_weights(manifest_path, cfg, dirs.cache, dirs.root + "/t1");
  CHECK(result.weights.matrix.rows() == 32);
  CHECK(result.weights.matrix.cols() == 4);
  CHECK(result.loss_trace.size() == 5);
  CHECK(std::isfinite(result.final_loss));

  CHECK(read_fmmat(dirs.root + "/t1/weights.fmmat") == result.weights.matrix);
  std::string trace = read_file(dirs.root + "/t1/trace.csv");
  CHECK(trace.rfind("step,loss\n", 0) == 0);
  CHECK(std::count(trace.begin(), trace.end(), '\n') == 6);

  Json summary = Json::parse(read_file(dirs.root + "/t1/summary.json"));
  CHECK(summary["mode"] == "full");
  CHECK(summary["pairs"] == 1);
  CHECK(summary["d_out"] == 4);
  CHECK(summary["initial_loss"] == result.initial_loss);
  CHECK(summary["final_loss"] == result.final_loss);

  run_train_weights(manifest_path, cfg, dirs.cache, dirs.root + "/t2");
  CHECK(read_file(dirs.root + "/t1/weights.fmmat") == read_file(dirs.root + "/t2/weights.fmmat"));
  CHECK(read_file(dirs.root + "/t1/trace.csv") == read_file(dirs.root + "/t2/trace.csv"));

  // trained weights feed straight back into matching
  MatchOutput match = run_match(dirs.mesh_a, dirs.mesh_b, cfg, dirs.cache, dirs.root + "/mw",
                                false, dirs.root + "/t1/weights.fmmat");
  CHECK(match.c12.C.rows() == 8);

  write_fmmat(dirs.root + "/bad.fmmat", Eigen::MatrixXd::Zero(5, 2));
  CHECK_THROWS_AS(run_match(dirs.mesh_a, dirs.mesh_b, cfg, dirs.cache, dirs.root + "/mb", false,
                            dirs.root + "/bad.fmmat"),
                  DimensionError);
}

TEST_CASE("partial-mode training runs through the same manifest") {
  PipeDirs dirs;
  TriMesh full = ts::bumpy_sphere(12, 10);
  std::string full_path = dirs.root + "/full.off";
  std::string part_path = dirs.root + "/part.off";
  save_mesh(full, full_path);
  save_mesh(ts::crop_below_quantile(full, 0.55).mesh, part_path);

  RunConfig cfg = small_config();
  cfg.k_partial = 12;
  cfg.zoomout.k_final = 12;
  cfg.training.steps = 3;
  std::string manifest_path = dirs.root + "/train.json";
  atomic_write_file(manifest_path,
                    Json{{"mode", "partial"},
                         {"d_out", 4},
                         {"pairs", Json::array({Json{{"first", full_path},
                                                     {"second", part_path}}})}}
                        .dump());

  TrainResult result = run_train_weights(manifest_path, cfg, dirs.cache, dirs.root + "/tp");
  CHECK(result.weights.matrix.rows() == 32);
  CHECK(result.loss_trace.size() == 3);
  CHECK(std::isfinite(result.final_loss));
  CHECK(result.final_loss >= 0.0);
  CHECK(Json::parse(read_file(dirs.root + "/tp/summary.json"))["mode"] == "partial");

  run_train_weights(manifest_path, cfg, dirs.cache, dirs.root + "/tp2");
  CHECK(read_file(dirs.root + "/tp/weights.fmmat") ==
        read_file(dirs.root + "/tp2/weights.fmmat"));
}

TEST_CASE("train manifest schema errors name the offending field") {
  PipeDirs dirs;
  RunConfig cfg = small_config();
  std::string path = dirs.root + "/bad.json";
  auto reject = [&](const std::string& text, const char* needle) {
    atomic_write_file(path, text);
    CHECK_THROWS_WITH_AS(run_train_weights(path, cfg, dirs.cache, dirs.root + "/out"),
                         doctest::Contains(needle), InputError);
  };

  reject(R"({"d_out": 4, "pairs": [{"first": "a", "second": "b"}]})", "mode");
  reject(R"({"mode": "half", "d_out": 4, "pairs": [{"first": "a", "second": "b"}]})", "mode");
  reject(R"({"mode": "full", "pairs": [{"first": "a", "second": "b"}]})", "d_out");
  reject(R"({"mode": "full", "d_out": 0, "pairs": [{"first": "a", "second": "b"}]})", "d_out");
  reject(R"({"mode": "full", "d_out": 4})", "pairs");
  reject(R"({"mode": "full", "d_out": 4, "pairs": []})", "pairs");
  reject(R"({"mode": "full", "d_out": 4, "pairs": ["a"]})", "pairs[0]");
  reject(R"({"mode": "full", "d_out": 4, "pairs": [{"first": "a"}]})", "pairs[0].second");
  reject(R"({"mode": "full", "d_out": 4, "pairs": [{"first": "a", "second": "b"}], "extra": 1})",
         "extra");
  atomic_write_file(path, "{");
  CHECK_THROWS_AS(run_train_weights(path, cfg, dirs.cache, dirs.root + "/out"), InputError);
}

TEST_CASE("evaluating a map against itself reports zeros") {
  PipeDirs dirs;
  RunConfig cfg = small_config();

  PointMap map;
  map.assignment = Eigen::VectorXi::LinSpaced(42, 0, 41);
  map.source_id = "a";
  map.target_id = "a";
  std::string pred = dirs.root + "/pred.p2p";
  std::string truth = dirs.root + "/truth.p2p";
  save_point_map(map, pred);
  save_point_map(map, truth);

  std::string out = dirs.root + "/eval";
  ErrorSummary summary = run_eval(pred, truth, dirs.mesh_a, cfg, out);
  CHECK(summary.mean_x100 == 0.0);
  for (const char* name : {"means.csv", "pck.csv", "pck.svg"})
    CHECK(fs::exists(out + "/" + std::string(name)));
  CHECK(read_file(out + "/means.csv").find("a:a") != std::string::npos);
  CHECK(Json::parse(read_file(out + "/manifest.json"))["command"] == "eval");

  // mismatched pair labels are flagged but still evaluated
  map.target_id = "b";
  save_point_map(map, truth);
  std::uint64_t warnings = warning_count();
  run_eval(pred, truth, dirs.mesh_a, cfg, out);
  CHECK(warning_count() == warnings + 1);
}

} // TEST_SUITE
