#include "fmatch/pipeline.hpp"

#include "fmatch/errors.hpp"
#include "fmatch/mesh_io.hpp"
#include "fmatch/serialize.hpp"
#include "fmatch/util.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <sstream>

namespace fmatch {

using Json = nlohmann::ordered_json;

namespace {

std::string stem_of(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

// Basis size held in the cache: enough for plain matching, partial
// alignment and zoomout in one artifact, capped by the mesh size.
int stored_basis_size(const RunConfig& cfg, Eigen::Index n) {
  int k = std::max({cfg.k, cfg.k_partial, cfg.zoomout.k_final});
  return std::min<int>(k, static_cast<int>(n) - 1);
}

std::vector<std::string> split_plus(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == '+') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

void write_manifest(const std::string& out_dir, const std::string& command,
                    const RunConfig& cfg,
                    const std::vector<std::pair<std::string, std::string>>& inputs,
                    const std::vector<std::string>& outputs) {
  Json m;
  m["tool"] = kToolVersion;
  m["command"] = command;
  m["config_hash"] = config_hash(cfg);
  m["seed"] = cfg.training.seed;
  Json in = Json::object();
  for (const auto& [path, hash] : inputs) in[path] = hash;
  m["inputs"] = in;
  m["outputs"] = outputs;
  atomic_write_file(out_dir + "/manifest.json", m.dump(2) + "\n");
}

Eigen::MatrixXd maybe_combine(const Eigen::MatrixXd& coeff,
                              const std::optional<std::string>& weights_path) {
  if (!weights_path) return coeff;
  Eigen::MatrixXd w = read_fmmat(*weights_path);
  if (w.rows() != coeff.cols())
    throw DimensionError(strf("weights %s: %lldx%lld does not match %lld descriptors",
                              weights_path->c_str(), static_cast<long long>(w.rows()),
                              static_cast<long long>(w.cols()),
                              static_cast<long long>(coeff.cols())));
  return coeff * w;
}

std::string input_hash_hex(const std::string& path) { return hash_hex(hash_file(path)); }

} // namespace

Eigen::MatrixXd build_descriptors(const TriMesh& mesh, const SpectralBasis& basis,
                                  const std::string& spec) {
  Eigen::MatrixXd out;
  for (const std::string& token : split_plus(spec)) {
    DescriptorSet set;
    if (token == "hks") {
      set = hks(basis, default_hks_times(basis));
    } else if (token == "wks") {
      auto [energies, sigma] = default_wks_energies(basis);
      set = wks(basis, energies, sigma);
    } else if (token == "xyz") {
      set = coordinate_descriptors(mesh, basis);
    } else {
      throw InputError(strf("unknown descriptor \"%s\" (expected hks, wks or xyz)",
                            token.c_str()));
    }
    if (out.size() == 0) {
      out = set.values;
    } else {
      Eigen::MatrixXd joined(out.rows(), out.cols() + set.values.cols());
      joined << out, set.values;
      out = joined;
    }
  }
  return out;
}

ShapeData load_shape(const std::string& mesh_path, const RunConfig& cfg,
                     const std::string& cache_dir) {
  ShapeData shape;
  shape.mesh_path = mesh_path;
  shape.mesh = load_mesh(mesh_path);
  shape.mesh = normalize_pose(shape.mesh, axis_from_string(cfg.up_axis),
                              axis_from_string(cfg.forward_axis))
                   .first;

  const int k_store = stored_basis_size(cfg, shape.mesh.V.rows());
  std::uint64_t mesh_hash = hash_file(mesh_path);
  shape.mesh_hash = hash_hex(mesh_hash);

  // Cache key covers everything that shapes the artifacts.
  std::string key_text = strf("%s|k=%d|desc=%s|up=%s|fwd=%s|%s", shape.mesh_hash.c_str(),
                              k_store, cfg.descriptors.c_str(), cfg.up_axis.c_str(),
                              cfg.forward_axis.c_str(), kToolVersion);
  std::string key = hash_hex(fnv1a(key_text));
  std::filesystem::create_directories(cache_dir);
  shape.basis_path = cache_dir + "/" + stem_of(mesh_path) + "-" + key + ".fmsb";
  shape.desc_path = cache_dir + "/" + stem_of(mesh_path) + "-" + key + ".fmmat";

  if (std::filesystem::exists(shape.basis_path) && std::filesystem::exists(shape.desc_path)) {
    try {
      shape.basis = read_fmsb(shape.basis_path);
      shape.descriptors = read_fmmat(shape.desc_path);
      if (shape.basis.n() == shape.mesh.V.rows() &&
          shape.descriptors.rows() == shape.mesh.V.rows()) {
        shape.cache_hit = true;
        std::cerr << "fmatch: cache hit for " << mesh_path << "\n";
        return shape;
      }
      warn(strf("cache for %s has wrong dimensions; recomputing", mesh_path.c_str()));
    } catch (const Error& e) {
      warn(strf("cache for %s unreadable (%s); recomputing", mesh_path.c_str(), e.what()));
    }
  }

  LaplacianPair lap = build_laplacian(shape.mesh);
  shape.basis = eigenbasis(lap, k_store, {});
  shape.descriptors = build_descriptors(shape.mesh, shape.basis, cfg.descriptors);
  write_fmsb(shape.basis_path, shape.basis);
  write_fmmat(shape.desc_path, shape.descriptors);
  return shape;
}

MatchOutput run_match(const std::string& source_path, const std::string& target_path,
                      const RunConfig& cfg, const std::string& cache_dir,
                      const std::string& out_dir, bool refine,
                      const std::optional<std::string>& weights_path) {
  ShapeData s1 = load_shape(source_path, cfg, cache_dir);
  ShapeData s2 = load_shape(target_path, cfg, cache_dir);

  int k = std::min({cfg.k, s1.basis.k, s2.basis.k});
  if (k < cfg.k)
    warn(strf("basis size clamped to %d (mesh too small for k=%d)", k, cfg.k));

  Eigen::MatrixXd coeff1 =
      maybe_combine(project(s1.basis, s1.descriptors), weights_path).topRows(k);
  Eigen::MatrixXd coeff2 =
      maybe_combine(project(s2.basis, s2.descriptors), weights_path).topRows(k);
  Eigen::VectorXd lam1 = s1.basis.lambda.head(k);
  Eigen::VectorXd lam2 = s2.basis.lambda.head(k);

  FmapSolveOptions opts = cfg.solve_options();
  MatchOutput out;
  FunctionalMap c12 = solve_fmap(coeff1, coeff2, opts, lam1, lam2);
  FunctionalMap c21 = solve_fmap(coeff2, coeff1, opts, lam2, lam1);
  out.loss = total_loss(c12, c21, lam1, lam2, cfg.loss_weights);

  if (refine) {
    int k_final = std::min({cfg.zoomout.k_final, s1.basis.k, s2.basis.k});
    if (k_final < cfg.zoomout.k_final)
      warn(strf("zoomout target clamped to %d (mesh too small for k_final=%d)", k_final,
                cfg.zoomout.k_final));
    ZoomoutResult zo = zoomout(c12, s1.basis, s2.basis, k_final, cfg.zoomout.step, cfg.jobs);
    out.c12 = std::move(zo.fmap);
    out.map = std::move(zo.map);
    out.refined = true;
  } else {
    out.c12 = std::move(c12);
    out.map = fmap_to_p2p(out.c12, s1.basis, s2.basis, cfg.jobs);
  }
  out.map.source_id = stem_of(source_path);
  out.map.target_id = stem_of(target_path);

  std::filesystem::create_directories(out_dir);
  write_fmmat(out_dir + "/C.fmmat", out.c12.C);
  save_point_map(out.map, out_dir + "/map.p2p");
  std::string loss_csv = "e1,e2,e3,total\n" + fmt_double(out.loss.e1) + "," +
                         fmt_double(out.loss.e2) + "," + fmt_double(out.loss.e3) + "," +
                         fmt_double(out.loss.total) + "\n";
  atomic_write_file(out_dir + "/loss.csv", loss_csv);
  std::vector<std::pair<std::string, std::string>> inputs = {
      {source_path, s1.mesh_hash}, {target_path, s2.mesh_hash}};
  if (weights_path) inputs.emplace_back(*weights_path, input_hash_hex(*weights_path));
  write_manifest(out_dir, "match", cfg, inputs, {"C.fmmat", "map.p2p", "loss.csv"});
  return out;
}

PartialMatchOutput run_partial_match(const std::string& full_path,
                                     const std::string& partial_path, const RunConfig& cfg,
                                     const std::string& cache_dir, const std::string& out_dir,
                                     bool refine,
                                     const std::optional<std::string>& weights_path) {
  ShapeData full = load_shape(full_path, cfg, cache_dir);
  ShapeData part = load_shape(partial_path, cfg, cache_dir);

  int k_f = std::min(cfg.k_partial, full.basis.k);
  int k_p = std::min(cfg.k_partial, part.basis.k);
  if (k_f < cfg.k_partial || k_p < cfg.k_partial)
    warn(strf("partial basis sizes clamped to %d/%d (meshes too small for k_partial=%d)", k_f,
              k_p, cfg.k_partial));

  PartialConfig pcfg = cfg.partial_config();
  int r = estimate_rank(part.basis.lambda.head(k_p), full.basis.lambda.head(k_f), pcfg);

  Eigen::MatrixXd coeff_f =
      maybe_combine(project(full.basis, full.descriptors), weights_path).topRows(k_f);
  Eigen::MatrixXd coeff_p =
      maybe_combine(project(part.basis, part.descriptors), weights_path).topRows(k_p);

  PartialMatchOutput out;
  out.alignment = solve_alignment(coeff_f, coeff_p, r);
  out.offdiag = offdiag_energy(out.alignment, part.basis.lambda.head(k_p));
  out.map = partial_p2p(full.basis, part.basis, out.alignment, cfg.jobs);

  if (refine) {
    // Experimental: feed the rank-r alignment into plain spectral upsampling,
    // growing toward the shared basis size.
    int k_final = std::min({cfg.zoomout.k_final, full.basis.k, part.basis.k});
    FunctionalMap c_init = p2p_to_fmap(out.map, full.basis, part.basis, r);
    ZoomoutResult zo = zoomout(c_init, full.basis, part.basis, k_final, cfg.zoomout.step,
                               cfg.jobs);
    out.map = std::move(zo.map);
    out.refined = true;
  }
  out.map.source_id = stem_of(full_path);
  out.map.target_id = stem_of(partial_path);

  std::filesystem::create_directories(out_dir);
  write_fmmat(out_dir + "/X.fmmat", out.alignment.X);
  save_point_map(out.map, out_dir + "/map.p2p");
  atomic_write_file(out_dir + "/energy.csv",
                    "r,offdiag\n" + strf("%d,", r) + fmt_double(out.offdiag) + "\n");
  Json side;
  side["r"] = r;
  side["k_full"] = k_f;
  side["k_partial"] = k_p;
  side["offdiag_energy"] = out.offdiag;
  side["refined"] = out.refined;
  atomic_write_file(out_dir + "/alignment.json", side.dump(2) + "\n");
  std::vector<std::pair<std::string, std::string>> inputs = {{full_path, full.mesh_hash},
                                                             {partial_path, part.mesh_hash}};
  if (weights_path) inputs.emplace_back(*weights_path, input_hash_hex(*weights_path));
  write_manifest(out_dir, "partial-match", cfg, inputs,
                 {"X.fmmat", "map.p2p", "energy.csv", "alignment.json"});
  return out;
}

namespace {

[[noreturn]] void manifest_error(const std::string& path, const std::string& field,
                                 const std::string& what) {
  throw InputError(strf("%s: field \"%s\": %s", path.c_str(), field.c_str(), what.c_str()));
}

} // namespace

TrainResult run_train_weights(const std::string& manifest_path, const RunConfig& cfg,
                              const std::string& cache_dir, const std::string& out_dir) {
  Json root;
  try {
    root = Json::parse(read_file(manifest_path));
  } catch (const Json::exception& e) {
    throw InputError(strf("%s: %s", manifest_path.c_str(), e.what()));
  }
  if (!root.is_object()) throw InputError(manifest_path + ": manifest root must be an object");
  for (const auto& [key, value] : root.items()) {
    (void)value;
    if (key != "mode" && key != "d_out" && key != "pairs")
      manifest_error(manifest_path, key, "unknown key");
  }
  if (!root.contains("mode") || !root["mode"].is_string())
    manifest_error(manifest_path, "mode", "required string (\"full\" or \"partial\")");
  std::string pair_mode = root["mode"].get<std::string>();
  if (pair_mode != "full" && pair_mode != "partial")
    manifest_error(manifest_path, "mode", "must be \"full\" or \"partial\"");
  if (!root.contains("d_out") || !root["d_out"].is_number_integer())
    manifest_error(manifest_path, "d_out", "required integer");
  int d_out = root["d_out"].get<int>();
  if (d_out < 1) manifest_error(manifest_path, "d_out", "must be >= 1");
  if (!root.contains("pairs") || !root["pairs"].is_array() || root["pairs"].empty())
    manifest_error(manifest_path, "pairs", "required non-empty array");

  std::vector<std::pair<std::string, std::string>> pair_paths;
  for (std::size_t i = 0; i < root["pairs"].size(); ++i) {
    const Json& p = root["pairs"][i];
    std::string scope = strf("pairs[%zu]", i);
    if (!p.is_object()) manifest_error(manifest_path, scope, "must be an object");
    for (const char* field : {"first", "second"})
      if (!p.contains(field) || !p[field].is_string())
        manifest_error(manifest_path, scope + "." + field, "required string path");
    pair_paths.emplace_back(p["first"].get<std::string>(), p["second"].get<std::string>());
  }

  TrainHyper hyper = cfg.train_hyper();
  std::vector<std::pair<std::string, std::string>> input_hashes = {
      {manifest_path, input_hash_hex(manifest_path)}};
  TrainResult result;

  if (pair_mode == "full") {
    std::vector<TrainPair> pairs;
    for (const auto& [first, second] : pair_paths) {
      ShapeData a = load_shape(first, cfg, cache_dir);
      ShapeData b = load_shape(second, cfg, cache_dir);
      int k = std::min({cfg.k, a.basis.k, b.basis.k});
      TrainPair pair;
      pair.coeff1 = project(a.basis, a.descriptors).topRows(k);
      pair.coeff2 = project(b.basis, b.descriptors).topRows(k);
      pair.lambda1 = a.basis.lambda.head(k);
      pair.lambda2 = b.basis.lambda.head(k);
      pairs.push_back(std::move(pair));
      input_hashes.emplace_back(first, a.mesh_hash);
      input_hashes.emplace_back(second, b.mesh_hash);
    }
    result = train_weights(pairs, d_out, hyper);
  } else {
    PartialConfig pcfg = cfg.partial_config();
    std::vector<PartialTrainPair> pairs;
    for (const auto& [first, second] : pair_paths) {
      ShapeData full = load_shape(first, cfg, cache_dir);
      ShapeData part = load_shape(second, cfg, cache_dir);
      int k_f = std::min(cfg.k_partial, full.basis.k);
      int k_p = std::min(cfg.k_partial, part.basis.k);
      PartialTrainPair pair;
      pair.coeff_full = project(full.basis, full.descriptors).topRows(k_f);
      pair.coeff_partial = project(part.basis, part.descriptors).topRows(k_p);
      pair.lambda_partial = part.basis.lambda.head(k_p);
      pair.r = estimate_rank(part.basis.lambda.head(k_p), full.basis.lambda.head(k_f), pcfg);
      pairs.push_back(std::move(pair));
      input_hashes.emplace_back(first, full.mesh_hash);
      input_hashes.emplace_back(second, part.mesh_hash);
    }
    result = partial_train_weights(pairs, d_out, hyper);
  }

  std::filesystem::create_directories(out_dir);
  write_fmmat(out_dir + "/weights.fmmat", result.weights.matrix);
  std::string trace = "step,loss\n";
  for (std::size_t i = 0; i < result.loss_trace.size(); ++i)
    trace += strf("%zu,", i) + fmt_double(result.loss_trace[i]) + "\n";
  atomic_write_file(out_dir + "/trace.csv", trace);
  Json summary;
  summary["mode"] = pair_mode;
  summary["pairs"] = pair_paths.size();
  summary["d_out"] = d_out;
  summary["initial_loss"] = result.initial_loss;
  summary["final_loss"] = result.final_loss;
  atomic_write_file(out_dir + "/summary.json", summary.dump(2) + "\n");
  write_manifest(out_dir, "train-weights", cfg, input_hashes,
                 {"weights.fmmat", "trace.csv", "summary.json"});
  return result;
}

ErrorSummary run_eval(const std::string& predicted_path, const std::string& truth_path,
                      const std::string& mesh_path, const RunConfig& cfg,
                      const std::string& out_dir) {
  PointMap predicted = load_point_map(predicted_path);
  PointMap truth = load_point_map(truth_path);
  if (predicted.source_id != truth.source_id || predicted.target_id != truth.target_id)
    warn(strf("evaluating %s:%s against ground truth %s:%s", predicted.source_id.c_str(),
              predicted.target_id.c_str(), truth.source_id.c_str(), truth.target_id.c_str()));
  TriMesh mesh = load_mesh(mesh_path);

  ErrorSummary summary = evaluate_map(predicted, truth, mesh, cfg.jobs);
  std::filesystem::create_directories(out_dir);
  write_report({{predicted.source_id + ":" + predicted.target_id, summary}}, out_dir);
  write_manifest(out_dir, "eval", cfg,
                 {{predicted_path, input_hash_hex(predicted_path)},
                  {truth_path, input_hash_hex(truth_path)},
                  {mesh_path, input_hash_hex(mesh_path)}},
                 {"means.csv", "pck.csv", "pck.svg"});
  return summary;
}

} // namespace fmatch
