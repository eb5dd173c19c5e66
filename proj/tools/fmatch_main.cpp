#include "fmatch/config.hpp"
#include "fmatch/errors.hpp"
#include "fmatch/pipeline.hpp"
#include "fmatch/util.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace fmatch;

struct CommonArgs {
  std::string config_path;
  std::string cache_dir;
  std::string out_dir = "out";
  std::optional<int> k, k_final, step, seed, jobs;
  std::optional<double> alpha;
  std::optional<std::string> mode, up, forward, desc;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON configuration file");
  cmd->add_option("--cache-dir", args.cache_dir,
                  "basis/descriptor cache directory (default $FMATCH_CACHE_DIR or ./cache)");
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_option("--k", args.k, "spectral basis size for matching");
  cmd->add_option("--k-final", args.k_final, "zoomout target basis size");
  cmd->add_option("--step", args.step, "zoomout step");
  cmd->add_option("--alpha", args.alpha, "commutativity ridge weight");
  cmd->add_option("--mode", args.mode, "solve mode: plain_lsq or commutativity_weighted");
  cmd->add_option("--seed", args.seed, "training seed");
  cmd->add_option("--jobs", args.jobs, "worker threads");
  cmd->add_option("--up", args.up, "up axis, e.g. +y");
  cmd->add_option("--forward", args.forward, "forward axis, e.g. +z");
  cmd->add_option("--desc", args.desc, "descriptors, e.g. hks+wks or hks+wks+xyz");
}

RunConfig resolve_config(const CommonArgs& args) {
  RunConfig cfg;
  if (!args.config_path.empty()) cfg = load_config(args.config_path);
  if (args.k) cfg.k = *args.k;
  if (args.k_final) cfg.zoomout.k_final = *args.k_final;
  if (args.step) cfg.zoomout.step = *args.step;
  if (args.alpha) cfg.alpha = *args.alpha;
  if (args.mode) cfg.mode = *args.mode;
  if (args.seed) cfg.training.seed = static_cast<std::uint64_t>(*args.seed);
  if (args.jobs) cfg.jobs = static_cast<unsigned>(*args.jobs);
  if (args.up) cfg.up_axis = *args.up;
  if (args.forward) cfg.forward_axis = *args.forward;
  if (args.desc) cfg.descriptors = *args.desc;
  validate_config(cfg);
  return cfg;
}

std::string resolve_cache_dir(const CommonArgs& args) {
  if (!args.cache_dir.empty()) return args.cache_dir;
  if (const char* env = std::getenv("FMATCH_CACHE_DIR"); env && *env) return env;
  return "cache";
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"functional-map shape correspondence"};
  app.require_subcommand(1);

  CommonArgs args;
  std::vector<std::string> meshes;
  std::string source, target, manifest, weights, predicted, truth, mesh_path;
  bool refine = false;

  CLI::App* precompute = app.add_subcommand("precompute", "build basis/descriptor caches");
  precompute->add_option("meshes", meshes, "mesh files")->required()->expected(-1);
  add_common(precompute, args);

  CLI::App* match = app.add_subcommand("match", "estimate a map between two shapes");
  match->add_option("source", source, "source mesh")->required();
  match->add_option("target", target, "target mesh")->required();
  match->add_flag("--refine", refine, "apply zoomout refinement");
  match->add_option("--weights", weights, "descriptor combination weights (FMMAT1)");
  add_common(match, args);

  CLI::App* partial = app.add_subcommand("partial-match", "align a partial shape to a full one");
  partial->add_option("full", source, "full mesh")->required();
  partial->add_option("partial", target, "partial mesh")->required();
  partial->add_flag("--refine", refine, "experimental zoomout from the alignment rank");
  partial->add_option("--weights", weights, "descriptor combination weights (FMMAT1)");
  add_common(partial, args);

  CLI::App* train = app.add_subcommand("train-weights", "optimize descriptor weights on pairs");
  train->add_option("--manifest", manifest, "JSON pair manifest")->required();
  add_common(train, args);

  CLI::App* eval_cmd = app.add_subcommand("eval", "score a map against ground truth");
  eval_cmd->add_option("predicted", predicted, "predicted .p2p file")->required();
  eval_cmd->add_option("truth", truth, "ground-truth .p2p file")->required();
  eval_cmd->add_option("mesh", mesh_path, "source mesh (geodesic substrate)")->required();
  add_common(eval_cmd, args);

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig cfg = resolve_config(args);
    std::string cache_dir = resolve_cache_dir(args);
    std::optional<std::string> weights_opt;
    if (!weights.empty()) weights_opt = weights;

    if (precompute->parsed()) {
      for (const std::string& path : meshes) {
        ShapeData shape = load_shape(path, cfg, cache_dir);
        if (!shape.cache_hit)
          std::cerr << "fmatch: precomputed " << path << " -> " << shape.basis_path << "\n";
      }
    } else if (match->parsed()) {
      MatchOutput out = run_match(source, target, cfg, cache_dir, args.out_dir, refine,
                                  weights_opt);
      std::cout << "total_loss " << fmt_double(out.loss.total) << "\n";
    } else if (partial->parsed()) {
      PartialMatchOutput out = run_partial_match(source, target, cfg, cache_dir, args.out_dir,
                                                 refine, weights_opt);
      std::cout << "r " << out.alignment.r << " offdiag " << fmt_double(out.offdiag) << "\n";
    } else if (train->parsed()) {
      TrainResult result = run_train_weights(manifest, cfg, cache_dir, args.out_dir);
      std::cout << "initial_loss " << fmt_double(result.initial_loss) << " final_loss "
                << fmt_double(result.final_loss) << "\n";
    } else if (eval_cmd->parsed()) {
      ErrorSummary summary = run_eval(predicted, truth, mesh_path, cfg, args.out_dir);
      std::cout << "mean_x100 " << fmt_double(summary.mean_x100) << "\n";
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
