#include "fmatch/config.hpp"

#include "fmatch/errors.hpp"
#include "fmatch/util.hpp"

#include <json.hpp>

#include <set>

namespace fmatch {

using Json = nlohmann::ordered_json;

FmapSolveOptions RunConfig::solve_options() const {
  FmapSolveOptions opts;
  if (mode == "plain_lsq") {
    opts.mode = FmapSolveOptions::Mode::PlainLsq;
  } else if (mode == "commutativity_weighted") {
    opts.mode = FmapSolveOptions::Mode::CommutativityWeighted;
  } else {
    throw InputError(strf("config: unknown solve mode \"%s\"", mode.c_str()));
  }
  opts.alpha = alpha;
  return opts;
}

TrainHyper RunConfig::train_hyper() const {
  TrainHyper hyper;
  hyper.learning_rate = training.learning_rate;
  hyper.steps = training.steps;
  hyper.batch_size = training.batch_size;
  hyper.seed = training.seed;
  if (training.init == "identity") {
    hyper.init = TrainHyper::Init::Identity;
  } else if (training.init == "random") {
    hyper.init = TrainHyper::Init::Random;
  } else {
    throw InputError(strf("config: unknown training init \"%s\"", training.init.c_str()));
  }
  hyper.loss_weights = loss_weights;
  return hyper;
}

PartialConfig RunConfig::partial_config() const {
  PartialConfig cfg;
  cfg.k_partial = k_partial;
  cfg.k_full = k_partial;
  cfg.rank_cap = rank_cap;
  return cfg;
}

namespace {

[[noreturn]] void field_error(const std::string& origin, const std::string& field,
                              const std::string& what) {
  throw InputError(strf("%s: field \"%s\": %s", origin.c_str(), field.c_str(), what.c_str()));
}

void check_keys(const Json& obj, const std::string& origin, const std::string& scope,
                const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!allowed.count(key))
      field_error(origin, scope.empty() ? key : scope + "." + key, "unknown key");
  }
}

template <typename T>
void get_field(const Json& obj, const std::string& origin, const std::string& scope,
               const char* key, T& out) {
  if (!obj.contains(key)) return;
  std::string full = scope.empty() ? key : scope + "." + key;
  try {
    out = obj.at(key).get<T>();
  } catch (const Json::exception& e) {
    field_error(origin, full, e.what());
  }
}

} // namespace

RunConfig parse_config(const std::string& json_text, const std::string& origin) {
  Json root;
  try {
    root = Json::parse(json_text);
  } catch (const Json::exception& e) {
    throw InputError(strf("%s: %s", origin.c_str(), e.what()));
  }
  if (!root.is_object()) throw InputError(origin + ": config root must be a JSON object");

  RunConfig cfg;
  check_keys(root, origin, "",
             {"k", "k_partial", "rank_cap", "zoomout", "loss_weights", "alpha", "mode",
              "training", "up_axis", "forward_axis", "descriptors", "jobs"});
  get_field(root, origin, "", "k", cfg.k);
  get_field(root, origin, "", "k_partial", cfg.k_partial);
  get_field(root, origin, "", "rank_cap", cfg.rank_cap);
  get_field(root, origin, "", "alpha", cfg.alpha);
  get_field(root, origin, "", "mode", cfg.mode);
  get_field(root, origin, "", "up_axis", cfg.up_axis);
  get_field(root, origin, "", "forward_axis", cfg.forward_axis);
  get_field(root, origin, "", "descriptors", cfg.descriptors);
  get_field(root, origin, "", "jobs", cfg.jobs);

  if (root.contains("zoomout")) {
    const Json& z = root.at("zoomout");
    if (!z.is_object()) field_error(origin, "zoomout", "must be an object");
    check_keys(z, origin, "zoomout", {"k_final", "step"});
    get_field(z, origin, "zoomout", "k_final", cfg.zoomout.k_final);
    get_field(z, origin, "zoomout", "step", cfg.zoomout.step);
  }
  if (root.contains("loss_weights")) {
    const Json& w = root.at("loss_weights");
    if (!w.is_object()) field_error(origin, "loss_weights", "must be an object");
    check_keys(w, origin, "loss_weights", {"bijectivity", "orthogonality", "commutativity"});
    get_field(w, origin, "loss_weights", "bijectivity", cfg.loss_weights.w1);
    get_field(w, origin, "loss_weights", "orthogonality", cfg.loss_weights.w2);
    get_field(w, origin, "loss_weights", "commutativity", cfg.loss_weights.w3);
  }
  if (root.contains("training")) {
    const Json& t = root.at("training");
    if (!t.is_object()) field_error(origin, "training", "must be an object");
    check_keys(t, origin, "training", {"learning_rate", "steps", "batch_size", "seed", "init"});
    get_field(t, origin, "training", "learning_rate", cfg.training.learning_rate);
    get_field(t, origin, "training", "steps", cfg.training.steps);
    get_field(t, origin, "training", "batch_size", cfg.training.batch_size);
    get_field(t, origin, "training", "seed", cfg.training.seed);
    get_field(t, origin, "training", "init", cfg.training.init);
  }

  validate_config(cfg);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  return parse_config(read_file(path), path);
}

void validate_config(const RunConfig& cfg) {
  auto positive = [](int v, const char* name) {
    if (v < 1) throw InputError(strf("config: %s must be >= 1 (got %d)", name, v));
  };
  positive(cfg.k, "k");
  positive(cfg.k_partial, "k_partial");
  positive(cfg.rank_cap, "rank_cap");
  positive(cfg.zoomout.k_final, "zoomout.k_final");
  positive(cfg.zoomout.step, "zoomout.step");
  positive(cfg.training.steps, "training.steps");
  positive(cfg.training.batch_size, "training.batch_size");
  if (cfg.loss_weights.w1 < 0 || cfg.loss_weights.w2 < 0 || cfg.loss_weights.w3 < 0)
    throw InputError("config: loss weights must be >= 0");
  if (cfg.alpha < 0) throw InputError("config: alpha must be >= 0");
  if (cfg.training.learning_rate <= 0) throw InputError("config: learning rate must be > 0");
  cfg.solve_options();                 // validates mode
  cfg.train_hyper();                   // validates init
  axis_from_string(cfg.up_axis);       // validates axis names
  axis_from_string(cfg.forward_axis);
}

std::string config_to_json(const RunConfig& cfg) {
  Json root;
  root["k"] = cfg.k;
  root["k_partial"] = cfg.k_partial;
  root["rank_cap"] = cfg.rank_cap;
  root["zoomout"] = Json{{"k_final", cfg.zoomout.k_final}, {"step", cfg.zoomout.step}};
  root["loss_weights"] = Json{{"bijectivity", cfg.loss_weights.w1},
                              {"orthogonality", cfg.loss_weights.w2},
                              {"commutativity", cfg.loss_weights.w3}};
  root["alpha"] = cfg.alpha;
  root["mode"] = cfg.mode;
  root["training"] = Json{{"learning_rate", cfg.training.learning_rate},
                          {"steps", cfg.training.steps},
                          {"batch_size", cfg.training.batch_size},
                          {"seed", cfg.training.seed},
                          {"init", cfg.training.init}};
  root["up_axis"] = cfg.up_axis;
  root["forward_axis"] = cfg.forward_axis;
  root["descriptors"] = cfg.descriptors;
  root["jobs"] = cfg.jobs;
  return root.dump(2) + "\n";
}

std::string config_hash(const RunConfig& cfg) {
  std::string text = config_to_json(cfg);
  return hash_hex(fnv1a(text.data(), text.size()));
}

} // namespace fmatch
