#include "revel/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "revel/errors.hpp"
#include "revel/sampling.hpp"

namespace revel {

using json = nlohmann::json;

namespace {

void reject_unknown(const json& obj, std::string_view where, std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (std::string_view a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError("unknown key '" + key + "' in " + std::string(where));
  }
}

template <typename T>
T get(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

std::size_t get_count(const json& obj, const char* key, std::size_t fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError(std::string("'") + key + "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

std::vector<std::size_t> get_counts(const json& obj, const char* key, std::vector<std::size_t> fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (v.is_number_integer()) return {get_count(obj, key, 0)};
  if (!v.is_array()) throw ConfigError(std::string("'") + key + "' must be an integer or a list");
  std::vector<std::size_t> out;
  for (const json& e : v) {
    if (!e.is_number_integer() || e.get<long long>() < 0) {
      throw ConfigError(std::string("'") + key + "' entries must be non-negative integers");
    }
    out.push_back(e.get<std::size_t>());
  }
  return out;
}

BlackBoxConfig parse_blackbox(const json& j) {
  if (!j.is_object()) throw ConfigError("'blackbox' must be an object");
  reject_unknown(j, "blackbox",
                 {"kind", "member", "seed", "classes", "gamma", "weight_scale", "bias_scale", "pairs",
                  "pooling_grid", "command", "timeout_s", "max_batch", "cache"});
  BlackBoxConfig b;
  const std::string kind = get<std::string>(j, "kind", "synthetic");
  if (kind == "synthetic") {
    b.kind = BlackBoxConfig::Kind::synthetic;
  } else if (kind == "external") {
    b.kind = BlackBoxConfig::Kind::external;
  } else {
    throw ConfigError("unknown blackbox kind '" + kind + "'");
  }
  b.member = get<std::string>(j, "member", b.member);
  b.seed = get<std::uint64_t>(j, "seed", b.seed);
  b.classes = get_count(j, "classes", b.classes);
  b.suite.gamma = get<double>(j, "gamma", b.suite.gamma);
  b.suite.weight_scale = get<double>(j, "weight_scale", b.suite.weight_scale);
  b.suite.bias_scale = get<double>(j, "bias_scale", b.suite.bias_scale);
  b.suite.pair_count = get_count(j, "pairs", b.suite.pair_count);
  b.suite.pooling_grid = get_count(j, "pooling_grid", b.suite.pooling_grid);
  b.command = get<std::string>(j, "command", b.command);
  const double timeout_s = get<double>(j, "timeout_s", 60.0);
  if (!(timeout_s > 0.0)) throw ConfigError("'timeout_s' must be positive");
  b.timeout = std::chrono::milliseconds(static_cast<long long>(timeout_s * 1000.0));
  b.max_batch = get_count(j, "max_batch", b.max_batch);
  b.cache = get<bool>(j, "cache", b.cache);
  return b;
}

FeaturizerConfig parse_featurizer(const json& j) {
  if (!j.is_object()) throw ConfigError("'featurizer' must be an object");
  reject_unknown(j, "featurizer", {"kind", "features", "patches_per_side", "height", "width", "channels", "baseline"});
  FeaturizerConfig f;
  const std::string kind = get<std::string>(j, "kind", "vector");
  if (kind == "vector") {
    f.kind = FeaturizerConfig::Kind::vector;
    f.sizes = get_counts(j, "features", f.sizes);
  } else if (kind == "grid") {
    f.kind = FeaturizerConfig::Kind::grid;
    f.sizes = get_counts(j, "patches_per_side", {4});
  } else {
    throw ConfigError("unknown featurizer kind '" + kind + "'");
  }
  f.height = get_count(j, "height", f.height);
  f.width = get_count(j, "width", f.width);
  f.channels = get_count(j, "channels", f.channels);
  f.baseline = get<double>(j, "baseline", f.baseline);
  return f;
}

InstanceConfig parse_instances(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ConfigError("'instances' must be an object");
  reject_unknown(j, "instances", {"kind", "count", "files"});
  InstanceConfig i;
  const std::string kind = get<std::string>(j, "kind", "synthetic");
  if (kind == "synthetic") {
    i.kind = InstanceConfig::Kind::synthetic;
    i.count = get_count(j, "count", i.count);
  } else if (kind == "files") {
    i.kind = InstanceConfig::Kind::files;
    for (const std::string& p : get<std::vector<std::string>>(j, "files", {})) {
      std::filesystem::path path(p);
      i.files.push_back(path.is_relative() && !base_dir.empty() ? base_dir / path : path);
    }
    i.count = i.files.size();
  } else {
    throw ConfigError("unknown instance kind '" + kind + "'");
  }
  return i;
}

}  // namespace

std::string_view to_string(FidelityMode mode) {
  return mode == FidelityMode::held_out ? "held-out" : "reuse";
}

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(j, "config",
                 {"scenario", "seed", "blackbox", "featurizer", "instances", "methods", "budgets",
                  "explanations", "robustness", "norm", "alpha", "exact_alpha", "fidelity", "workers"});
  RunConfig cfg;
  cfg.scenario = get<std::string>(j, "scenario", cfg.scenario);
  cfg.seed = get<std::uint64_t>(j, "seed", cfg.seed);
  if (j.contains("blackbox")) cfg.blackbox = parse_blackbox(j["blackbox"]);
  if (j.contains("featurizer")) cfg.featurizer = parse_featurizer(j["featurizer"]);
  if (j.contains("instances")) cfg.instances = parse_instances(j["instances"], base_dir);
  cfg.alpha = get<double>(j, "alpha", cfg.alpha);
  cfg.exact_alpha = get<double>(j, "exact_alpha", cfg.exact_alpha);
  if (j.contains("methods")) {
    cfg.methods.clear();
    for (const std::string& name : get<std::vector<std::string>>(j, "methods", {})) {
      cfg.methods.push_back(MethodSpec::parse(name, name == "shap-exact" ? cfg.exact_alpha : cfg.alpha));
    }
  } else {
    for (MethodSpec& m : cfg.methods) m.kernel.alpha = cfg.alpha;
  }
  cfg.budgets = get_counts(j, "budgets", cfg.budgets);
  cfg.explanations = get_count(j, "explanations", cfg.explanations);
  cfg.robustness = get<bool>(j, "robustness", cfg.robustness);
  try {
    cfg.norm = parse_norm_kind(get<std::string>(j, "norm", "two"));
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  const std::string fidelity = get<std::string>(j, "fidelity", "held-out");
  if (fidelity == "held-out") {
    cfg.fidelity = FidelityMode::held_out;
  } else if (fidelity == "reuse") {
    cfg.fidelity = FidelityMode::reuse;
  } else {
    throw ConfigError("fidelity must be 'held-out' or 'reuse'");
  }
  cfg.workers = get_count(j, "workers", cfg.workers);
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.parent_path());
}

void apply_environment(RunConfig& cfg) {
  auto parse_u64 = [](const char* name, const char* value) {
    std::uint64_t v = 0;
    const std::string_view s(value);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
      throw ConfigError(std::string(name) + " must be a non-negative integer");
    }
    return v;
  };
  if (const char* seed = std::getenv("REVEL_SEED"); seed && *seed) cfg.seed = parse_u64("REVEL_SEED", seed);
  if (const char* workers = std::getenv("REVEL_WORKERS"); workers && *workers) {
    cfg.workers = static_cast<std::size_t>(parse_u64("REVEL_WORKERS", workers));
  }
  cfg.validate();
}

void RunConfig::validate() const {
  if (methods.empty()) throw ConfigError("no methods configured");
  if (budgets.empty()) throw ConfigError("no budgets configured");
  if (featurizer.sizes.empty()) throw ConfigError("no feature sizes configured");
  if (workers == 0) throw ConfigError("workers must be at least 1");
  if (explanations == 0) throw ConfigError("explanations must be at least 1");
  if (robustness && explanations < 2) throw ConfigError("robustness needs at least 2 explanations per instance");
  if (!(alpha >= 0.0) || !(exact_alpha >= 0.0)) throw ConfigError("ridge alpha must be >= 0");
  if (instances.count == 0) throw ConfigError("no instances configured");
  if (blackbox.kind == BlackBoxConfig::Kind::synthetic) {
    if (blackbox.member != "linear" && blackbox.member != "nonlinear") {
      throw ConfigError("synthetic member must be 'linear' or 'nonlinear'");
    }
    if (blackbox.classes < 2) throw ConfigError("synthetic black box needs at least 2 classes");
  } else if (blackbox.command.empty()) {
    throw ConfigError("external black box needs a command");
  }
  if (blackbox.max_batch == 0) throw ConfigError("max_batch must be positive");

  const bool grid = featurizer.kind == FeaturizerConfig::Kind::grid;
  if (grid) {
    if (featurizer.height == 0 || featurizer.width == 0 || featurizer.channels == 0) {
      throw ConfigError("image dimensions must be positive");
    }
    if (!(featurizer.baseline >= 0.0 && featurizer.baseline <= 1.0)) {
      throw ConfigError("occlusion baseline must lie in [0,1]");
    }
    const std::size_t pool = blackbox.suite.pooling_grid;
    if (blackbox.kind == BlackBoxConfig::Kind::synthetic && pool != 0 &&
        (featurizer.height % pool != 0 || featurizer.width % pool != 0)) {
      throw ConfigError("pooling grid does not divide the image");
    }
  } else if (blackbox.kind == BlackBoxConfig::Kind::synthetic && blackbox.suite.pooling_grid != 0) {
    throw ConfigError("pooling_grid only applies to grid featurizers");
  }
  std::set<std::size_t> seen;
  for (std::size_t size : featurizer.sizes) {
    if (size < 2) throw ConfigError("feature sizes must be at least 2");
    if (!seen.insert(size).second) throw ConfigError("duplicate feature size " + std::to_string(size));
    if (grid && (featurizer.height % size != 0 || featurizer.width % size != 0)) {
      throw ConfigError("image of " + std::to_string(featurizer.height) + "x" + std::to_string(featurizer.width) +
                        " is not divisible into " + std::to_string(size) + " patches per side");
    }
    const std::size_t features = featurizer.feature_count(size);
    for (const MethodSpec& m : methods) {
      if (m.sampler == SamplerKind::exhaustive) {
        if (features > kMaxEnumerationFeatures) {
          throw ConfigError(m.name() + " cannot enumerate " + std::to_string(features) + " features");
        }
        continue;
      }
      for (std::size_t n : budgets) {
        if (n < features + 1) {
          throw ConfigError("budget " + std::to_string(n) + " is below F+1 = " + std::to_string(features + 1));
        }
      }
    }
  }
  if (instances.kind == InstanceConfig::Kind::files && instances.files.empty()) {
    throw ConfigError("instance file list is empty");
  }
}

std::string config_to_json(const RunConfig& cfg) {
  json j;
  j["scenario"] = cfg.scenario;
  j["seed"] = cfg.seed;
  json b;
  if (cfg.blackbox.kind == BlackBoxConfig::Kind::synthetic) {
    b = {{"kind", "synthetic"},
         {"member", cfg.blackbox.member},
         {"seed", cfg.blackbox.seed},
         {"classes", cfg.blackbox.classes},
         {"gamma", cfg.blackbox.suite.gamma},
         {"weight_scale", cfg.blackbox.suite.weight_scale},
         {"bias_scale", cfg.blackbox.suite.bias_scale},
         {"pairs", cfg.blackbox.suite.pair_count},
         {"pooling_grid", cfg.blackbox.suite.pooling_grid}};
  } else {
    b = {{"kind", "external"},
         {"command", cfg.blackbox.command},
         {"timeout_s", static_cast<double>(cfg.blackbox.timeout.count()) / 1000.0},
         {"max_batch", cfg.blackbox.max_batch}};
  }
  b["cache"] = cfg.blackbox.cache;
  j["blackbox"] = b;
  json f;
  if (cfg.featurizer.kind == FeaturizerConfig::Kind::vector) {
    f = {{"kind", "vector"}, {"features", cfg.featurizer.sizes}};
  } else {
    f = {{"kind", "grid"},
         {"patches_per_side", cfg.featurizer.sizes},
         {"height", cfg.featurizer.height},
         {"width", cfg.featurizer.width},
         {"channels", cfg.featurizer.channels},
         {"baseline", cfg.featurizer.baseline}};
  }
  j["featurizer"] = f;
  if (cfg.instances.kind == InstanceConfig::Kind::synthetic) {
    j["instances"] = {{"kind", "synthetic"}, {"count", cfg.instances.count}};
  } else {
    std::vector<std::string> files;
    for (const auto& p : cfg.instances.files) files.push_back(p.string());
    j["instances"] = {{"kind", "files"}, {"files", files}};
  }
  std::vector<std::string> methods;
  for (const MethodSpec& m : cfg.methods) methods.push_back(m.name());
  j["methods"] = methods;
  j["budgets"] = cfg.budgets;
  j["explanations"] = cfg.explanations;
  j["robustness"] = cfg.robustness;
  j["norm"] = std::string(to_string(cfg.norm));
  j["alpha"] = cfg.alpha;
  j["exact_alpha"] = cfg.exact_alpha;
  j["fidelity"] = std::string(to_string(cfg.fidelity));
  j["workers"] = cfg.workers;
  return j.dump(2);
}

}  // namespace revel
