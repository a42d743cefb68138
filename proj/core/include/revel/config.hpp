#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "revel/blackbox.hpp"
#include "revel/kernels.hpp"
#include "revel/probability.hpp"

namespace revel {

struct BlackBoxConfig {
  enum class Kind { synthetic, external };

  Kind kind = Kind::synthetic;
  // synthetic
  std::string member = "nonlinear";  // "linear" or "nonlinear"
  std::uint64_t seed = 1;
  std::size_t classes = 3;
  SyntheticSuiteOptions suite;
  // external
  std::string command;
  std::chrono::milliseconds timeout{60'000};
  std::size_t max_batch = 256;

  bool cache = true;
};

struct FeaturizerConfig {
  enum class Kind { vector, grid };

  Kind kind = Kind::vector;
  /// vector: feature counts; grid: patches per side (F*F features each).
  std::vector<std::size_t> sizes{8};
  std::size_t height = 32;
  std::size_t width = 32;
  std::size_t channels = 3;
  double baseline = 0.5;

  std::size_t feature_count(std::size_t size) const { return kind == Kind::grid ? size * size : size; }
};

struct InstanceConfig {
  enum class Kind { synthetic, files };

  Kind kind = Kind::synthetic;
  std::size_t count = 50;
  std::vector<std::filesystem::path> files;
};

enum class FidelityMode { held_out, reuse };

/// One experiment: every instance x method x budget x feature size.
struct RunConfig {
  std::string scenario = "custom";
  std::uint64_t seed = 0;
  BlackBoxConfig blackbox;
  FeaturizerConfig featurizer;
  InstanceConfig instances;
  std::vector<MethodSpec> methods{MethodSpec::lime(4.0)};
  std::vector<std::size_t> budgets{100};
  std::size_t explanations = 5;
  bool robustness = true;
  NormKind norm = NormKind::two;
  double alpha = MethodSpec::kDefaultAlpha;
  double exact_alpha = MethodSpec::kDefaultExactAlpha;
  FidelityMode fidelity = FidelityMode::held_out;
  std::size_t workers = 1;

  /// Throws ConfigError on any inconsistency.
  void validate() const;
};

/// Parses the JSON configuration text. Unknown keys are rejected. Throws
/// ConfigError.
RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

/// REVEL_SEED overrides the seed, REVEL_WORKERS the worker count.
void apply_environment(RunConfig& cfg);

/// Canonical JSON echo of the configuration (pretty-printed).
std::string config_to_json(const RunConfig& cfg);

std::string_view to_string(FidelityMode mode);

}  // namespace revel
