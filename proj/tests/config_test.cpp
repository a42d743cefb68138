#include "revel/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "revel/errors.hpp"

namespace revel {
namespace {

TEST(Config, Defaults) {
  const RunConfig cfg = parse_config("{}");
  EXPECT_EQ(cfg.blackbox.kind, BlackBoxConfig::Kind::synthetic);
  EXPECT_EQ(cfg.instances.count, 50u);
  EXPECT_EQ(cfg.explanations, 5u);
  EXPECT_EQ(cfg.norm, NormKind::two);
  EXPECT_EQ(cfg.fidelity, FidelityMode::held_out);
  ASSERT_EQ(cfg.methods.size(), 1u);
  EXPECT_EQ(cfg.methods[0].name(), "lime:4");
}

TEST(Config, FullDocument) {
  const RunConfig cfg = parse_config(R"({
    "scenario": "budget",
    "seed": 9,
    "blackbox": {"kind": "synthetic", "member": "linear", "seed": 4, "classes": 5, "gamma": 0.5, "pairs": 2},
    "featurizer": {"kind": "grid", "patches_per_side": [2, 4], "height": 16, "width": 16, "channels": 1},
    "instances": {"count": 7},
    "methods": ["lime:2", "shap-exact", "shap-local"],
    "budgets": [50, 100],
    "explanations": 3,
    "norm": "one",
    "alpha": 0.5,
    "exact_alpha": 1e-4,
    "fidelity": "reuse",
    "workers": 2
  })");
  EXPECT_EQ(cfg.scenario, "budget");
  EXPECT_EQ(cfg.seed, 9u);
  EXPECT_EQ(cfg.blackbox.member, "linear");
  EXPECT_EQ(cfg.blackbox.classes, 5u);
  EXPECT_EQ(cfg.blackbox.suite.gamma, 0.5);
  EXPECT_EQ(cfg.blackbox.suite.pair_count, 2u);
  EXPECT_EQ(cfg.featurizer.kind, FeaturizerConfig::Kind::grid);
  EXPECT_EQ(cfg.featurizer.sizes, (std::vector<std::size_t>{2, 4}));
  EXPECT_EQ(cfg.featurizer.feature_count(4), 16u);
  EXPECT_EQ(cfg.methods[0].kernel.alpha, 0.5);
  EXPECT_EQ(cfg.methods[1].kernel.alpha, 1e-4);
  EXPECT_EQ(cfg.norm, NormKind::one);
  EXPECT_EQ(cfg.fidelity, FidelityMode::reuse);
  EXPECT_EQ(cfg.workers, 2u);

  const RunConfig again = parse_config(config_to_json(cfg));
  EXPECT_EQ(config_to_json(again), config_to_json(cfg));
}

TEST(Config, Rejections) {
  const char* bad[] = {
      "not json",
      "[]",
      R"({"sede": 1})",
      R"({"blackbox": {"kind": "magic"}})",
      R"({"blackbox": {"kind": "external"}})",
      R"({"blackbox": {"member": "quadratic"}})",
      R"({"blackbox": {"classes": 1}})",
      R"({"featurizer": {"kind": "grid", "patches_per_side": [5], "height": 32, "width": 32}})",
      R"({"featurizer": {"features": [16]}, "budgets": [10]})",
      R"({"featurizer": {"features": [24]}, "methods": ["shap-exact"]})",
      R"({"featurizer": {"features": [4, 4]}})",
      R"({"methods": ["lime"]})",
      R"({"methods": []})",
      R"({"explanations": 1})",
      R"({"norm": "two-and-a-half"})",
      R"({"fidelity": "sometimes"})",
      R"({"workers": 0})",
      R"({"budgets": [-5]})",
      R"({"alpha": -1})",
      R"({"instances": {"kind": "files", "files": []}})",
  };
  for (const char* text : bad) EXPECT_THROW(parse_config(text), ConfigError) << text;
  EXPECT_NO_THROW(parse_config(R"({"explanations": 1, "robustness": false})"));
  EXPECT_NO_THROW(parse_config(R"({"featurizer": {"features": [16]}, "budgets": [17]})"));
}

TEST(Config, FilePathsResolveAgainstConfigDirectory) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "revel_config_test";
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "run.json");
    out << R"({"instances": {"kind": "files", "files": ["a.rt", "/abs/b.rt"]}})";
  }
  const RunConfig cfg = load_config(dir / "run.json");
  ASSERT_EQ(cfg.instances.files.size(), 2u);
  EXPECT_EQ(cfg.instances.files[0], dir / "a.rt");
  EXPECT_EQ(cfg.instances.files[1], fs::path("/abs/b.rt"));
  fs::remove_all(dir);
  EXPECT_THROW(load_config(dir / "missing.json"), ConfigError);
}

TEST(Config, EnvironmentOverrides) {
  RunConfig cfg = parse_config(R"({"seed": 3})");
  ::setenv("REVEL_SEED", "77", 1);
  ::setenv("REVEL_WORKERS", "4", 1);
  apply_environment(cfg);
  EXPECT_EQ(cfg.seed, 77u);
  EXPECT_EQ(cfg.workers, 4u);
  ::setenv("REVEL_WORKERS", "many", 1);
  EXPECT_THROW(apply_environment(cfg), ConfigError);
  ::setenv("REVEL_WORKERS", "0", 1);
  EXPECT_THROW(apply_environment(cfg), ConfigError);
  ::unsetenv("REVEL_SEED");
  ::unsetenv("REVEL_WORKERS");
}

TEST(Config, ShippedConfigsAreValid) {
  std::size_t seen = 0;
  for (const auto& entry : std::filesystem::directory_iterator(REVEL_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    EXPECT_NO_THROW(load_config(entry.path())) << entry.path();
    ++seen;
  }
  EXPECT_GE(seen, 3u);
}

}  // namespace
}  // namespace revel
