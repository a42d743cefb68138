#include <benchmark/benchmark.h>

#include "revel/explain.hpp"

namespace {

using namespace revel;

void BM_WeightedRidgeFit(benchmark::State& state) {
  const auto features = static_cast<std::size_t>(state.range(0));
  const auto samples = static_cast<std::size_t>(state.range(1));
  RngStream rng(1, 1);
  std::vector<FeatureMask> masks;
  std::vector<LogitVector> targets;
  std::vector<double> weights;
  for (std::size_t k = 0; k < samples; ++k) {
    masks.push_back(sample_mask(lime_exclusion_count(4.0, features, rng), features, rng));
    Vector t(10);
    for (Eigen::Index j = 0; j < 10; ++j) t(j) = rng.normal();
    targets.emplace_back(t);
    weights.push_back(kernel_weight({KernelSpec::Kind::lime, 4.0, 1.0}, masks.back()));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(weighted_ridge_fit(masks, targets, weights, 1.0));
  }
}
BENCHMARK(BM_WeightedRidgeFit)->Args({16, 100})->Args({16, 800})->Args({64, 800})->Args({64, 3200});

void BM_DeriveImportance(benchmark::State& state) {
  const auto features = state.range(0);
  const Matrix a = Matrix::Random(features, 10);
  const Vector b = Vector::Random(10);
  const FeatureMask x = FeatureMask::all_ones(static_cast<std::size_t>(features));
  for (auto _ : state) benchmark::DoNotOptimize(derive_importance(a, b, x));
}
BENCHMARK(BM_DeriveImportance)->Arg(16)->Arg(64);

}  // namespace
