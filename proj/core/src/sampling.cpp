#include "revel/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "revel/errors.hpp"

namespace revel {

std::size_t lime_count_from_draw(double draw, std::size_t features) {
  if (!(draw >= 0.0)) throw InvalidArgument("exponential draw must be non-negative");
  const double v = std::floor(draw);
  if (v >= static_cast<double>(features)) return features;
  return static_cast<std::size_t>(v);
}

std::size_t lime_exclusion_count(double sigma, std::size_t features, RngStream& rng) {
  if (!(sigma > 0.0)) throw InvalidArgument("lime sigma must be positive");
  if (features < 2) throw InvalidArgument("need at least two features");
  return lime_count_from_draw(rng.exponential(1.0 / sigma), features);
}

std::vector<double> shap_exclusion_distribution(std::size_t features) {
  return shap_exclusion_distribution(features, features);
}

std::vector<double> shap_exclusion_distribution(std::size_t features, std::size_t max_excluded) {
  if (features < 2) throw InvalidArgument("need at least two features");
  max_excluded = std::min(max_excluded, features);
  const double f = static_cast<double>(features);
  std::vector<double> table(max_excluded + 1);
  for (std::size_t i = 0; i <= max_excluded; ++i) {
    const double x = static_cast<double>(i);
    table[i] = 1.0 / ((x + 1.0) * (f - x + 1.0));
  }
  const double total = std::accumulate(table.begin(), table.end(), 0.0);
  for (double& p : table) p /= total;
  return table;
}

std::size_t shap_local_max_excluded(std::size_t features) { return (features + 1) / 2; }

std::size_t sample_discrete(const std::vector<double>& table, RngStream& rng) {
  if (table.empty()) throw InvalidArgument("empty probability table");
  const double u = rng.uniform01();
  double acc = 0.0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    acc += table[i];
    if (u < acc) return i;
  }
  // Rounding left a sliver above the last cumulative value.
  for (std::size_t i = table.size(); i-- > 0;) {
    if (table[i] > 0.0) return i;
  }
  return table.size() - 1;
}

FeatureMask sample_mask(std::size_t excluded, std::size_t features, RngStream& rng) {
  if (excluded > features) {
    throw InvalidArgument("cannot exclude " + std::to_string(excluded) + " of " +
                          std::to_string(features) + " features");
  }
  std::vector<std::size_t> order(features);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<std::uint8_t> bits(features, 1);
  // Partial Fisher-Yates: the first `excluded` slots are the removed set.
  for (std::size_t i = 0; i < excluded; ++i) {
    const std::size_t j = i + rng.uniform_index(features - i);
    std::swap(order[i], order[j]);
    bits[order[i]] = 0;
  }
  return FeatureMask(std::move(bits));
}

std::vector<FeatureMask> enumerate_masks(std::size_t features) {
  if (features < 2) throw InvalidArgument("need at least two features");
  if (features > kMaxEnumerationFeatures) {
    throw InvalidArgument("refusing to enumerate 2^" + std::to_string(features) + " masks");
  }
  const std::uint64_t total = std::uint64_t{1} << features;
  std::vector<FeatureMask> out;
  out.reserve(total);
  for (std::uint64_t code = 0; code < total; ++code) out.push_back(FeatureMask::from_code(code, features));
  return out;
}

double kernel_weight(const KernelSpec& kernel, const FeatureMask& mask) {
  switch (kernel.kind) {
    case KernelSpec::Kind::lime:
      return lime_kernel(std::sqrt(static_cast<double>(mask.excluded())), kernel.sigma);
    case KernelSpec::Kind::shap:
      return shap_kernel(mask.size(), mask.count());
  }
  return 0.0;
}

std::vector<FeatureMask> draw_masks(SamplerKind sampler, double sigma, std::size_t samples,
                                    std::size_t features, RngStream& rng) {
  if (sampler == SamplerKind::exhaustive) return enumerate_masks(features);
  if (features < 2) throw InvalidArgument("need at least two features");

  std::vector<FeatureMask> masks;
  masks.reserve(samples + 1);
  masks.push_back(FeatureMask::all_ones(features));
  std::vector<double> table;
  if (sampler == SamplerKind::shap_global) table = shap_exclusion_distribution(features);
  if (sampler == SamplerKind::shap_local) {
    table = shap_exclusion_distribution(features, shap_local_max_excluded(features));
  }
  for (std::size_t s = 0; s < samples; ++s) {
    const std::size_t v = sampler == SamplerKind::lime ? lime_exclusion_count(sigma, features, rng)
                                                       : sample_discrete(table, rng);
    masks.push_back(sample_mask(v, features, rng));
  }
  return masks;
}

Neighborhood build_neighborhood(const MethodSpec& method, std::size_t samples,
                                BlackBoxHandle& blackbox, const MaskedInstance& source,
                                RngStream& rng, EvalBudget* budget) {
  const std::size_t features = source.featurizer.feature_count();
  Neighborhood n;
  n.masks = draw_masks(method.sampler, method.kernel.sigma, samples, features, rng);
  n.origin_included = method.sampler != SamplerKind::exhaustive;
  n.outputs = blackbox.evaluate_masks(source, n.masks, budget);
  n.weights.reserve(n.masks.size());
  for (const FeatureMask& m : n.masks) n.weights.push_back(kernel_weight(method.kernel, m));
  return n;
}

}  // namespace revel
