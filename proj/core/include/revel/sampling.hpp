#pragma once

#include <cstddef>
#include <vector>

#include "revel/blackbox.hpp"
#include "revel/featurize.hpp"
#include "revel/kernels.hpp"
#include "revel/probability.hpp"
#include "revel/rng.hpp"

namespace revel {

/// Largest F accepted by enumerate_masks.
inline constexpr std::size_t kMaxEnumerationFeatures = 20;

/// Exclusion count from a raw exponential draw: floor(draw), at most F.
std::size_t lime_count_from_draw(double draw, std::size_t features);

/// floor(Exp(rate 1/sigma)) clamped to F.
std::size_t lime_exclusion_count(double sigma, std::size_t features, RngStream& rng);

/// P[v = i] proportional to 1 / ((i+1)(F-i+1)) for i in [0, max_excluded],
/// normalized. max_excluded defaults to F (the full table).
std::vector<double> shap_exclusion_distribution(std::size_t features);
std::vector<double> shap_exclusion_distribution(std::size_t features, std::size_t max_excluded);

/// Exclusion cap used by the local SHAP sampler: ceil(F / 2).
std::size_t shap_local_max_excluded(std::size_t features);

/// Inverse-CDF draw from a normalized table.
std::size_t sample_discrete(const std::vector<double>& table, RngStream& rng);

/// Mask with exactly F - v ones; the excluded indices are uniform without
/// replacement.
FeatureMask sample_mask(std::size_t excluded, std::size_t features, RngStream& rng);

/// All 2^F masks in increasing code order, bit 0 least significant.
std::vector<FeatureMask> enumerate_masks(std::size_t features);

/// Kernel weight of one neighbour, measured from the all-ones mask.
double kernel_weight(const KernelSpec& kernel, const FeatureMask& mask);

struct Neighborhood {
  std::vector<FeatureMask> masks;
  std::vector<ProbabilityVector> outputs;
  std::vector<double> weights;
  bool origin_included = false;

  std::size_t size() const { return masks.size(); }
};

/// Draws the masks of a neighbourhood without evaluating them. Sampled
/// methods put the all-ones mask first followed by `samples` draws (with
/// replacement); the exhaustive sampler returns every mask.
std::vector<FeatureMask> draw_masks(SamplerKind sampler, double sigma, std::size_t samples,
                                    std::size_t features, RngStream& rng);

/// Draws, evaluates and weights a neighbourhood around the instance.
Neighborhood build_neighborhood(const MethodSpec& method, std::size_t samples,
                                BlackBoxHandle& blackbox, const MaskedInstance& source,
                                RngStream& rng, EvalBudget* budget = nullptr);

}  // namespace revel
