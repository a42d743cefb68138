#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

#include "revel/blackbox.hpp"
#include "revel/explain.hpp"
#include "revel/featurize.hpp"
#include "revel/probability.hpp"

namespace revel {

/// 1 - |f(x) - g(x)| / C, where C = norm_constant(n).
double local_concordance(const ProbabilityVector& f_at_x, const ProbabilityVector& g_at_x,
                         NormKind norm);

/// Mean concordance over a neighbourhood.
double local_fidelity(std::span<const ProbabilityVector> f_outputs,
                      std::span<const ProbabilityVector> g_outputs, NormKind norm);

/// Fidelity of g against the black-box outputs already stored in a
/// neighbourhood.
double local_fidelity(const Explanation& g, const Neighborhood& evaluation, NormKind norm);

struct FlipResult {
  FeatureMask removed;         // bit 1 = feature removed (h)
  FeatureMask counterfactual;  // x minus h
  std::size_t steps = 0;
  bool flipped = false;
};

/// Greedy class-flip search: repeatedly drops the present feature with the
/// largest positive combined importance for the class predicted at x
/// (lowest index on ties) until g predicts another class or no positive
/// feature is left.
FlipResult find_class_flip(const Explanation& g, const FeatureMask& x_mask);

struct PrescriptivityResult {
  std::optional<double> value;  // empty: no flip found
  FlipResult flip;
};

/// 1 - |f(x+h) - g(x+h)| / C at the flip point; no value when g never
/// changes class.
PrescriptivityResult prescriptivity(BlackBoxHandle& blackbox, const MaskedInstance& source,
                                    const Explanation& g, NormKind norm,
                                    EvalBudget* budget = nullptr);

/// (1/(F-1)) sum_i (1 - |v_i|_1) over rows of the absolute importance
/// matrix, with row norms clipped to 1.
double conciseness(const ImportanceMatrices& m, std::size_t features);
double conciseness(const Matrix& absolute_importance);

struct Similarity {
  double value = 0.0;
  bool degenerate = false;  // one of the matrices was all zero
};

Similarity cosine_similarity(const Matrix& a, const Matrix& b);
Similarity magnitude_similarity(const Matrix& a, const Matrix& b);
/// Both compare the relative importance matrices.
Similarity cosine_similarity(const ImportanceMatrices& a, const ImportanceMatrices& b);
Similarity magnitude_similarity(const ImportanceMatrices& a, const ImportanceMatrices& b);

enum class SimilarityKind { cosine, magnitude };

SimilarityKind parse_similarity_kind(std::string_view name);

/// Mean similarity over all unordered pairs of explanations.
double robustness(std::span<const Explanation> explanations, SimilarityKind kind);
double robustness(std::span<const ImportanceMatrices> matrices, SimilarityKind kind);

/// The five scores of one explanation. Robustness belongs to a set of
/// explanations and is filled in by the caller.
struct MetricReport {
  double local_concordance = 0.0;
  double local_fidelity = 0.0;
  std::optional<double> prescriptivity;
  double conciseness = 0.0;
  std::optional<double> robustness_cosine;
  std::optional<double> robustness_magnitude;
  NormKind norm = NormKind::two;
  std::size_t fidelity_neighbors = 0;
  std::size_t flip_steps = 0;
};

}  // namespace revel
