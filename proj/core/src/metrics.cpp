#include "revel/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "revel/errors.hpp"

namespace revel {

double local_concordance(const ProbabilityVector& f_at_x, const ProbabilityVector& g_at_x,
                         NormKind norm) {
  if (f_at_x.size() != g_at_x.size()) throw ShapeError("class counts differ");
  const double d = prob_distance(f_at_x, g_at_x, norm) / norm_constant(norm, f_at_x.size());
  return std::clamp(1.0 - d, 0.0, 1.0);
}

double local_fidelity(std::span<const ProbabilityVector> f_outputs,
                      std::span<const ProbabilityVector> g_outputs, NormKind norm) {
  if (f_outputs.size() != g_outputs.size()) throw ShapeError("neighbourhood lists differ in length");
  if (f_outputs.empty()) throw InvalidArgument("local fidelity needs a non-empty neighbourhood");
  double total = 0.0;
  for (std::size_t k = 0; k < f_outputs.size(); ++k) {
    total += local_concordance(f_outputs[k], g_outputs[k], norm);
  }
  return std::clamp(total / static_cast<double>(f_outputs.size()), 0.0, 1.0);
}

double local_fidelity(const Explanation& g, const Neighborhood& evaluation, NormKind norm) {
  std::vector<ProbabilityVector> predicted;
  predicted.reserve(evaluation.masks.size());
  for (const FeatureMask& m : evaluation.masks) predicted.push_back(g.predict(m));
  return local_fidelity(evaluation.outputs, predicted, norm);
}

FlipResult find_class_flip(const Explanation& g, const FeatureMask& x_mask) {
  const std::size_t features = g.feature_count();
  if (x_mask.size() != features) throw ShapeError("mask length does not match the explanation");

  FlipResult r{FeatureMask::all_zeros(features), x_mask, 0, false};
  const std::size_t start_class = g.predict(x_mask).argmax();
  const Matrix& importance = g.importance.combined;
  for (;;) {
    const std::size_t c = g.predict(r.counterfactual).argmax();
    if (c != start_class) {
      r.flipped = true;
      return r;
    }
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < features; ++i) {
      if (!r.counterfactual[i]) continue;
      const double a = importance(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
      if (a <= 0.0) continue;
      if (!best || a > importance(static_cast<Eigen::Index>(*best), static_cast<Eigen::Index>(c))) {
        best = i;
      }
    }
    if (!best) return r;
    r.counterfactual.set(*best, false);
    r.removed.set(*best, true);
    ++r.steps;
  }
}

PrescriptivityResult prescriptivity(BlackBoxHandle& blackbox, const MaskedInstance& source,
                                    const Explanation& g, NormKind norm, EvalBudget* budget) {
  PrescriptivityResult r{std::nullopt, find_class_flip(g, FeatureMask::all_ones(g.feature_count()))};
  if (!r.flip.flipped) return r;
  const FeatureMask point = r.flip.counterfactual;
  const auto f_out = blackbox.evaluate_masks(source, std::span(&point, 1), budget);
  r.value = local_concordance(f_out.front(), g.predict(point), norm);
  return r;
}

double conciseness(const Matrix& absolute_importance) {
  const auto features = absolute_importance.rows();
  if (features < 2) throw InvalidArgument("conciseness needs at least two features");
  double total = 0.0;
  for (Eigen::Index i = 0; i < features; ++i) {
    const double row = std::min(1.0, absolute_importance.row(i).lpNorm<1>());
    total += 1.0 - row;
  }
  // An all-zero matrix would score F/(F-1); it is maximally concise.
  return std::clamp(total / static_cast<double>(features - 1), 0.0, 1.0);
}

double conciseness(const ImportanceMatrices& m, std::size_t features) {
  if (features < 2) throw InvalidArgument("conciseness needs at least two features");
  if (static_cast<std::size_t>(m.absolute.rows()) != features) {
    throw ShapeError("importance matrix has " + std::to_string(m.absolute.rows()) + " rows, expected " +
                     std::to_string(features));
  }
  return conciseness(m.absolute);
}

namespace {

void check_same_shape(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError("importance matrices differ in shape");
}

}  // namespace

Similarity cosine_similarity(const Matrix& a, const Matrix& b) {
  check_same_shape(a, b);
  // Same reduction for all three sums, so cos(a, a) is exactly 1.
  const double saa = (a.array() * a.array()).sum();
  const double sbb = (b.array() * b.array()).sum();
  if (saa == 0.0 || sbb == 0.0) return {0.0, true};
  const double dot = (a.array() * b.array()).sum();
  return {std::clamp(dot / std::sqrt(saa * sbb), -1.0, 1.0), false};
}

Similarity magnitude_similarity(const Matrix& a, const Matrix& b) {
  Similarity s = cosine_similarity(a, b);
  if (s.degenerate) return s;
  const double na = a.norm();
  const double nb = b.norm();
  s.value *= 1.0 - std::abs(na - nb) / std::max(na, nb);
  return s;
}

Similarity cosine_similarity(const ImportanceMatrices& a, const ImportanceMatrices& b) {
  return cosine_similarity(a.relative, b.relative);
}

Similarity magnitude_similarity(const ImportanceMatrices& a, const ImportanceMatrices& b) {
  return magnitude_similarity(a.relative, b.relative);
}

SimilarityKind parse_similarity_kind(std::string_view name) {
  if (name == "cosine") return SimilarityKind::cosine;
  if (name == "magnitude") return SimilarityKind::magnitude;
  throw InvalidArgument("unknown similarity '" + std::string(name) + "'");
}

double robustness(std::span<const ImportanceMatrices> matrices, SimilarityKind kind) {
  if (matrices.size() < 2) throw InvalidArgument("robustness needs at least two explanations");
  double total = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < matrices.size(); ++i) {
    for (std::size_t j = i + 1; j < matrices.size(); ++j) {
      total += kind == SimilarityKind::cosine ? cosine_similarity(matrices[i], matrices[j]).value
                                              : magnitude_similarity(matrices[i], matrices[j]).value;
      ++pairs;
    }
  }
  return std::clamp(total / static_cast<double>(pairs), -1.0, 1.0);
}

double robustness(std::span<const Explanation> explanations, SimilarityKind kind) {
  std::vector<ImportanceMatrices> matrices;
  matrices.reserve(explanations.size());
  for (const Explanation& e : explanations) matrices.push_back(e.importance);
  return robustness(matrices, kind);
}

}  // namespace revel
