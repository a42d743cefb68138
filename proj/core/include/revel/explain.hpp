#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "revel/blackbox.hpp"
#include "revel/featurize.hpp"
#include "revel/kernels.hpp"
#include "revel/probability.hpp"
#include "revel/rng.hpp"
#include "revel/sampling.hpp"

namespace revel {

inline constexpr double kPseudoLogitEps = 1e-6;

/// ln(max(p_j, eps)), centered to zero mean. softmax() of the result gives
/// back p exactly (up to rounding) whenever every p_j >= eps.
LogitVector pseudo_logits(const ProbabilityVector& p, double eps = kPseudoLogitEps);

struct RidgeFit {
  Matrix coefficients;  // F x C
  Vector bias;          // C
  double weighted_residual = 0.0;
};

/// Minimizes sum_k w_k |t_k - (A^T z_k + B)|^2 + alpha |A|_F^2 jointly over
/// all output columns. The bias is not penalized. With alpha = 0 a
/// rank-deficient design raises SingularSystem.
RidgeFit weighted_ridge_fit(std::span<const FeatureMask> masks, std::span<const LogitVector> targets,
                            std::span<const double> weights, double alpha);

/// The five F x C matrices derived from a fitted linear map.
struct ImportanceMatrices {
  Matrix logit;     // A^l, equal to A
  Matrix prob;      // A^p = A J, J the softmax Jacobian at x
  Matrix combined;  // sign(A^l) sqrt(|A^l| |A^p|)
  Matrix relative;  // combined / max |combined|
  Matrix absolute;  // |relative|
};

ImportanceMatrices derive_importance(const Matrix& coefficients, const Vector& bias,
                                     const FeatureMask& x_mask);

/// A local linear explanation g(z) = A^T z + B over logit space.
struct Explanation {
  Matrix coefficients;  // F x C
  Vector bias;          // C
  MethodSpec method;
  ImportanceMatrices importance;
  double weighted_residual = 0.0;
  std::size_t evaluations = 0;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  Neighborhood neighborhood;

  std::size_t feature_count() const { return static_cast<std::size_t>(coefficients.rows()); }
  std::size_t class_count() const { return static_cast<std::size_t>(coefficients.cols()); }

  LogitVector logits_at(const FeatureMask& mask) const;
  /// softmax(A^T z + B).
  ProbabilityVector predict(const FeatureMask& mask) const;
};

/// Pseudo-logit targets, ridge fit and importance matrices for an already
/// evaluated neighbourhood.
Explanation fit_neighborhood(Neighborhood neighborhood, const MethodSpec& method);

/// Builds the neighbourhood, fits the explanation and derives its matrices.
/// Without an explicit budget the task may use samples + 1 evaluations
/// (2^F for exhaustive methods).
Explanation fit_explanation(BlackBoxHandle& blackbox, const MaskedInstance& source,
                            const MethodSpec& method, std::size_t samples, RngStream& rng,
                            EvalBudget* budget = nullptr);

}  // namespace revel
