#include "revel/explain.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "revel/errors.hpp"

namespace revel {

LogitVector pseudo_logits(const ProbabilityVector& p, double eps) {
  if (!(eps > 0.0)) throw InvalidArgument("pseudo-logit eps must be positive");
  Vector l = p.values().array().max(eps).log().matrix();
  l.array() -= l.mean();
  return LogitVector(std::move(l));
}

RidgeFit weighted_ridge_fit(std::span<const FeatureMask> masks, std::span<const LogitVector> targets,
                            std::span<const double> weights, double alpha) {
  if (masks.size() != targets.size() || masks.size() != weights.size()) {
    throw ShapeError("masks, targets and weights differ in length");
  }
  if (masks.empty()) throw InvalidArgument("empty regression problem");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw InvalidArgument("alpha must be >= 0");
  const std::size_t features = masks.front().size();
  const std::size_t classes = targets.front().size();
  {
    std::set<FeatureMask> distinct(masks.begin(), masks.end());
    if (distinct.size() < 2) throw InvalidArgument("regression needs at least two distinct masks");
  }
  bool any_positive = false;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("weights must be finite and >= 0");
    any_positive = any_positive || w > 0.0;
  }
  if (!any_positive) throw InvalidArgument("all regression weights are zero");

  const auto n = static_cast<Eigen::Index>(masks.size());
  const auto f = static_cast<Eigen::Index>(features);
  const auto c = static_cast<Eigen::Index>(classes);
  const Eigen::Index penalty_rows = alpha > 0.0 ? f : 0;

  // Least squares on the sqrt(w)-scaled design, with sqrt(alpha) I rows
  // appended for the penalty. Same minimizer as the normal equations
  // (X^T W X + alpha D) beta = X^T W t, better conditioned.
  Matrix design = Matrix::Zero(n + penalty_rows, f + 1);
  Matrix rhs = Matrix::Zero(n + penalty_rows, c);
  for (Eigen::Index k = 0; k < n; ++k) {
    const FeatureMask& m = masks[static_cast<std::size_t>(k)];
    const LogitVector& t = targets[static_cast<std::size_t>(k)];
    if (m.size() != features) throw ShapeError("masks differ in length");
    if (t.size() != classes) throw ShapeError("targets differ in class count");
    const double s = std::sqrt(weights[static_cast<std::size_t>(k)]);
    for (Eigen::Index i = 0; i < f; ++i) design(k, i) = m[static_cast<std::size_t>(i)] ? s : 0.0;
    design(k, f) = s;
    rhs.row(k) = s * t.values().transpose();
  }
  for (Eigen::Index i = 0; i < penalty_rows; ++i) design(n + i, i) = std::sqrt(alpha);

  Eigen::ColPivHouseholderQR<Matrix> qr(design);
  if (alpha == 0.0 && qr.rank() < f + 1) {
    throw SingularSystem("unregularized design has rank " + std::to_string(qr.rank()) + " < " +
                         std::to_string(f + 1));
  }
  const Matrix beta = qr.solve(rhs);

  RidgeFit fit;
  fit.coefficients = beta.topRows(f);
  fit.bias = beta.row(f).transpose();
  if (!fit.coefficients.allFinite() || !fit.bias.allFinite()) {
    throw SingularSystem("regression produced non-finite coefficients");
  }
  const Matrix residual = design.topRows(n) * beta - rhs.topRows(n);
  fit.weighted_residual = residual.squaredNorm();
  return fit;
}

namespace {

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

Vector logits_of(const Matrix& coefficients, const Vector& bias, const FeatureMask& mask) {
  if (static_cast<std::size_t>(coefficients.rows()) != mask.size()) {
    throw ShapeError("mask length does not match the explanation");
  }
  Vector z(coefficients.rows());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = mask[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
  return coefficients.transpose() * z + bias;
}

}  // namespace

ImportanceMatrices derive_importance(const Matrix& coefficients, const Vector& bias,
                                     const FeatureMask& x_mask) {
  if (coefficients.cols() != bias.size()) throw ShapeError("coefficients and bias disagree on classes");
  if (!coefficients.allFinite() || !bias.allFinite()) throw InvalidArgument("non-finite explanation");

  ImportanceMatrices m;
  m.logit = coefficients;
  const ProbabilityVector p = softmax(LogitVector(logits_of(coefficients, bias, x_mask)));
  m.prob = coefficients * softmax_jacobian(p);
  m.combined = Matrix(coefficients.rows(), coefficients.cols());
  for (Eigen::Index i = 0; i < coefficients.rows(); ++i) {
    for (Eigen::Index j = 0; j < coefficients.cols(); ++j) {
      m.combined(i, j) =
          sign_of(m.logit(i, j)) * std::sqrt(std::abs(m.logit(i, j)) * std::abs(m.prob(i, j)));
    }
  }
  const double peak = m.combined.cwiseAbs().maxCoeff();
  m.relative = peak > 0.0 ? Matrix(m.combined / peak) : Matrix::Zero(m.combined.rows(), m.combined.cols());
  m.absolute = m.relative.cwiseAbs();
  return m;
}

LogitVector Explanation::logits_at(const FeatureMask& mask) const {
  return LogitVector(logits_of(coefficients, bias, mask));
}

ProbabilityVector Explanation::predict(const FeatureMask& mask) const {
  return softmax(logits_at(mask));
}

Explanation fit_neighborhood(Neighborhood neighborhood, const MethodSpec& method) {
  if (neighborhood.masks.size() != neighborhood.outputs.size() ||
      neighborhood.masks.size() != neighborhood.weights.size()) {
    throw ShapeError("neighbourhood lists differ in length");
  }
  if (neighborhood.masks.empty()) throw InvalidArgument("empty neighbourhood");
  std::vector<LogitVector> targets;
  targets.reserve(neighborhood.outputs.size());
  for (const ProbabilityVector& p : neighborhood.outputs) targets.push_back(pseudo_logits(p));

  RidgeFit fit = weighted_ridge_fit(neighborhood.masks, targets, neighborhood.weights,
                                    method.kernel.alpha);
  Explanation e;
  e.method = method;
  e.importance = derive_importance(fit.coefficients, fit.bias,
                                   FeatureMask::all_ones(neighborhood.masks.front().size()));
  e.coefficients = std::move(fit.coefficients);
  e.bias = std::move(fit.bias);
  e.weighted_residual = fit.weighted_residual;
  e.neighborhood = std::move(neighborhood);
  return e;
}

Explanation fit_explanation(BlackBoxHandle& blackbox, const MaskedInstance& source,
                            const MethodSpec& method, std::size_t samples, RngStream& rng,
                            EvalBudget* budget) {
  const std::size_t features = source.featurizer.feature_count();
  std::size_t cap = samples + 1;
  if (method.sampler == SamplerKind::exhaustive && features <= kMaxEnumerationFeatures) {
    cap = std::size_t{1} << features;
  }
  EvalBudget own(cap);
  EvalBudget* active = budget ? budget : &own;
  const std::size_t before = active->consumed();

  Neighborhood n = build_neighborhood(method, samples, blackbox, source, rng, active);
  Explanation e = fit_neighborhood(std::move(n), method);
  e.evaluations = active->consumed() - before;
  e.seed = rng.seed();
  e.stream_id = rng.stream_id();
  return e;
}

}  // namespace revel
