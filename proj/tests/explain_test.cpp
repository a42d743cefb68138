#include "revel/explain.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "revel/errors.hpp"

namespace revel {
namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

Matrix design_of(std::span<const FeatureMask> masks) {
  const auto f = static_cast<Eigen::Index>(masks.front().size());
  Matrix x(static_cast<Eigen::Index>(masks.size()), f + 1);
  for (std::size_t k = 0; k < masks.size(); ++k) {
    for (Eigen::Index i = 0; i < f; ++i) x(static_cast<Eigen::Index>(k), i) = masks[k][static_cast<std::size_t>(i)];
    x(static_cast<Eigen::Index>(k), f) = 1.0;
  }
  return x;
}

TEST(PseudoLogits, Examples) {
  const LogitVector l = pseudo_logits(ProbabilityVector(vec({0.5, 0.5})));
  EXPECT_NEAR(l[0], 0.0, 1e-5);
  EXPECT_NEAR(l[1], 0.0, 1e-5);

  const ProbabilityVector p(vec({0.7, 0.2, 0.1}));
  EXPECT_LT((softmax(pseudo_logits(p)).values() - p.values()).cwiseAbs().maxCoeff(), 1e-5);

  const LogitVector sat = pseudo_logits(ProbabilityVector(vec({1.0, 0.0})));
  EXPECT_TRUE(sat.values().allFinite());
  EXPECT_NEAR(sat.values().sum(), 0.0, 1e-12);
}

TEST(RidgeFit, ConstantTargets) {
  const auto masks = enumerate_masks(3);
  std::vector<LogitVector> targets(masks.size(), LogitVector(vec({2.0, -1.0})));
  std::vector<double> weights(masks.size(), 1.0);
  const RidgeFit fit = weighted_ridge_fit(masks, targets, weights, 0.0);
  EXPECT_LE(fit.coefficients.cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(fit.bias(0), 2.0, 1e-12);
  EXPECT_NEAR(fit.bias(1), -1.0, 1e-12);
}

TEST(RidgeFit, RecoversExactLinearTargets) {
  RngStream rng(6, 1);
  const Matrix w = Matrix::NullaryExpr(6, 3, [&] { return rng.normal(); });
  const Vector b = vec({0.3, -0.2, 1.0});
  const auto masks = enumerate_masks(6);
  std::vector<LogitVector> targets;
  for (const FeatureMask& m : masks) {
    Vector z(6);
    for (int i = 0; i < 6; ++i) z(i) = m[static_cast<std::size_t>(i)];
    targets.emplace_back(w.transpose() * z + b);
  }
  const std::vector<double> weights(masks.size(), 1.0);
  const RidgeFit fit = weighted_ridge_fit(masks, targets, weights, 0.0);
  EXPECT_LE((fit.coefficients - w).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LE((fit.bias - b).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LE(fit.weighted_residual, 1e-20);
}

TEST(RidgeFit, MatchesNormalEquationsOnNoisyWeightedData) {
  RngStream rng(6, 2);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t features = 3 + rng.uniform_index(6);
    std::vector<FeatureMask> masks;
    std::vector<LogitVector> targets;
    std::vector<double> weights;
    for (int k = 0; k < 80; ++k) {
      masks.push_back(FeatureMask::from_code(rng.next_u64() & ((1ULL << features) - 1), features));
      targets.emplace_back(vec({rng.normal(), rng.normal(), rng.normal()}));
      weights.push_back(rng.uniform(0.0, 2.0));
    }
    const double alpha = trial % 2 == 0 ? 0.0 : rng.uniform(0.1, 3.0);
    const RidgeFit fit = weighted_ridge_fit(masks, targets, weights, alpha);

    const Matrix x = design_of(masks);
    Matrix t(static_cast<Eigen::Index>(targets.size()), 3);
    for (std::size_t k = 0; k < targets.size(); ++k) t.row(static_cast<Eigen::Index>(k)) = targets[k].values();
    const Vector w = Eigen::Map<const Vector>(weights.data(), static_cast<Eigen::Index>(weights.size()));
    const auto fdim = static_cast<Eigen::Index>(features);
    // Ridge through the normal equations: (X^T W X + alpha D) beta = X^T W t.
    Matrix lhs = x.transpose() * w.asDiagonal() * x;
    lhs.topLeftCorner(fdim, fdim).diagonal().array() += alpha;
    const Matrix beta = lhs.fullPivLu().solve(x.transpose() * w.asDiagonal() * t);
    if (alpha == 0.0) {
      EXPECT_LE((beta - oracle::normal_equation_solve(x, w, t)).cwiseAbs().maxCoeff(), 1e-9);
    }
    EXPECT_LE((fit.coefficients - beta.topRows(fdim)).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LE((fit.bias - beta.row(fdim).transpose()).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(RidgeFit, WeightScaleInvariance) {
  RngStream rng(6, 3);
  std::vector<FeatureMask> masks;
  std::vector<LogitVector> targets;
  std::vector<double> weights, doubled;
  for (int k = 0; k < 60; ++k) {
    masks.push_back(FeatureMask::from_code(rng.next_u64() & 31, 5));
    targets.emplace_back(vec({rng.normal(), rng.normal()}));
    weights.push_back(rng.uniform(0.1, 1.0));
    doubled.push_back(2.0 * weights.back());
  }
  const RidgeFit a = weighted_ridge_fit(masks, targets, weights, 0.0);
  const RidgeFit b = weighted_ridge_fit(masks, targets, doubled, 0.0);
  EXPECT_LE((a.coefficients - b.coefficients).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE((a.bias - b.bias).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(RidgeFit, ShrinkageIsMonotoneInAlpha) {
  RngStream rng(6, 4);
  std::vector<FeatureMask> masks;
  std::vector<LogitVector> targets;
  std::vector<double> weights;
  for (int k = 0; k < 100; ++k) {
    masks.push_back(FeatureMask::from_code(rng.next_u64() & 255, 8));
    targets.emplace_back(vec({3.0 * rng.normal(), rng.normal(), rng.normal()}));
    weights.push_back(rng.uniform(0.0, 1.0));
  }
  double prev = std::numeric_limits<double>::infinity();
  for (double alpha : {0.0, 1e-4, 1e-2, 0.1, 0.5, 1.0, 2.0, 10.0, 100.0, 1e4}) {
    const double norm = weighted_ridge_fit(masks, targets, weights, alpha).coefficients.norm();
    EXPECT_LE(norm, prev + 1e-12) << alpha;
    prev = norm;
  }
}

TEST(RidgeFit, Errors) {
  const std::vector<FeatureMask> same(4, FeatureMask::all_ones(3));
  const std::vector<LogitVector> t(4, LogitVector(vec({0.0, 1.0})));
  const std::vector<double> w(4, 1.0);
  EXPECT_THROW(weighted_ridge_fit(same, t, w, 1.0), InvalidArgument);

  const std::vector<FeatureMask> two{FeatureMask::all_ones(3), FeatureMask::all_zeros(3)};
  const std::vector<LogitVector> t2(2, LogitVector(vec({0.0, 1.0})));
  EXPECT_THROW(weighted_ridge_fit(two, t2, std::vector<double>{1.0, 1.0}, 0.0), SingularSystem);
  EXPECT_NO_THROW(weighted_ridge_fit(two, t2, std::vector<double>{1.0, 1.0}, 1.0));
  EXPECT_THROW(weighted_ridge_fit(two, t2, std::vector<double>{0.0, 0.0}, 1.0), InvalidArgument);
  EXPECT_THROW(weighted_ridge_fit(two, t2, std::vector<double>{-1.0, 1.0}, 1.0), InvalidArgument);
  EXPECT_THROW(weighted_ridge_fit(two, t2, std::vector<double>{1.0}, 1.0), ShapeError);
}

TEST(DeriveImportance, ZeroCoefficients) {
  const ImportanceMatrices m = derive_importance(Matrix::Zero(4, 3), Vector::Zero(3), FeatureMask::all_ones(4));
  for (const Matrix* x : {&m.logit, &m.prob, &m.combined, &m.relative, &m.absolute}) {
    EXPECT_EQ(*x, Matrix::Zero(4, 3));
  }
}

TEST(DeriveImportance, IdentitiesOnRandomCoefficients) {
  RngStream rng(8, 1);
  for (int trial = 0; trial < 200; ++trial) {
    const auto f = static_cast<Eigen::Index>(2 + rng.uniform_index(10));
    const auto c = static_cast<Eigen::Index>(2 + rng.uniform_index(5));
    Matrix a = Matrix::NullaryExpr(f, c, [&] { return rng.normal(); });
    if (trial % 3 == 0) a(0, 0) = 0.0;
    const Vector b = Vector::NullaryExpr(c, [&] { return rng.normal(); });
    const FeatureMask x = FeatureMask::all_ones(static_cast<std::size_t>(f));
    const ImportanceMatrices m = derive_importance(a, b, x);

    const Vector logits = a.colwise().sum().transpose() + b;
    const Matrix jac = softmax_jacobian(softmax(LogitVector(logits)));
    EXPECT_LE((m.prob - a * jac).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(m.logit, a);
    for (Eigen::Index i = 0; i < f; ++i) {
      for (Eigen::Index j = 0; j < c; ++j) {
        EXPECT_NEAR(std::abs(m.combined(i, j)), std::sqrt(std::abs(a(i, j)) * std::abs(m.prob(i, j))), 1e-12);
        if (a(i, j) == 0.0) EXPECT_EQ(m.combined(i, j), 0.0);
        if (m.prob(i, j) != 0.0 && a(i, j) != 0.0) {
          EXPECT_EQ(std::signbit(m.combined(i, j)), std::signbit(a(i, j)));
        }
      }
    }
    EXPECT_EQ(m.absolute.maxCoeff(), 1.0);
    EXPECT_EQ(m.absolute, m.relative.cwiseAbs());
  }
}

class FitExplanationTest : public ::testing::Test {
 protected:
  VectorFeaturizer featurizer{std::vector<double>(8, 0.0)};
  Tensor x = Tensor::vector({1.2, 0.7, 0.9, 1.4, 0.6, 1.0, 1.1, 0.8});
};

TEST_F(FitExplanationTest, ShapExactMatchesShapleyValues) {
  for (const auto& model : make_synthetic_suite(21, 8, 3)) {
    BlackBoxHandle h(model);
    RngStream rng(1, 1);
    const Explanation e = fit_explanation(h, {featurizer, x, 1}, MethodSpec::shap_exact(), 0, rng);
    EXPECT_EQ(e.evaluations, 256u);
    for (Eigen::Index j = 0; j < 3; ++j) {
      const auto phi = oracle::shapley_values(8, [&](std::uint64_t code) {
        return pseudo_logits(model->probabilities(featurizer.apply(x, FeatureMask::from_code(code, 8)))).values()(j);
      });
      for (Eigen::Index i = 0; i < 8; ++i) EXPECT_NEAR(e.coefficients(i, j), phi[static_cast<std::size_t>(i)], 1e-6);
    }
  }
}

TEST_F(FitExplanationTest, StrongestFeatureOfLinearModel) {
  SyntheticParams p;
  p.weights = Matrix::Zero(8, 3);
  p.bias = Vector::Zero(3);
  p.weights.row(5) = vec({2.0, -1.0, -1.0}).transpose();
  p.weights.row(1) = vec({-0.3, 0.6, -0.3}).transpose();
  p.weights.row(6) = vec({0.2, 0.2, -0.4}).transpose();
  auto model = std::make_shared<SyntheticModel>(SyntheticModel::Kind::linear, p);
  BlackBoxHandle h(model);
  RngStream rng(1, 1);
  const Explanation e = fit_explanation(h, {featurizer, x, 1}, MethodSpec::lime_exhaustive(4.0, 0.0), 0, rng);
  Eigen::Index row = 0, col = 0;
  e.importance.combined.cwiseAbs().maxCoeff(&row, &col);
  EXPECT_EQ(row, 5);
  // The recovered map is diag(x) W in logit space.
  EXPECT_NEAR(e.coefficients(5, 0), 2.0 * 1.0, 1e-9);
}

TEST_F(FitExplanationTest, DeterministicForSameStream) {
  auto model = make_synthetic_suite(22, 8, 3)[1];
  for (const MethodSpec& method : {MethodSpec::lime(3.0), MethodSpec::shap_local(), MethodSpec::shap_global()}) {
    BlackBoxHandle h1(model), h2(model);
    RngStream r1(4, 9), r2(4, 9);
    const Explanation a = fit_explanation(h1, {featurizer, x, 1}, method, 60, r1);
    const Explanation b = fit_explanation(h2, {featurizer, x, 1}, method, 60, r2);
    EXPECT_EQ(a.coefficients, b.coefficients);
    EXPECT_EQ(a.bias, b.bias);
    EXPECT_EQ(a.importance.relative, b.importance.relative);
    EXPECT_EQ(a.neighborhood.masks, b.neighborhood.masks);
    EXPECT_LE(a.evaluations, 61u);
    EXPECT_EQ(a.stream_id, 9u);
  }
}

TEST_F(FitExplanationTest, BudgetTooSmallFails) {
  auto model = make_synthetic_suite(22, 8, 3)[0];
  BlackBoxHandle h(model, false);
  RngStream rng(4, 9);
  EvalBudget budget(20);
  EXPECT_THROW(fit_explanation(h, {featurizer, x, 1}, MethodSpec::lime(3.0), 60, rng, &budget), BudgetExhausted);
}

TEST_F(FitExplanationTest, PredictUsesSoftmaxOfLinearMap) {
  auto model = make_synthetic_suite(22, 8, 3)[0];
  BlackBoxHandle h(model);
  RngStream rng(4, 9);
  const Explanation e = fit_explanation(h, {featurizer, x, 1}, MethodSpec::lime(3.0), 100, rng);
  const FeatureMask m = FeatureMask::from_code(0b10110101, 8);
  Vector z(8);
  for (int i = 0; i < 8; ++i) z(i) = m[static_cast<std::size_t>(i)];
  const Vector logits = e.coefficients.transpose() * z + e.bias;
  EXPECT_LE((e.predict(m).values() - softmax(LogitVector(logits)).values()).cwiseAbs().maxCoeff(), 1e-15);
}

}  // namespace
}  // namespace revel
