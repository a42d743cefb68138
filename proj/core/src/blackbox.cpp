#include "revel/blackbox.hpp"

#include <algorithm>
#include <set>

#include "revel/errors.hpp"
#include "revel/rng.hpp"

namespace revel {

SyntheticModel::SyntheticModel(Kind kind, SyntheticParams params)
    : kind_(kind), params_(std::move(params)) {
  const auto classes = params_.bias.size();
  if (classes < 2) throw InvalidArgument("synthetic model needs at least two classes");
  if (params_.weights.cols() != classes) throw ShapeError("weights and bias disagree on classes");
  if (params_.weights.rows() < 1) throw ShapeError("synthetic model needs input features");
  for (const Interaction& term : params_.interactions) {
    if (term.first >= input_features() || term.second >= input_features()) {
      throw ShapeError("interaction refers to a missing feature");
    }
    if (term.coefficients.size() != classes) throw ShapeError("interaction coefficient length");
  }
}

std::string SyntheticModel::kind() const {
  return kind_ == Kind::linear ? "synthetic-linear" : "synthetic-patch-nonlinear";
}

std::vector<double> SyntheticModel::encode(const Tensor& input) const {
  const std::size_t grid = params_.pooling_grid;
  if (grid == 0) {
    if (input.values.size() != input_features()) {
      throw ShapeError("synthetic model expects " + std::to_string(input_features()) +
                       " inputs, got " + std::to_string(input.values.size()));
    }
    return input.values;
  }
  if (!input.is_image()) throw ShapeError("pooling synthetic model expects an image");
  if (grid * grid != input_features()) throw ShapeError("pooling grid does not match weights");
  const PatchGrid cells = grid_partition(input.shape[0], input.shape[1], input.shape[2], grid);
  std::vector<double> sums(cells.feature_count(), 0.0);
  const std::size_t c = cells.channels;
  for (std::size_t r = 0; r < cells.height; ++r) {
    for (std::size_t col = 0; col < cells.width; ++col) {
      const double* px = input.values.data() + (r * cells.width + col) * c;
      double s = 0.0;
      for (std::size_t k = 0; k < c; ++k) s += px[k];
      sums[cells.feature_at(r, col)] += s;
    }
  }
  const double per_cell = static_cast<double>(cells.patch_height * cells.patch_width * c);
  for (double& s : sums) s = 2.0 * (s / per_cell - 0.5);
  return sums;
}

LogitVector SyntheticModel::logits(std::span<const double> u) const {
  if (u.size() != input_features()) throw ShapeError("feature vector length");
  const Eigen::Map<const Vector> uv(u.data(), static_cast<Eigen::Index>(u.size()));
  Vector l = params_.weights.transpose() * uv + params_.bias;
  if (kind_ == Kind::patch_nonlinear && params_.gamma != 0.0) {
    for (const Interaction& term : params_.interactions) {
      l += params_.gamma * (u[term.first] * u[term.second]) * term.coefficients;
    }
  }
  return LogitVector(std::move(l));
}

ProbabilityVector SyntheticModel::probabilities(const Tensor& input) const {
  return softmax(logits(encode(input)));
}

std::vector<ProbabilityVector> SyntheticModel::predict(std::span<const Tensor> inputs) {
  std::vector<ProbabilityVector> out;
  out.reserve(inputs.size());
  for (const Tensor& input : inputs) out.push_back(probabilities(input));
  return out;
}

std::vector<std::shared_ptr<SyntheticModel>> make_synthetic_suite(
    std::uint64_t seed, std::size_t features, std::size_t classes,
    const SyntheticSuiteOptions& options) {
  if (features < 2) throw InvalidArgument("synthetic suite needs at least two features");
  if (classes < 2) throw InvalidArgument("synthetic suite needs at least two classes");
  const std::size_t inputs =
      options.pooling_grid == 0 ? features : options.pooling_grid * options.pooling_grid;
  RngStream rng(seed, derive_stream(0x5157, {inputs, classes}));

  const auto rows = static_cast<Eigen::Index>(inputs);
  const auto cols = static_cast<Eigen::Index>(classes);
  SyntheticParams params;
  params.weights.resize(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      params.weights(i, j) = rng.uniform(-options.weight_scale, options.weight_scale);
    }
  }
  params.weights.colwise() -= params.weights.rowwise().mean();
  params.bias.resize(cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    params.bias(j) = rng.uniform(-options.bias_scale, options.bias_scale);
  }
  params.bias.array() -= params.bias.mean();

  std::size_t pairs = options.pair_count == 0 ? std::max<std::size_t>(1, inputs / 2)
                                              : options.pair_count;
  pairs = std::min(pairs, inputs * (inputs - 1) / 2);
  std::set<std::pair<std::size_t, std::size_t>> chosen;
  while (chosen.size() < pairs) {
    std::size_t a = rng.uniform_index(inputs);
    std::size_t b = rng.uniform_index(inputs);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (!chosen.emplace(a, b).second) continue;
    Vector c(cols);
    for (Eigen::Index j = 0; j < cols; ++j) c(j) = rng.uniform(-1.0, 1.0);
    c.array() -= c.mean();
    params.interactions.push_back(Interaction{a, b, std::move(c)});
  }
  params.gamma = options.gamma;
  params.pooling_grid = options.pooling_grid;

  SyntheticParams linear = params;
  linear.interactions.clear();
  linear.gamma = 0.0;
  return {std::make_shared<SyntheticModel>(SyntheticModel::Kind::linear, std::move(linear)),
          std::make_shared<SyntheticModel>(SyntheticModel::Kind::patch_nonlinear, std::move(params))};
}

void EvalBudget::charge(std::size_t n) {
  if (n > max_ - consumed_) {
    throw BudgetExhausted("evaluation budget of " + std::to_string(max_) + " exceeded: " +
                          std::to_string(consumed_) + " used, " + std::to_string(n) +
                          " requested");
  }
  consumed_ += n;
}

BlackBoxHandle::BlackBoxHandle(std::shared_ptr<BlackBox> model, bool cache_enabled)
    : model_(std::move(model)), cache_enabled_(cache_enabled) {
  if (!model_) throw InvalidArgument("null black box");
  classes_ = model_->class_count();
  if (classes_ < 2) throw InvalidArgument("black box reports fewer than two classes");
}

std::vector<ProbabilityVector> BlackBoxHandle::checked_predict(std::span<const Tensor> inputs) {
  if (inputs.empty()) return {};
  std::vector<ProbabilityVector> out = model_->predict(inputs);
  if (out.size() != inputs.size()) {
    throw BlackBoxError("black box returned " + std::to_string(out.size()) + " results for " +
                        std::to_string(inputs.size()) + " inputs");
  }
  for (const ProbabilityVector& p : out) {
    if (p.size() != classes_) throw BlackBoxError("black box returned a wrong class count");
  }
  eval_counter_ += inputs.size();
  return out;
}

std::vector<ProbabilityVector> BlackBoxHandle::evaluate_batch(std::span<const Tensor> inputs,
                                                              EvalBudget* budget) {
  std::lock_guard lock(mutex_);
  if (budget) budget->charge(inputs.size());
  return checked_predict(inputs);
}

std::vector<ProbabilityVector> BlackBoxHandle::evaluate_masks(const MaskedInstance& source,
                                                              std::span<const FeatureMask> masks,
                                                              EvalBudget* budget) {
  const std::size_t features = source.featurizer.feature_count();
  for (const FeatureMask& m : masks) {
    if (m.size() != features) throw ShapeError("mask length does not match the featurizer");
  }

  std::lock_guard lock(mutex_);
  if (!cache_enabled_) {
    if (budget) budget->charge(masks.size());
    std::vector<Tensor> inputs;
    inputs.reserve(masks.size());
    for (const FeatureMask& m : masks) inputs.push_back(source.featurizer.apply(source.instance, m));
    return checked_predict(inputs);
  }

  MaskCache& cache = cache_[source.key];
  std::vector<const FeatureMask*> pending;
  {
    std::unordered_map<FeatureMask, bool, FeatureMaskHash> queued;
    for (const FeatureMask& m : masks) {
      if (cache.contains(m) || queued.contains(m)) continue;
      queued.emplace(m, true);
      pending.push_back(&m);
    }
  }
  if (budget) budget->charge(pending.size());

  std::vector<Tensor> inputs;
  inputs.reserve(pending.size());
  for (const FeatureMask* m : pending) inputs.push_back(source.featurizer.apply(source.instance, *m));
  std::vector<ProbabilityVector> fresh = checked_predict(inputs);
  for (std::size_t i = 0; i < pending.size(); ++i) cache.emplace(*pending[i], fresh[i]);

  std::vector<ProbabilityVector> out;
  out.reserve(masks.size());
  for (const FeatureMask& m : masks) out.push_back(cache.at(m));
  return out;
}

void BlackBoxHandle::clear_cache() {
  std::lock_guard lock(mutex_);
  cache_.clear();
}

void BlackBoxHandle::forget_instance(std::uint64_t key) {
  std::lock_guard lock(mutex_);
  cache_.erase(key);
}

}  // namespace revel
