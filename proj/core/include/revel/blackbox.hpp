#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "revel/featurize.hpp"
#include "revel/probability.hpp"

namespace revel {

/// A classifier seen only through its probability outputs.
class BlackBox {
 public:
  virtual ~BlackBox() = default;

  virtual std::size_t class_count() const = 0;
  /// One probability vector per input, in input order.
  virtual std::vector<ProbabilityVector> predict(std::span<const Tensor> inputs) = 0;
  virtual std::string kind() const = 0;
};

/// Pairwise interaction term: adds coefficients * (u_first * u_second) to
/// the logits. On binary masks this is z_first AND z_second.
struct Interaction {
  std::size_t first = 0;
  std::size_t second = 0;
  Vector coefficients;
};

struct SyntheticParams {
  Matrix weights;  // D x C
  Vector bias;     // C
  std::vector<Interaction> interactions;
  double gamma = 0.0;
  /// 0: the flattened input is the feature vector u. Otherwise images are
  /// mean-pooled over a pooling_grid x pooling_grid grid and each cell
  /// contributes u_k = 2 * (mean - 0.5), so gray cells contribute 0.
  std::size_t pooling_grid = 0;
};

/// In-process stand-in for a trained classifier:
/// softmax(W^T u + b + gamma * sum_k c_k u_i u_j).
class SyntheticModel final : public BlackBox {
 public:
  enum class Kind { linear, patch_nonlinear };

  SyntheticModel(Kind kind, SyntheticParams params);

  std::size_t class_count() const override { return static_cast<std::size_t>(params_.bias.size()); }
  std::vector<ProbabilityVector> predict(std::span<const Tensor> inputs) override;
  std::string kind() const override;

  Kind model_kind() const { return kind_; }
  const SyntheticParams& params() const { return params_; }
  std::size_t input_features() const { return static_cast<std::size_t>(params_.weights.rows()); }

  /// Feature vector u for one input.
  std::vector<double> encode(const Tensor& input) const;
  LogitVector logits(std::span<const double> u) const;
  ProbabilityVector probabilities(const Tensor& input) const;

 private:
  Kind kind_;
  SyntheticParams params_;
};

struct SyntheticSuiteOptions {
  /// Scale of the linear weights; entries are uniform in [-scale, scale]
  /// before class-centering.
  double weight_scale = 1.0;
  double bias_scale = 0.5;
  double gamma = 1.0;
  /// Number of interacting pairs; 0 picks max(1, F / 2).
  std::size_t pair_count = 0;
  std::size_t pooling_grid = 0;
};

/// Deterministic family built from `seed`: element 0 is the softmax-linear
/// model, element 1 the patch-nonlinear model sharing the same W and b.
/// Rows of W and b are centered across classes so the parameters are
/// identifiable from probabilities.
std::vector<std::shared_ptr<SyntheticModel>> make_synthetic_suite(
    std::uint64_t seed, std::size_t features, std::size_t classes,
    const SyntheticSuiteOptions& options = {});

/// Per-task cap on black-box evaluations.
class EvalBudget {
 public:
  explicit EvalBudget(std::size_t max_evaluations) : max_(max_evaluations) {}

  /// Throws BudgetExhausted if `n` more evaluations would exceed the cap.
  void charge(std::size_t n);

  std::size_t max_evaluations() const { return max_; }
  std::size_t consumed() const { return consumed_; }
  std::size_t remaining() const { return max_ - consumed_; }

 private:
  std::size_t max_;
  std::size_t consumed_ = 0;
};

/// An instance together with the featurizer that perturbs it. `key`
/// identifies the pair in the result cache.
struct MaskedInstance {
  const Featurizer& featurizer;
  const Tensor& instance;
  std::uint64_t key = 0;
};

/// Shared entry point to a black box: counts evaluations, caches results
/// by feature mask and serializes access to the model.
class BlackBoxHandle {
 public:
  explicit BlackBoxHandle(std::shared_ptr<BlackBox> model, bool cache_enabled = true);

  BlackBoxHandle(const BlackBoxHandle&) = delete;
  BlackBoxHandle& operator=(const BlackBoxHandle&) = delete;

  std::size_t class_count() const { return classes_; }
  std::string kind() const { return model_->kind(); }
  bool cache_enabled() const { return cache_enabled_; }

  /// Evaluates raw inputs. Every input counts as one evaluation.
  std::vector<ProbabilityVector> evaluate_batch(std::span<const Tensor> inputs,
                                                EvalBudget* budget = nullptr);

  /// Evaluates masked versions of one instance. With the cache on, only
  /// masks not seen before for this instance key are sent to the model
  /// and counted.
  std::vector<ProbabilityVector> evaluate_masks(const MaskedInstance& source,
                                                std::span<const FeatureMask> masks,
                                                EvalBudget* budget = nullptr);

  /// Total evaluations issued to the model so far.
  std::uint64_t eval_count() const { return eval_counter_.load(); }

  void clear_cache();
  void forget_instance(std::uint64_t key);

 private:
  using MaskCache = std::unordered_map<FeatureMask, ProbabilityVector, FeatureMaskHash>;

  std::vector<ProbabilityVector> checked_predict(std::span<const Tensor> inputs);

  std::shared_ptr<BlackBox> model_;
  std::size_t classes_;
  bool cache_enabled_;
  std::atomic<std::uint64_t> eval_counter_{0};
  std::mutex mutex_;
  std::unordered_map<std::uint64_t, MaskCache> cache_;
};

}  // namespace revel
