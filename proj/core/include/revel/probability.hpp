#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace revel {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Unnormalized class scores. Always finite, at least two classes.
class LogitVector {
 public:
  explicit LogitVector(Vector values);

  const Vector& values() const { return values_; }
  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
  double operator[](std::size_t i) const { return values_(static_cast<Eigen::Index>(i)); }

 private:
  Vector values_;
};

/// A point of the probability simplex. Validated on construction so that
/// downstream code can rely on the invariants.
class ProbabilityVector {
 public:
  static constexpr double kSumTolerance = 1e-9;

  /// Throws InvalidArgument unless every entry lies in [0,1] and the
  /// entries sum to one within `sum_tolerance`. Values are kept as given.
  explicit ProbabilityVector(Vector values, double sum_tolerance = kSumTolerance);

  const Vector& values() const { return values_; }
  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
  double operator[](std::size_t i) const { return values_(static_cast<Eigen::Index>(i)); }

  /// Index of the largest entry; ties resolve to the lowest index.
  std::size_t argmax() const;

  friend bool operator==(const ProbabilityVector& a, const ProbabilityVector& b) {
    return a.values_.size() == b.values_.size() && a.values_ == b.values_;
  }

 private:
  Vector values_;
};

enum class NormKind { one, two, infinity };

NormKind parse_norm_kind(std::string_view name);
std::string_view to_string(NormKind kind);

/// Softmax with max-subtraction; safe for logits of magnitude ~700 and more.
ProbabilityVector softmax(const LogitVector& logits);

/// diag(p) - p p^T. Symmetric, rows sum to zero.
Matrix softmax_jacobian(const ProbabilityVector& p);

/// |u - v| under the chosen norm.
double prob_distance(const ProbabilityVector& u, const ProbabilityVector& v, NormKind kind);

/// Largest distance between two probability vectors: |e1 - e2|.
double norm_constant(NormKind kind, std::size_t classes);

}  // namespace revel
