#include "revel/probability.hpp"

#include <cmath>
#include <string>

#include "revel/errors.hpp"

namespace revel {

LogitVector::LogitVector(Vector values) : values_(std::move(values)) {
  if (values_.size() < 2) {
    throw InvalidArgument("logit vector needs at least two classes");
  }
  if (!values_.allFinite()) {
    throw InvalidArgument("logit vector has non-finite entries");
  }
}

ProbabilityVector::ProbabilityVector(Vector values, double sum_tolerance)
    : values_(std::move(values)) {
  if (values_.size() < 2) {
    throw InvalidArgument("probability vector needs at least two classes");
  }
  for (Eigen::Index i = 0; i < values_.size(); ++i) {
    const double p = values_(i);
    if (!(p >= 0.0 && p <= 1.0)) {
      throw InvalidArgument("probability entry " + std::to_string(p) + " outside [0,1]");
    }
  }
  const double total = values_.sum();
  if (std::abs(total - 1.0) > sum_tolerance) {
    throw InvalidArgument("probabilities sum to " + std::to_string(total));
  }
}

std::size_t ProbabilityVector::argmax() const {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < values_.size(); ++i) {
    if (values_(i) > values_(best)) best = i;
  }
  return static_cast<std::size_t>(best);
}

NormKind parse_norm_kind(std::string_view name) {
  if (name == "one" || name == "1" || name == "l1") return NormKind::one;
  if (name == "two" || name == "2" || name == "l2") return NormKind::two;
  if (name == "infinity" || name == "inf" || name == "max") return NormKind::infinity;
  throw InvalidArgument("unknown norm kind '" + std::string(name) + "'");
}

std::string_view to_string(NormKind kind) {
  switch (kind) {
    case NormKind::one: return "one";
    case NormKind::two: return "two";
    case NormKind::infinity: return "infinity";
  }
  return "two";
}

ProbabilityVector softmax(const LogitVector& logits) {
  const Vector& l = logits.values();
  const Vector shifted = (l.array() - l.maxCoeff()).exp().matrix();
  Vector p = shifted / shifted.sum();
  // Entries sum to 1 up to rounding; fold the residue into the largest
  // entry so the 1e-9 invariant holds for any class count.
  Eigen::Index top = 0;
  p.maxCoeff(&top);
  p(top) += 1.0 - p.sum();
  p(top) = std::min(1.0, std::max(0.0, p(top)));
  return ProbabilityVector(std::move(p));
}

Matrix softmax_jacobian(const ProbabilityVector& p) {
  const Vector& v = p.values();
  Matrix j = -v * v.transpose();
  j.diagonal() += v;
  return j;
}

namespace {

double norm_of(const Vector& d, NormKind kind) {
  switch (kind) {
    case NormKind::one: return d.lpNorm<1>();
    case NormKind::two: return d.norm();
    case NormKind::infinity: return d.lpNorm<Eigen::Infinity>();
  }
  return d.norm();
}

}  // namespace

double prob_distance(const ProbabilityVector& u, const ProbabilityVector& v, NormKind kind) {
  if (u.size() != v.size()) {
    throw ShapeError("probability vectors of length " + std::to_string(u.size()) + " and " +
                     std::to_string(v.size()));
  }
  return norm_of(u.values() - v.values(), kind);
}

double norm_constant(NormKind kind, std::size_t classes) {
  if (classes < 2) {
    throw InvalidArgument("norm constant needs at least two classes");
  }
  switch (kind) {
    case NormKind::one: return 2.0;
    case NormKind::two: return std::sqrt(2.0);
    case NormKind::infinity: return 1.0;
  }
  return std::sqrt(2.0);
}

}  // namespace revel
