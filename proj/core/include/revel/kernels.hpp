#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace revel {

/// Finite stand-in for the SHAP weight of the empty and the full
/// coalition, where the closed form divides by zero.
inline constexpr double kShapSurrogateWeight = 1e6;

/// exp(-d^2 / sigma^2).
double lime_kernel(double distance, double sigma);

/// (F-1) / (binom(F, |z|) (F-|z|) |z|) for 0 < |z| < F, and
/// kShapSurrogateWeight for |z| in {0, F}.
double shap_kernel(std::size_t features, std::size_t present);

struct KernelSpec {
  enum class Kind { lime, shap };

  Kind kind = Kind::lime;
  double sigma = 0.0;  // lime only
  double alpha = 1.0;  // ridge strength
};

enum class SamplerKind { lime, shap_global, shap_local, exhaustive };

/// How neighbours are drawn and how they are weighted.
struct MethodSpec {
  SamplerKind sampler = SamplerKind::lime;
  KernelSpec kernel;

  static constexpr double kDefaultAlpha = 1.0;
  static constexpr double kDefaultExactAlpha = 0.0;

  static MethodSpec lime(double sigma, double alpha = kDefaultAlpha);
  static MethodSpec shap_global(double alpha = kDefaultAlpha);
  static MethodSpec shap_local(double alpha = kDefaultAlpha);
  static MethodSpec shap_exact(double alpha = kDefaultExactAlpha);
  /// All 2^F masks weighted by the LIME kernel.
  static MethodSpec lime_exhaustive(double sigma, double alpha = kDefaultAlpha);

  /// Accepts "lime:<sigma>", "lime-exhaustive:<sigma>", "shap-global",
  /// "shap-local" and "shap-exact". Throws ConfigError otherwise.
  static MethodSpec parse(std::string_view name);
  static MethodSpec parse(std::string_view name, double alpha);

  /// Canonical name, the inverse of parse().
  std::string name() const;

  bool deterministic() const { return sampler == SamplerKind::exhaustive; }
};

}  // namespace revel
