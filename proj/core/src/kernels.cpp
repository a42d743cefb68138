#include "revel/kernels.hpp"

#include <charconv>
#include <cmath>

#include "revel/errors.hpp"

namespace revel {

double lime_kernel(double distance, double sigma) {
  if (!(sigma > 0.0)) throw InvalidArgument("lime kernel width must be positive");
  if (!(distance >= 0.0)) throw InvalidArgument("distance must be non-negative");
  return std::exp(-(distance * distance) / (sigma * sigma));
}

double shap_kernel(std::size_t features, std::size_t present) {
  if (present > features) throw InvalidArgument("coalition larger than the feature set");
  if (present == 0 || present == features) return kShapSurrogateWeight;
  const double f = static_cast<double>(features);
  const double k = static_cast<double>(present);
  // log-binomial keeps F in the hundreds finite.
  const double log_binom = std::lgamma(f + 1.0) - std::lgamma(k + 1.0) - std::lgamma(f - k + 1.0);
  return (f - 1.0) / (std::exp(log_binom) * (f - k) * k);
}

namespace {

std::string format_real(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

double parse_sigma(std::string_view name, std::string_view text) {
  double sigma = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), sigma);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !(sigma > 0.0) ||
      !std::isfinite(sigma)) {
    throw ConfigError("method '" + std::string(name) + "' needs a positive sigma");
  }
  return sigma;
}

}  // namespace

MethodSpec MethodSpec::lime(double sigma, double alpha) {
  if (!(sigma > 0.0)) throw InvalidArgument("lime sigma must be positive");
  return {SamplerKind::lime, {KernelSpec::Kind::lime, sigma, alpha}};
}

MethodSpec MethodSpec::shap_global(double alpha) {
  return {SamplerKind::shap_global, {KernelSpec::Kind::shap, 0.0, alpha}};
}

MethodSpec MethodSpec::shap_local(double alpha) {
  return {SamplerKind::shap_local, {KernelSpec::Kind::shap, 0.0, alpha}};
}

MethodSpec MethodSpec::shap_exact(double alpha) {
  return {SamplerKind::exhaustive, {KernelSpec::Kind::shap, 0.0, alpha}};
}

MethodSpec MethodSpec::lime_exhaustive(double sigma, double alpha) {
  if (!(sigma > 0.0)) throw InvalidArgument("lime sigma must be positive");
  return {SamplerKind::exhaustive, {KernelSpec::Kind::lime, sigma, alpha}};
}

MethodSpec MethodSpec::parse(std::string_view name) {
  const bool exact = name == "shap-exact";
  return parse(name, exact ? kDefaultExactAlpha : kDefaultAlpha);
}

MethodSpec MethodSpec::parse(std::string_view name, double alpha) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("ridge alpha must be >= 0");
  if (name == "shap-global") return shap_global(alpha);
  if (name == "shap-local") return shap_local(alpha);
  if (name == "shap-exact") return shap_exact(alpha);
  constexpr std::string_view lime_prefix = "lime:";
  constexpr std::string_view exhaustive_prefix = "lime-exhaustive:";
  if (name.starts_with(exhaustive_prefix)) {
    return lime_exhaustive(parse_sigma(name, name.substr(exhaustive_prefix.size())), alpha);
  }
  if (name.starts_with(lime_prefix)) {
    return lime(parse_sigma(name, name.substr(lime_prefix.size())), alpha);
  }
  throw ConfigError("unknown method '" + std::string(name) + "'");
}

std::string MethodSpec::name() const {
  const bool lime_kernel = kernel.kind == KernelSpec::Kind::lime;
  switch (sampler) {
    case SamplerKind::lime: return "lime:" + format_real(kernel.sigma);
    case SamplerKind::shap_global: return "shap-global";
    case SamplerKind::shap_local: return "shap-local";
    case SamplerKind::exhaustive:
      return lime_kernel ? "lime-exhaustive:" + format_real(kernel.sigma) : "shap-exact";
  }
  return "unknown";
}

}  // namespace revel
