#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace revel {

/// SplitMix64 finalizer. Used to mix seeds and stream ids.
std::uint64_t mix64(std::uint64_t x);

/// Combines a run seed with a list of identifiers into one stream id.
std::uint64_t derive_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> ids);

/// Reproducible random stream. The engine is mt19937_64, whose output is
/// fixed by the C++ standard; the distributions are implemented here
/// because the std ones are not portable across standard libraries.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01();

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);

  /// Uniform real in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Exponential variate with the given rate (mean 1/rate).
  double exponential(double rate);

  /// Standard normal variate (Box-Muller, one value per call).
  double normal();

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

}  // namespace revel
