#pragma once

#include <cstdint>
#include <random>

namespace bggm {

/// Derives an independent stream seed from a base seed and a stream id.
/// Distinct ids give decorrelated streams, so adding subjects to a scenario
/// never reshuffles the streams of earlier subjects.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream_id);

/// Seeded random stream with platform-stable transforms. All draws go
/// through explicit integer-to-double conversions rather than
/// std::*_distribution, so the same seed yields the same sequence on every
/// standard library.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform();

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi);

  /// Uniform on [-hi, -lo] or [lo, hi], each half with probability 1/2.
  double signed_uniform(double lo, double hi);

  /// Standard normal via Box-Muller (no cached spare).
  double normal();

  /// Uniform integer in [0, n); n must be positive. Rejection sampling,
  /// exactly uniform.
  std::int64_t uniform_int(std::int64_t n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace bggm
