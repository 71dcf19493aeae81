#pragma once

#include <cstdint>
#include <string_view>

namespace modcb {

/// Deterministic counter-based random stream.
///
/// Output i is a pure mixing function of (base, i), where the base is derived
/// by hashing a 64-bit master seed together with a textual tag.  Consequences:
///  - identical (master_seed, tag) pairs replay the exact same stream on any
///    platform (no reliance on std::distribution internals), and
///  - substreams with distinct tags are independent of the order in which
///    they are created or consumed.
class RngStream {
 public:
  RngStream() = default;
  RngStream(std::uint64_t master_seed, std::string_view tag);

  /// Next raw 64-bit output.
  std::uint64_t next_u64();

  /// Uniform double in [0, 1) with 53 bits of precision.
  double next_uniform();

  /// Standard normal deviate via Box-Muller (deterministic, internally
  /// caches the second member of each generated pair).
  double next_gaussian();

  /// Uniform integer in [0, n), n >= 1.
  std::uint32_t next_below(std::uint32_t n);

  /// Bernoulli draw with success probability p (clamped to [0,1]).
  bool next_bernoulli(double p);

 private:
  std::uint64_t base_ = 0;
  std::uint64_t counter_ = 0;
  double cached_gaussian_ = 0.0;
  bool has_cached_gaussian_ = false;
};

/// Derives an independent substream from (master_seed, tag).  Pure function:
/// reordering derivations never changes any stream's contents.
RngStream derive_substream(std::uint64_t master_seed, std::string_view tag);

}  // namespace modcb
