#include "modcb/rng.hpp"

#include <cmath>

namespace modcb {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

/// Finalizer from the splitmix64 generator; a strong 64-bit mixing function.
std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// FNV-1a hash of the tag bytes, used to separate substreams.
std::uint64_t hash_tag(std::string_view tag) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace

RngStream::RngStream(std::uint64_t master_seed, std::string_view tag)
    : base_(mix64(mix64(master_seed + kGolden) ^ hash_tag(tag))) {}

std::uint64_t RngStream::next_u64() {
  ++counter_;
  return mix64(base_ + counter_ * kGolden);
}

double RngStream::next_uniform() {
  // 53-bit mantissa; result in [0, 1).
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::next_gaussian() {
  if (has_cached_gaussian_) {
    has_cached_gaussian_ = false;
    return cached_gaussian_;
  }
  // Box-Muller on two fresh uniforms; guard against log(0).
  double u1 = next_uniform();
  while (u1 <= 0.0) u1 = next_uniform();
  const double u2 = next_uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * M_PI * u2;
  cached_gaussian_ = r * std::sin(angle);
  has_cached_gaussian_ = true;
  return r * std::cos(angle);
}

std::uint32_t RngStream::next_below(std::uint32_t n) {
  // Multiply-shift map of a 64-bit draw onto [0, n); bias is O(n / 2^64).
  return static_cast<std::uint32_t>(
      (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
}

bool RngStream::next_bernoulli(double p) {
  if (p <= 0.0) {
    next_uniform();  // keep the draw count independent of p
    return false;
  }
  if (p >= 1.0) {
    next_uniform();
    return true;
  }
  return next_uniform() < p;
}

RngStream derive_substream(std::uint64_t master_seed, std::string_view tag) {
  return RngStream(master_seed, tag);
}

}  // namespace modcb
