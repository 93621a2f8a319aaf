#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace surprisenet {

// Generator identity recorded in every run manifest. Streams are pure
// functions of (seed, counter), so seeds stay portable across builds.
inline constexpr const char* kPrngName = "splitmix64-v1";

// Counter-based splitmix64. next_u64() returns mix(seed + (i+1)*GOLDEN)
// for i = 0, 1, 2, ...
class Rng {
 public:
  explicit Rng(uint64_t seed) : seed_(seed) {}

  // Domain-separated substream: FNV-1a of the tag folded into the seed.
  static Rng derive(uint64_t seed, std::string_view stream) {
    uint64_t h = 1469598103934665603ull;
    for (char c : stream) {
      h ^= static_cast<uint8_t>(c);
      h *= 1099511628211ull;
    }
    return Rng(mix(seed ^ h));
  }

  uint64_t next_u64() {
    counter_ += 1;
    return mix(seed_ + counter_ * 0x9E3779B97F4A7C15ull);
  }

  // [0, 1)
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  float uniform(float lo, float hi) {
    return lo + static_cast<float>(next_double()) * (hi - lo);
  }

  // next_u64() % n; bias is below 2^-64 * n and irrelevant at our ranges.
  uint64_t bounded(uint64_t n) { return next_u64() % n; }

  // Box-Muller with u1 in (0, 1]; second sample of the pair is cached.
  float normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    double u2 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    cached_ = static_cast<float>(r * std::sin(a));
    have_cached_ = true;
    return static_cast<float>(r * std::cos(a));
  }

  // Fisher-Yates, descending index, j = bounded(i + 1).
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(bounded(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  static uint64_t mix(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  uint64_t seed_ = 0;
  uint64_t counter_ = 0;
  bool have_cached_ = false;
  float cached_ = 0.f;
};

}  // namespace surprisenet
