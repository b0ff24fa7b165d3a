#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace devseq {

// All stochastic behavior flows through RngStream so runs replay bit-exactly.
// mt19937_64 output is fully specified by the standard; the mappings below
// avoid std::uniform_* distributions, whose results vary across standard
// library implementations.
class RngStream {
 public:
  static constexpr const char* kAlgorithm = "mt19937_64/u53";

  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double next_unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform in [low, high).
  double uniform(double low, double high) {
    return low + (high - low) * next_unit();
  }

  // Unbiased uniform integer in [0, n), n >= 1.
  std::uint64_t next_below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[next_below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// splitmix64 finalizer; combines an umbrella seed with a stream label.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t umbrella, std::string_view stream) {
  return mix_seed(umbrella, fnv1a64(stream));
}

}  // namespace devseq
