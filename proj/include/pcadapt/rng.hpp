#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace pcadapt {

// FNV-1a, used for stable string -> seed derivation and file fingerprints.
inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Stable sub-stream seeds: every consumer of randomness derives its own seed
// from (root seed, purpose tag, optional index) so streams never collide.
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view tag) {
  return splitmix64(root ^ fnv1a64(tag));
}

inline std::uint64_t derive_seed(std::uint64_t root, std::string_view tag, std::uint64_t index) {
  return splitmix64(splitmix64(root ^ fnv1a64(tag)) + index);
}

inline std::uint64_t derive_seed(std::uint64_t root, std::string_view tag, std::string_view key,
                                 std::uint64_t index) {
  return splitmix64(splitmix64(root ^ fnv1a64(tag)) ^ fnv1a64(key, index + 0xcbf29ce484222325ull));
}

// Deterministic RNG with all distributions hand-rolled so results do not
// depend on the standard library's implementation-defined distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  std::uint64_t next_u64() { return engine_(); }

  // [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // [0, n), n > 0. Lemire's multiply-shift; unbiased enough for sampling work
  // and fully deterministic.
  std::size_t below(std::size_t n) {
    const auto x = next_u64();
    return static_cast<std::size_t>((static_cast<unsigned __int128>(x) * n) >> 64);
  }

  // Fisher-Yates.
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = below(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace pcadapt
