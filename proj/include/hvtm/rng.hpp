#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace hvtm {

// FNV-1a 64-bit. Used for seed derivation and cheap content checksums.
inline uint64_t fnv1a64(std::string_view bytes, uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// SplitMix64 finalizer; full-period bijection on 64-bit values.
inline uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline uint64_t derive_seed(uint64_t master, std::string_view tag) {
  return mix64(master ^ fnv1a64(tag));
}

inline uint64_t derive_seed(uint64_t master, std::string_view tag, uint64_t index) {
  return mix64(mix64(master ^ fnv1a64(tag)) + index);
}

// Deterministic stream over std::mt19937_64 (the engine's output sequence is
// fixed by the standard). Distribution mapping is hand-rolled because the
// stdlib distributions are implementation-defined; identical seeds must give
// identical streams on every platform.
class Prng {
 public:
  explicit Prng(uint64_t seed) : eng_(seed) {}

  uint64_t next() { return eng_(); }

  // Uniform double in [0, 1), 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // bernoulli(0) and bernoulli(1) are exact and consume no stream state.
  bool bernoulli(double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return uniform01() < p;
  }

  // Unbiased integer in [0, bound) via Lemire's method over 32-bit draws.
  uint32_t below(uint32_t bound) {
    uint64_t m = (next() & 0xffffffffull) * bound;
    auto lo = static_cast<uint32_t>(m);
    if (lo < bound) {
      uint32_t threshold = static_cast<uint32_t>((0x100000000ull - bound) % bound);
      while (lo < threshold) {
        m = (next() & 0xffffffffull) * bound;
        lo = static_cast<uint32_t>(m);
      }
    }
    return static_cast<uint32_t>(m >> 32);
  }

  // Fisher-Yates; deterministic for a given stream.
  template <class T>
  void shuffle(std::span<T> items) {
    for (size_t i = items.size(); i > 1; --i) {
      size_t j = below(static_cast<uint32_t>(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  // Failures before the next success of an independent Bernoulli(p) stream
  // (geometric jump), given the precomputed log(1 - p). Clamped to `cap`.
  // Visiting indices k, k + 1 + skip, ... touches each index with marginal
  // probability exactly p, mutually independent.
  uint32_t geometric_skip(double log1m_p, uint32_t cap) {
    if (!(log1m_p < 0.0)) return cap;  // p == 0 (or below): never succeeds
    double u = 1.0 - uniform01();      // (0, 1]
    double g = std::floor(std::log(u) / log1m_p);
    return g >= static_cast<double>(cap) ? cap : static_cast<uint32_t>(g);
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace hvtm
