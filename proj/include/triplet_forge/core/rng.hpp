#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace tforge {

namespace detail {

inline std::uint64_t mulhilo64(std::uint64_t a, std::uint64_t b, std::uint64_t& hi) {
  const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
  hi = static_cast<std::uint64_t>(p >> 64);
  return static_cast<std::uint64_t>(p);
}

/// Philox4x64-10 block function (Salmon et al., Random123).
inline std::array<std::uint64_t, 4> philox4x64_10(std::array<std::uint64_t, 4> ctr,
                                                  std::array<std::uint64_t, 2> key) {
  constexpr std::uint64_t kM0 = 0xD2E7470EE14C6C93ull;
  constexpr std::uint64_t kM1 = 0xCA5A826395121157ull;
  constexpr std::uint64_t kW0 = 0x9E3779B97F4A7C15ull;
  constexpr std::uint64_t kW1 = 0xBB67AE8584CAA73Bull;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kW0;
      key[1] += kW1;
    }
    std::uint64_t hi0 = 0, hi1 = 0;
    const std::uint64_t lo0 = mulhilo64(kM0, ctr[0], hi0);
    const std::uint64_t lo1 = mulhilo64(kM1, ctr[2], hi1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Counter-based splittable generator.
///
/// Draw n of stream (seed, stream_id) is word n%4 of
/// Philox4x64-10(counter = {n/4, 0, stream_id, 0}, key = {seed, 0}).
/// Streams with different ids therefore never share a counter value. The
/// algorithm is frozen; tests/core/test_rng.cpp pins golden draws.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed, std::uint64_t stream_id = 0)
      : seed_(seed), stream_(stream_id) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_; }
  std::uint64_t position() const noexcept { return draws_; }

  /// Independent child stream. Derivation depends only on (stream_id, child),
  /// never on how many draws were taken from this generator.
  SeededRng split(std::uint64_t child) const {
    return SeededRng(seed_, detail::splitmix64(stream_ ^ detail::splitmix64(child + 1)));
  }

  std::uint64_t next_u64() {
    const std::uint64_t block = draws_ / 4;
    const auto word = static_cast<std::size_t>(draws_ % 4);
    if (word == 0 || block != cached_block_) {
      cache_ = detail::philox4x64_10({block, 0, stream_, 0}, {seed_, 0});
      cached_block_ = block;
    }
    ++draws_;
    return cache_[word];
  }

  /// Uniform double in [0,1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n); n > 0. Rejection sampling keeps it unbiased.
  std::uint64_t uniform_index(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % n;
  }

  /// Standard normal via Box-Muller (cosine branch only, two draws per sample).
  double normal() {
    const double u1 = 1.0 - uniform();  // (0,1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Fisher-Yates with this generator; portable across standard libraries.
  template <class T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_index(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t draws_ = 0;
  std::uint64_t cached_block_ = ~std::uint64_t{0};
  std::array<std::uint64_t, 4> cache_{};
};

}  // namespace tforge
