#pragma once

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

namespace hexflood {

// SplitMix64. The stream and the shuffle below are fully specified so any
// port reproduces the same update order for a given seed.
class Rng {
public:
  explicit constexpr Rng(std::uint64_t seed = 0) : state_(seed) {}

  constexpr std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, bound) by masked rejection; bound must be > 0.
  constexpr std::uint64_t bounded(std::uint64_t bound) {
    std::uint64_t mask = bound - 1;
    mask |= mask >> 1;
    mask |= mask >> 2;
    mask |= mask >> 4;
    mask |= mask >> 8;
    mask |= mask >> 16;
    mask |= mask >> 32;
    for (;;) {
      const std::uint64_t x = next() & mask;
      if (x < bound) return x;
    }
  }

  constexpr std::uint64_t state() const { return state_; }

private:
  std::uint64_t state_;
};

// Fisher-Yates from the back: for i = n-1 .. 1, swap(a[i], a[bounded(i+1)]).
template <typename T>
void shuffle_in_place(Rng& rng, std::span<T> items) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.bounded(i));
    std::swap(items[i - 1], items[j]);
  }
}

// Permutation of 0..n-1.
inline std::vector<std::size_t> shuffle(Rng& rng, std::size_t n) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  shuffle_in_place(rng, std::span<std::size_t>(perm));
  return perm;
}

}  // namespace hexflood
