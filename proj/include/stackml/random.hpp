#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace stackml {

// Mixes a base seed with a stream identifier (tree index, fold index, node
// position, ...) into an independent 64-bit seed. SplitMix64 finalizer.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// Platform-deterministic generator. std::mt19937_64 output is fixed by the
// standard; the distributions here are written out so that results do not
// depend on the standard library implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform();

  // Uniform in the open interval (lo, hi); lo < hi.
  double uniform_open(double lo, double hi);

  // Uniform integer in [0, bound); bound > 0. Rejection sampling, unbiased.
  std::uint64_t below(std::uint64_t bound);

  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

  template <typename T>
  void shuffle(std::vector<T>& values) {
    shuffle(std::span<T>(values));
  }

 private:
  std::mt19937_64 engine_;
};

// Draws `count` distinct values from [0, n) and returns them sorted.
// count >= n returns 0..n-1 without consuming randomness.
std::vector<int> sample_without_replacement(Rng& rng, int n, int count);

}  // namespace stackml
