#pragma once

#include "petrels/types.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace petrels {

// Every random draw in the toolkit comes from an mt19937_64 engine whose seed
// is derived from (seed, stream, index) by a SplitMix64 hash chain. A draw for
// time index t therefore never depends on how many draws preceded it.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

namespace rng_stream {
inline constexpr std::uint64_t kSubspace = 0x5355425350414345ULL;
inline constexpr std::uint64_t kSample = 0x53414d504c450000ULL;
inline constexpr std::uint64_t kInit = 0x494e495400000000ULL;
inline constexpr std::uint64_t kColumns = 0x434f4c554d4e5300ULL;
inline constexpr std::uint64_t kScales = 0x5343414c45530000ULL;
inline constexpr std::uint64_t kMatrix = 0x4d41545249580000ULL;
}  // namespace rng_stream

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index)
      : engine_(derive_seed(seed, stream, index)) {}

  double normal() { return normal_(engine_); }
  double uniform01() { return uniform_(engine_); }
  std::uint64_t below(std::uint64_t bound) {
    return std::uniform_int_distribution<std::uint64_t>(0, bound - 1)(engine_);
  }

  /// Circularly symmetric complex Gaussian with E|z|^2 = 1.
  Complex complex_normal();

  template <typename S>
  S standard() {
    if constexpr (is_complex_v<S>) {
      return complex_normal();
    } else {
      return normal();
    }
  }

  template <typename S>
  Mat<S> gaussian(Index rows, Index cols) {
    Mat<S> out(rows, cols);
    for (Index j = 0; j < cols; ++j) {
      for (Index i = 0; i < rows; ++i) out(i, j) = standard<S>();
    }
    return out;
  }

  /// K distinct indices drawn uniformly from [0, n), returned sorted.
  std::vector<Index> choose(Index n, Index k);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace petrels
