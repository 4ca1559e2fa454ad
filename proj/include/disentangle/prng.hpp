#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "disentangle/matrix.hpp"

namespace disentangle {

// xoshiro256** seeded through SplitMix64.
//
// Streams: stream(k) returns a copy of this generator advanced by (k + 1)
// applications of the xoshiro256 jump polynomial, i.e. (k + 1) * 2^128 draws
// ahead. Distinct streams from the same parent therefore never overlap within
// 2^128 draws.
//
// Normal variates use the basic Box-Muller transform on two uniforms
// u1 in (0, 1], u2 in [0, 1): the pair (r cos(2 pi u2), r sin(2 pi u2)) with
// r = sqrt(-2 log u1) is returned in that order, the second value cached.
class Prng {
 public:
  explicit Prng(std::uint64_t seed);

  std::uint64_t next_u64() noexcept;
  // 53-bit uniform on [0, 1).
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept;
  // Unbiased integer on [0, n) by rejection. n must be > 0.
  std::uint64_t below(std::uint64_t n) noexcept;
  double normal() noexcept;

  Prng stream(std::uint64_t k) const;
  void jump() noexcept;

  bool operator==(const Prng& other) const = default;

 private:
  std::array<std::uint64_t, 4> s_{};
  std::optional<double> spare_;
};

Matrix gauss_sample(Prng& rng, std::size_t rows, std::size_t cols);
// Throws ArgumentError unless lo < hi.
Matrix uniform_sample(Prng& rng, std::size_t rows, std::size_t cols, double lo, double hi);

// Uniformly random permutation of 0..n-1 (Fisher-Yates).
std::vector<std::size_t> permutation(Prng& rng, std::size_t n);
// Uniformly random permutation with no fixed points, by rejection over
// permutation(). Throws ArgumentError for n < 2.
std::vector<std::size_t> derangement(Prng& rng, std::size_t n);

}  // namespace disentangle
