#pragma once

// Counter-based random numbers. Every draw is a pure function of
// (seed, purpose, substream, index), so results never depend on the order in
// which worker threads consume them.

#include <array>
#include <cstdint>

namespace specdn::rng {

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

// Philox4x32 with 10 rounds (Salmon et al., Random123).
Counter philox4x32_10(Counter counter, Key key) noexcept;

enum class Purpose : std::uint32_t {
  gamma_driver = 1,
  price_increments = 2,
  noise = 3,
  orthogonal = 4,
  spectrum = 5,
  equalize = 6,
  validation = 7,
  test = 100,
};

class Stream {
 public:
  Stream(std::uint64_t seed, Purpose purpose, std::uint32_t substream = 0) noexcept;

  // Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform(std::uint64_t index) const noexcept;
  // Standard normal; indices 2j and 2j+1 are the Box-Muller pair of block j.
  double normal(std::uint64_t index) const noexcept;

  std::array<double, 2> normal_pair(std::uint64_t block) const noexcept;

 private:
  std::array<double, 2> uniform_pair(std::uint64_t block) const noexcept;

  Key key_;
  std::uint32_t purpose_;
  std::uint32_t substream_;
};

}  // namespace specdn::rng
