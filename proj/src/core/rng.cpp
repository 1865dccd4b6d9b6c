#include "specdn/rng.hpp"

#include <cmath>
#include <numbers>

namespace specdn::rng {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) noexcept {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

// Maps 64 random bits to (0, 1) without ever producing 0 or 1.
inline double to_open_unit(std::uint32_t hi, std::uint32_t lo) noexcept {
  const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32) | lo;
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

Counter philox4x32_10(Counter ctr, Key key) noexcept {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

Stream::Stream(std::uint64_t seed, Purpose purpose, std::uint32_t substream) noexcept
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      purpose_(static_cast<std::uint32_t>(purpose)),
      substream_(substream) {}

std::array<double, 2> Stream::uniform_pair(std::uint64_t block) const noexcept {
  const Counter out = philox4x32_10(
      {static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
       substream_, purpose_},
      key_);
  return {to_open_unit(out[0], out[1]), to_open_unit(out[2], out[3])};
}

double Stream::uniform(std::uint64_t index) const noexcept {
  return uniform_pair(index)[0];
}

std::array<double, 2> Stream::normal_pair(std::uint64_t block) const noexcept {
  const auto [u1, u2] = uniform_pair(block);
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

double Stream::normal(std::uint64_t index) const noexcept {
  return normal_pair(index >> 1)[index & 1u];
}

}  // namespace specdn::rng
