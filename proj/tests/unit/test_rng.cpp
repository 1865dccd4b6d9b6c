#include <doctest.h>

#include <cmath>

#include "specdn/rng.hpp"

using namespace specdn::rng;

// Known-answer vectors published with the reference Philox implementation.
TEST_CASE("philox4x32-10 known answers") {
  CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) ==
        Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                      {0xffffffffu, 0xffffffffu}) ==
        Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                      {0xa4093822u, 0x299f31d0u}) ==
        Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are pure functions of their keys") {
  const Stream a(7, Purpose::noise, 3);
  const Stream b(7, Purpose::noise, 3);
  const Stream c(7, Purpose::noise, 4);
  const Stream d(8, Purpose::noise, 3);
  CHECK(a.uniform(12345) == b.uniform(12345));
  CHECK(a.uniform(12345) != c.uniform(12345));
  CHECK(a.uniform(12345) != d.uniform(12345));
  CHECK(a.normal(11) == a.normal_pair(5)[1]);
}

TEST_CASE("uniform and normal moments") {
  const Stream s(42, Purpose::test);
  const int n = 200000;
  double su = 0, sn = 0, sn2 = 0, lo = 1, hi = 0;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform(static_cast<std::uint64_t>(i));
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    su += u;
    const double z = s.normal(static_cast<std::uint64_t>(i));
    sn += z;
    sn2 += z * z;
  }
  CHECK(lo > 0.0);
  CHECK(hi < 1.0);
  CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(std::abs(sn / n) < 0.01);
  CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.02));
}
