#include <doctest.h>

#include <cmath>

#include "specdn/error.hpp"
#include "specdn/rng.hpp"
#include "specdn/solvers.hpp"

using namespace specdn;
using namespace specdn::solvers;
using measures::DiscreteMeasure;

namespace {

// Root with positive imaginary part of y z m^2 + (z + y - 1) m + 1 = 0.
cplx mp_unit_root(double y, cplx z) {
  const cplx a = y * z, b = z + y - 1.0;
  const cplx d = std::sqrt(b * b - 4.0 * a);
  const cplx r1 = (-b + d) / (2.0 * a), r2 = (-b - d) / (2.0 * a);
  return r1.imag() > r2.imag() ? r1 : r2;
}

DiscreteMeasure sample_measure() {
  return DiscreteMeasure::from_atoms({{0.2, 0.3}, {1.0, 0.5}, {2.5, 0.2}});
}

}  // namespace

TEST_CASE("noiseless inversion returns the transform itself") {
  const DiscreteMeasure f = sample_measure();
  for (cplx z : {cplx{-3.0, 1.0}, cplx{0.0, 2.0}, cplx{-10.0, 15.0}}) {
    const SolverReport r = solve_mA(f, z, {0.0, 0.7});
    CHECK(std::abs(r.value - measures::stieltjes(f, z)) < 1e-12);
    CHECK(r.in_domain);
  }
}

TEST_CASE("noisy inversion is a certified fixed point") {
  const DiscreteMeasure f = sample_measure();
  const NoisyInversionParams params{0.6, 0.65};
  for (cplx z : {cplx{-5.0, 1.0}, cplx{-1.0, 3.0}, cplx{0.0, 8.0}}) {
    const SolverReport r = solve_mA(f, z, params);
    CHECK(std::abs(noisy_inversion_map(f, z, params, r.value) - r.value) < 1e-10);
    CHECK(r.in_domain == in_noisy_inversion_domain(z, params, r.value));
    CHECK(r.value.imag() > 0.0);
  }
  CHECK_THROWS_AS(solve_mA(f, cplx{0.0, 0.5}, params), Error);
}

TEST_CASE("marcenko-pastur forward map at a unit point mass") {
  const cplx z{0.0, 1.0};
  const SolverReport r = mp_forward(DiscreteMeasure::point_mass(1.0), z, 0.5);
  CHECK(std::abs(r.value - mp_unit_root(0.5, z)) < 1e-10);
  CHECK(std::abs(mp_point_mass_closed_form(1.0, 0.5, z) - mp_unit_root(0.5, z)) < 1e-12);
}

TEST_CASE("marcenko-pastur scaling law over random cases") {
  // m_{delta_c, y}(z) = (1/c) m_{delta_1, y}(z / c).
  const rng::Stream s(17, rng::Purpose::test);
  for (int i = 0; i < 20; ++i) {
    const auto b = static_cast<std::uint64_t>(4 * i);
    const double c = 0.5 + 3.5 * s.uniform(b);
    const double y = 0.1 + 4.9 * s.uniform(b + 1);
    const cplx z{-5.0 + 10.0 * s.uniform(b + 2), 1.0 + 9.0 * s.uniform(b + 3)};
    const cplx expected = mp_unit_root(y, z / c) / c;
    CHECK(std::abs(mp_forward(DiscreteMeasure::point_mass(c), z, y).value - expected) < 1e-9);
    CHECK(std::abs(mp_point_mass_closed_form(c, y, z) - expected) < 1e-9);
  }
}

TEST_CASE("marcenko-pastur output bounds") {
  const DiscreteMeasure h = sample_measure();
  for (cplx z : {cplx{-2.0, 0.5}, cplx{1.0, 1.0}, cplx{3.0, 4.0}}) {
    const SolverReport r = mp_forward(h, z, 1.7);
    CHECK(r.value.imag() > 0.0);
    CHECK(std::abs(r.value) <= 1.0 / z.imag() + 1e-12);
    CHECK(std::abs(mp_map(h, z, 1.7, r.value) - r.value) < 1e-12);
  }
}

TEST_CASE("volatility reduction inverts its forward system") {
  const DiscreteMeasure h = DiscreteMeasure::from_atoms({{0.5, 0.5}, {1.5, 0.5}});
  std::vector<double> g(201);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = 0.1 + 0.05 * std::sin(0.03 * static_cast<double>(i));
  const simulate::VolPath gamma = simulate::make_vol_path(g, 1.0);
  const double y = 0.5;
  for (cplx z : {cplx{-2.0, 5.0}, cplx{-10.0, 2.0}, cplx{0.0, 10.0}}) {
    cplx m = -gamma.zeta / (3.0 * z);
    for (int it = 0; it < 2000; ++it)
      m = 0.5 * m + 0.5 * M_from_mtilde(mtilde_from_H(h, m, gamma.zeta, z), gamma, y, z);
    REQUIRE(std::abs(M_from_mtilde(mtilde_from_H(h, m, gamma.zeta, z), gamma, y, z) - m) < 1e-14);
    const cplx m_a = mA_from_H(h, m, gamma.zeta, z);
    const SolverReport r = solve_M(z, m_a, gamma, y);
    CHECK(std::abs(r.value - m) < 1e-9 * std::abs(m));
    CHECK(r.in_domain);
  }
}

TEST_CASE("finite-n fixed point") {
  const DiscreteMeasure f = sample_measure();
  const double sigma = 1.0, y = 0.5;
  CHECK(contraction_threshold(DiscreteMeasure::point_mass(3.0), 1.0, 0.5) ==
        doctest::Approx(4.0 * std::sqrt(6.0)));
  const double k = contraction_threshold(f, sigma, y);
  const cplx z{0.5, k + 1.0};
  const SolverReport r = solve_tn(f, z, sigma, y);
  CHECK(std::abs(tn_map(f, z, sigma, y, r.value) - r.value) < 1e-12);
  CHECK(r.in_domain);
  CHECK_THROWS_AS(solve_tn(f, cplx{0.0, 4.0}, sigma, y), Error);
  TnOptions relaxed;
  relaxed.enforce_contraction_region = false;
  const SolverReport q = solve_tn(f, cplx{0.0, 4.0}, sigma, y, relaxed);
  CHECK(std::abs(tn_map(f, cplx{0.0, 4.0}, sigma, y, q.value) - q.value) < 1e-12);
}
