#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "specdn/error.hpp"
#include "specdn/measures.hpp"

using namespace specdn;
using namespace specdn::measures;
using cplx = std::complex<double>;

TEST_CASE("canonical form sorts and merges atoms") {
  const auto m = DiscreteMeasure::from_atoms({{2.0, 0.25}, {1.0, 0.5}, {2.0, 0.25}});
  REQUIRE(m.size() == 2);
  CHECK(m.atoms()[0].location == 1.0);
  CHECK(m.atoms()[1].weight == doctest::Approx(0.5));
  CHECK(m.mean() == doctest::Approx(1.5));
}

TEST_CASE("invalid atoms are rejected") {
  CHECK_THROWS_AS(DiscreteMeasure::from_atoms({}), Error);
  CHECK_THROWS_AS(DiscreteMeasure::from_atoms({{-1.0, 1.0}}), Error);
  CHECK_THROWS_AS(DiscreteMeasure::from_atoms({{1.0, 0.5}}), Error);
  CHECK_THROWS_AS(DiscreteMeasure::from_atoms({{1.0, -0.5}, {2.0, 1.5}}), Error);
}

TEST_CASE("esd clamps tiny negative eigenvalues only") {
  const std::vector<double> ok{-1e-14, 1.0, 2.0};
  CHECK(esd_from_eigenvalues(ok, 3).min_location() == 0.0);
  const std::vector<double> bad{-1e-3, 1.0, 2.0};
  CHECK_THROWS_AS(esd_from_eigenvalues(bad, 3), Error);
}

TEST_CASE("stieltjes transform of atoms") {
  const cplx z{0.3, 1.7};
  CHECK(std::abs(stieltjes(DiscreteMeasure::point_mass(2.0), z) - 1.0 / (2.0 - z)) < 1e-15);
  const auto m = DiscreteMeasure::from_atoms({{1.0, 0.25}, {3.0, 0.75}});
  CHECK(std::abs(stieltjes(m, z) - (0.25 / (1.0 - z) + 0.75 / (3.0 - z))) < 1e-15);
  CHECK_THROWS_AS(stieltjes(m, cplx{1.0, -1.0}), Error);
}

TEST_CASE("cdf and distances by hand") {
  const std::vector<double> la{1.0, 2.0}, lb{1.0, 3.0};
  const auto a = DiscreteMeasure::uniform(la);
  const auto b = DiscreteMeasure::uniform(lb);
  CHECK(cdf_eval(a, 0.5) == 0.0);
  CHECK(cdf_eval(a, 1.0) == doctest::Approx(0.5));
  CHECK(cdf_eval(a, 2.5) == doctest::Approx(1.0));
  CHECK(kolmogorov_distance(a, b) == doctest::Approx(0.5));
  CHECK(wasserstein1_distance(a, b) == doctest::Approx(0.5));
  CHECK(kolmogorov_distance(DiscreteMeasure::point_mass(1.0), DiscreteMeasure::point_mass(2.0)) ==
        doctest::Approx(1.0));
  CHECK(wasserstein1_distance(DiscreteMeasure::point_mass(1.0), DiscreteMeasure::point_mass(4.0)) ==
        doctest::Approx(3.0));
}

TEST_CASE("scaling and the best-scaled distance") {
  const std::vector<double> loc{0.5, 1.0, 4.0};
  const auto a = DiscreteMeasure::uniform(loc);
  const auto b = scale_measure(a, 2.5);
  CHECK(b.max_location() == doctest::Approx(10.0));
  CHECK(kolmogorov_distance(a, b) > 0.3);
  CHECK(best_scaled_kolmogorov_distance(a, b) == doctest::Approx(0.0).epsilon(1e-12));
  // Two atoms against one: the best any scaling can do is to cover one half.
  const std::vector<double> two{1.0, 2.0};
  CHECK(best_scaled_kolmogorov_distance(DiscreteMeasure::uniform(two), DiscreteMeasure::point_mass(3.0)) ==
        doctest::Approx(0.5));
}

TEST_CASE("csv round trip is exact") {
  const auto m = DiscreteMeasure::from_atoms({{0.1, 1.0 / 3.0}, {0.7, 2.0 / 3.0}});
  const std::string text = to_csv(m);
  CHECK(text.rfind("location,weight\n", 0) == 0);
  const auto path = std::filesystem::temp_directory_path() / "specdn_measure_roundtrip.csv";
  write_csv(m, path);
  const auto back = read_csv(path);
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(back.atoms()[i].location == m.atoms()[i].location);
    CHECK(back.atoms()[i].weight == m.atoms()[i].weight);
  }
  std::ofstream(path) << "x,y\n1,1\n";
  CHECK_THROWS_AS(read_csv(path), Error);
  std::filesystem::remove(path);
}
