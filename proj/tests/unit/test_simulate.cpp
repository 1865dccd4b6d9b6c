#include <doctest.h>

#include <cmath>
#include <numbers>

#include "specdn/error.hpp"
#include "specdn/simulate.hpp"

using namespace specdn;
using namespace specdn::simulate;

TEST_CASE("u-shaped mean") {
  CHECK(u_shape_mean(0.0) == doctest::Approx(2.0 * std::sqrt(0.0017)));
  CHECK(u_shape_mean(0.5) == doctest::Approx(2.0 * std::sqrt(0.0001)));
}

TEST_CASE("gamma path without diffusion follows the mean") {
  // Fast reversion and no noise: gamma tracks mu_t, whose square integrates
  // to 4 * 0.0009 (the cosine term integrates to zero).
  const VolPath a = simulate_gamma_path(23400, 2000.0, 0.0, 1);
  const VolPath b = simulate_gamma_path(23400, 2000.0, 0.0, 99);
  CHECK(a.values == b.values);
  CHECK(a.zeta == doctest::Approx(0.0036).epsilon(0.01));
  CHECK(a.values.front() == doctest::Approx(u_shape_mean(0.0)));
}

TEST_CASE("vol path validation and trapezoid integral") {
  const VolPath v = make_vol_path({1.0, 2.0, 3.0}, 5.0);
  CHECK(v.zeta == doctest::Approx(0.5 * ((1.0 + 4.0) / 2 + (4.0 + 9.0) / 2)));
  CHECK(interval_square_integral(v, 2) == doctest::Approx(0.5 * (4.0 + 9.0) / 2));
  CHECK_THROWS_AS(make_vol_path({1.0, 6.0}, 5.0), Error);
  CHECK_THROWS_AS(make_vol_path({0.0, 0.0}, 5.0), Error);
}

TEST_CASE("covolatility factor") {
  const CovolFactor f = build_covol_factor(30, Beta13{}, false, 5);
  CHECK((f.lambda * f.lambda - f.sigma_breve).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((f.sigma_breve - f.sigma_breve.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(f.esd.max_location() <= 1.0);
  double trace = f.sigma_breve.trace();
  double esd_trace = 0.0;
  for (const auto& a : f.esd.atoms()) esd_trace += 30 * a.weight * a.location;
  CHECK(trace == doctest::Approx(esd_trace));

  const CovolFactor g = build_covol_factor(30, Beta13{}, true, 5);
  CHECK(g.sigma_breve.trace() == doctest::Approx(30.0));
  const CovolFactor h = build_covol_factor(4, std::vector<double>{1, 1, 1, 1}, false, 5);
  CHECK((h.sigma_breve - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(build_covol_factor(4, std::vector<double>{1, 1}, false, 5), Error);
}

TEST_CASE("beta(1,3) spectrum mean") {
  const CovolFactor f = build_covol_factor(400, Beta13{}, false, 11);
  CHECK(f.esd.mean() == doctest::Approx(0.25).epsilon(0.12));
}

TEST_CASE("icv truth is zeta times the factor spectrum") {
  const CovolFactor f = build_covol_factor(10, Beta13{}, false, 3);
  const VolPath v = make_vol_path(std::vector<double>(101, 0.2), 1.0);
  const IcvTruth t = icv_true(f, v);
  CHECK(v.zeta == doctest::Approx(0.04));
  CHECK(t.esd.max_location() == doctest::Approx(0.04 * f.esd.max_location()));
  CHECK((t.icv - 0.04 * f.sigma_breve).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("price increments have the right covariance") {
  const int p = 3, n = 20000;
  const CovolFactor f = build_covol_factor(p, std::vector<double>{1.0, 2.0, 0.5}, false, 2);
  const VolPath v = make_vol_path(std::vector<double>(n + 1, 1.0), 2.0);
  const Eigen::MatrixXd x = simulate_prices(f, v, {}, 8);
  REQUIRE(x.cols() == n + 1);
  CHECK(x.col(0).isZero());
  Eigen::MatrixXd rcv = Eigen::MatrixXd::Zero(p, p);
  for (int i = 1; i <= n; ++i) {
    const Eigen::VectorXd d = x.col(i) - x.col(i - 1);
    rcv += d * d.transpose();
  }
  CHECK((rcv - f.sigma_breve).cwiseAbs().maxCoeff() < 0.1);

  const std::vector<double> drift{1.0, -2.0, 0.0};
  const Eigen::MatrixXd xd = simulate_prices(f, v, drift, 8);
  CHECK((xd.col(n) - x.col(n) - Eigen::Vector3d(1.0, -2.0, 0.0)).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("class C simulation is seed deterministic") {
  const CovolFactor f = build_covol_factor(5, Beta13{}, false, 1);
  const ClassCSample a = simulate_class_c(f, GammaParams{}, 500, {}, 4);
  const ClassCSample b = simulate_class_c(f, GammaParams{}, 500, {}, 4);
  CHECK(a.latent == b.latent);
  CHECK(a.vol.values == b.vol.values);
  const ClassCSample c = simulate_class_c(f, GammaParams{}, 500, {}, 5);
  CHECK(a.latent != c.latent);
}

TEST_CASE("noise models") {
  const Eigen::MatrixXd latent = Eigen::MatrixXd::Zero(2, 50001);
  NoiseSpec iid;
  iid.variances = {1e-4, 4e-4};
  const PricePanel p = add_noise(latent, iid, 3);
  CHECK(p.observed.row(0).squaredNorm() / 50001 == doctest::Approx(1e-4).epsilon(0.03));
  CHECK(p.observed.row(1).squaredNorm() / 50001 == doctest::Approx(4e-4).epsilon(0.03));

  NoiseSpec ar = iid;
  ar.model = NoiseModel::ar1;
  ar.phi = 0.5;
  const PricePanel q = add_noise(latent, ar, 3);
  const Eigen::RowVectorXd e = q.observed.row(0);
  CHECK(e.squaredNorm() / 50001 == doctest::Approx(1e-4).epsilon(0.05));
  const double lag1 = e.head(50000).dot(e.tail(50000)) / e.head(50000).squaredNorm();
  CHECK(lag1 == doctest::Approx(0.5).epsilon(0.05));
}
