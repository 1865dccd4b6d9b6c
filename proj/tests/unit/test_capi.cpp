#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>

#include "specdn/specdn.h"

TEST_CASE("measure handles") {
  const double eig[] = {2.0, 1.0, 1.0, 4.0};
  specdn_measure* m = nullptr;
  REQUIRE(specdn_measure_from_eigenvalues(eig, 4, &m) == SPECDN_OK);
  CHECK(specdn_measure_size(m) == 3);
  double loc[3], w[3];
  CHECK(specdn_measure_atoms(m, loc, w, 3) == SPECDN_OK);
  CHECK(loc[0] == 1.0);
  CHECK(w[0] == doctest::Approx(0.5));
  double cdf = 0;
  CHECK(specdn_measure_cdf(m, 2.0, &cdf) == SPECDN_OK);
  CHECK(cdf == doctest::Approx(0.75));

  specdn_complex s{};
  CHECK(specdn_measure_stieltjes(m, {0.0, 1.0}, &s) == SPECDN_OK);
  const double expected_im = 0.5 * 1.0 / 2.0 + 0.25 * 1.0 / 5.0 + 0.25 * 1.0 / 17.0;
  CHECK(s.im == doctest::Approx(expected_im));
  CHECK(specdn_measure_stieltjes(m, {0.0, -1.0}, &s) == SPECDN_DOMAIN);

  const double l2[] = {1.0}, w2[] = {1.0};
  specdn_measure* p = nullptr;
  REQUIRE(specdn_measure_from_atoms(l2, w2, 1, &p) == SPECDN_OK);
  double d = 0;
  CHECK(specdn_kolmogorov(m, p, &d) == SPECDN_OK);
  CHECK(d == doctest::Approx(0.5));
  CHECK(specdn_wasserstein1(m, p, &d) == SPECDN_OK);
  CHECK(d == doctest::Approx(0.25 * 1.0 + 0.25 * 3.0));

  const std::string path = "specdn_capi_measure.csv";
  CHECK(specdn_measure_write_csv(m, path.c_str()) == SPECDN_OK);
  specdn_measure* back = nullptr;
  CHECK(specdn_measure_read_csv(path.c_str(), &back) == SPECDN_OK);
  CHECK(specdn_kolmogorov(m, back, &d) == SPECDN_OK);
  CHECK(d == 0.0);
  std::remove(path.c_str());

  specdn_measure_free(back);
  specdn_measure_free(p);
  specdn_measure_free(m);
}

TEST_CASE("error reporting") {
  const double l[] = {-1.0}, w[] = {1.0};
  specdn_measure* m = nullptr;
  CHECK(specdn_measure_from_atoms(l, w, 1, &m) == SPECDN_INVALID_ARGUMENT);
  CHECK(m == nullptr);
  CHECK(std::string(specdn_last_error()).find("negative") != std::string::npos);
  CHECK(specdn_measure_from_atoms(nullptr, w, 1, &m) == SPECDN_INVALID_ARGUMENT);
  CHECK(specdn_measure_read_csv("/nonexistent/specdn.csv", &m) == SPECDN_IO);
  specdn_measure_free(nullptr);
}

TEST_CASE("solvers through the c interface") {
  const double l[] = {1.0}, w[] = {1.0};
  specdn_measure* h = nullptr;
  REQUIRE(specdn_measure_from_atoms(l, w, 1, &h) == SPECDN_OK);
  specdn_solver_report r{};
  CHECK(specdn_mp_forward(h, {0.0, 1.0}, 0.5, &r) == SPECDN_OK);
  // Positive-imaginary root of 0.5 i m^2 + (i - 0.5) m + 1 = 0.
  CHECK(r.value.im > 0.0);
  const double re = r.value.re, im = r.value.im;
  const double res_re = -0.5 * 2 * re * im - im - 0.5 * re + 1.0;
  const double res_im = 0.5 * (re * re - im * im) + re - 0.5 * im;
  CHECK(std::hypot(res_re, res_im) < 1e-10);
  CHECK(specdn_solve_mA(h, {0.0, 2.0}, 0.0, 0.5, &r) == SPECDN_OK);
  CHECK(r.value.re == doctest::Approx(1.0 / 5.0));
  CHECK(r.value.im == doctest::Approx(2.0 / 5.0));
  CHECK(r.in_domain == 1);
  CHECK(specdn_solve_mA(h, {0.0, 0.5}, 0.0, 0.5, &r) == SPECDN_DOMAIN);
  specdn_measure_free(h);
}

TEST_CASE("experiment handles") {
  specdn_experiment* e = nullptr;
  CHECK(specdn_experiment_parse(R"({"estimators": {"alpha": 0.4}})", &e) == SPECDN_CONFIG);
  CHECK(std::string(specdn_last_error()).find("estimators.alpha") != std::string::npos);
  CHECK(specdn_experiment_load("/nonexistent/config.json", &e) == SPECDN_IO);

  REQUIRE(specdn_experiment_parse(R"({"sim": {"p": 10, "n": 2000},
      "recovery": {"K": 20, "J_re": 3, "J_im": 3}})", &e) == SPECDN_OK);
  CHECK(specdn_experiment_set_route(e, "diagonal") == SPECDN_CONFIG);
  CHECK(specdn_experiment_set_route(e, "direct") == SPECDN_OK);
  CHECK(specdn_experiment_set_jobs(e, -1) == SPECDN_INVALID_ARGUMENT);
  CHECK(specdn_experiment_set_jobs(e, 2) == SPECDN_OK);
  CHECK(specdn_experiment_set_seed(e, 9) == SPECDN_OK);
  CHECK(specdn_experiment_set_output_dir(e, "specdn_capi_out") == SPECDN_OK);
  CHECK(specdn_experiment_run(e) == SPECDN_OK);
  specdn_measure* m = nullptr;
  CHECK(specdn_measure_read_csv("specdn_capi_out/seed_9/recovered_direct.csv", &m) == SPECDN_OK);
  specdn_measure_free(m);
  specdn_experiment_free(e);
  std::filesystem::remove_all("specdn_capi_out");
  std::string version = specdn_version();
  CHECK(!version.empty());
}
