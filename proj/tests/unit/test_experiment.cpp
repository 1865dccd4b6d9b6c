#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "specdn/error.hpp"
#include "specdn/experiment.hpp"

using namespace specdn;
using namespace specdn::experiment;
namespace fs = std::filesystem;

namespace {

const char* kSmall = R"({
  "sim": {"p": 20, "n": 4000, "gamma": {"rho": 10, "sigma_ou": 0.05},
          "spectrum": "beta13", "noise": {"model": "iid", "variance": 2e-4}},
  "estimators": {"theta_pav": 0.5, "theta_bm": 1.5, "alpha": 0.6},
  "recovery": {"K": 30, "J_re": 4, "J_im": 4, "route": "both"},
  "replication": {"seeds": [1, 2]}
})";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::config);
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("defaults and overrides") {
  const ExperimentConfig c = parse_config("{}");
  CHECK(c.sim.p == 100);
  CHECK(c.sim.n == 23400);
  CHECK(c.recovery.k == 100);
  CHECK(c.recovery.route == Route::both);
  const ExperimentConfig s = parse_config(kSmall);
  CHECK(s.sim.p == 20);
  CHECK(s.seeds == std::vector<std::uint64_t>{1, 2});
  const ExperimentConfig id = parse_config(R"({"sim": {"p": 3, "spectrum": "identity", "drift": 0.5}})");
  CHECK(std::get<std::vector<double>>(id.sim.spectrum) == std::vector<double>{1, 1, 1});
  CHECK(id.sim.drift == std::vector<double>{0.5, 0.5, 0.5});
}

TEST_CASE("config errors name the field") {
  CHECK(config_error(R"({"estimators": {"alpha": 0.5}})").find("estimators.alpha") != std::string::npos);
  CHECK(config_error(R"({"sim": {"gamma": {"rhoo": 1}}})").find("sim.gamma.rhoo") != std::string::npos);
  CHECK(config_error(R"({"recovery": {"route": "sideways"}})").find("recovery.route") != std::string::npos);
  CHECK(config_error(R"({"recovery": {"im_range": [0.5, 2]}})").find("recovery.im_range") != std::string::npos);
  CHECK(config_error(R"({"sim": {"p": 3, "spectrum": [1, 2]}})").find("sim.spectrum") != std::string::npos);
  CHECK(config_error(R"({"replication": {"seeds": []}})").find("replication.seeds") != std::string::npos);
  CHECK(config_error("{not json").find("config") != std::string::npos);
  // The direct-route exponent does not matter when only the two-step route runs.
  CHECK_NOTHROW(parse_config(R"({"estimators": {"alpha": 0.5}, "recovery": {"route": "two_step"}})"));
}

TEST_CASE("small experiment writes consistent artifacts") {
  ExperimentConfig c = parse_config(kSmall);
  c.output_dir = fs::temp_directory_path() / "specdn_experiment_small";
  fs::remove_all(c.output_dir);
  c.jobs = 1;
  const auto results = run_experiment(c);
  REQUIRE(results.size() == 2);
  for (const char* f : {"esd_icv.csv", "esd_pav.csv", "esd_bm.csv", "esd_Am.csv", "recovered_step1.csv",
                        "recovered_two_step.csv", "recovered_direct.csv", "recovery_report.json"})
    CHECK(fs::exists(c.output_dir / "seed_1" / f));

  std::ifstream summary(c.output_dir / "summary.csv");
  std::string line;
  std::getline(summary, line);
  CHECK(line == "seed,route,kolmogorov,wasserstein1,baseline_kolmogorov");
  int rows = 0;
  while (std::getline(summary, line)) {
    std::stringstream ss(line);
    std::string seed, route, ks, w1;
    std::getline(ss, seed, ',');
    std::getline(ss, route, ',');
    std::getline(ss, ks, ',');
    std::getline(ss, w1, ',');
    const fs::path dir = c.output_dir / ("seed_" + seed);
    const auto recovered = measures::read_csv(dir / ("recovered_" + route + ".csv"));
    const auto target = measures::read_csv(dir / (route == "step1" ? "esd_Am.csv" : "esd_icv.csv"));
    CHECK(std::stod(ks) == doctest::Approx(measures::kolmogorov_distance(recovered, target)).epsilon(1e-12));
    CHECK(std::stod(w1) == doctest::Approx(measures::wasserstein1_distance(recovered, target)).epsilon(1e-9));
    ++rows;
  }
  CHECK(rows == 6);

  ExperimentConfig parallel = c;
  parallel.output_dir = fs::temp_directory_path() / "specdn_experiment_small_parallel";
  fs::remove_all(parallel.output_dir);
  parallel.jobs = 4;
  run_experiment(parallel);
  for (const auto& entry : fs::recursive_directory_iterator(c.output_dir)) {
    if (!entry.is_regular_file() || entry.path().filename() == "timing.csv") continue;
    const fs::path rel = fs::relative(entry.path(), c.output_dir);
    CHECK_MESSAGE(slurp(entry.path()) == slurp(parallel.output_dir / rel), rel.string());
  }
  fs::remove_all(c.output_dir);
  fs::remove_all(parallel.output_dir);
}

TEST_CASE("single-route runs and estimated gamma") {
  ExperimentConfig c = parse_config(kSmall);
  c.recovery.route = Route::direct;
  SeedOutcome d = run_seed(c, 3, 1);
  CHECK(!d.two_step);
  CHECK(d.direct);
  REQUIRE(d.routes.size() == 1);
  CHECK(d.routes[0].route == "direct");

  c.recovery.route = Route::two_step;
  c.recovery.gamma_mode = GammaMode::estimated;
  SeedOutcome t = run_seed(c, 3, 2);
  CHECK(t.two_step);
  CHECK(!t.direct);
  CHECK(t.routes.size() == 2);
}

TEST_CASE("validation table") {
  ValidationSettings s;
  s.ladder = {20, 40};
  s.mp_cases = 5;
  s.lp_cases = 3;
  const auto checks = run_validation(s, 1, 2);
  CHECK(checks.size() == 5);
  const std::string table = format_validation(checks);
  CHECK(table.find("mp forward vs closed form") != std::string::npos);
  CHECK(table.find("lp vs grid search") != std::string::npos);
}
