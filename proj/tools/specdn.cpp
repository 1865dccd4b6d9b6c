#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "specdn/specdn.h"

namespace {

int exit_code(specdn_status status) {
  switch (status) {
    case SPECDN_OK: return 0;
    case SPECDN_CONFIG: return 2;
    case SPECDN_SOLVER_THRESHOLD: return 3;
    default: return 1;
  }
}

int report(specdn_status status) {
  if (status != SPECDN_OK) std::fprintf(stderr, "specdn: %s\n", specdn_last_error());
  return exit_code(status);
}

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> route;
  std::optional<int> jobs;
  bool drop_degenerate = false;
};

specdn_status apply(specdn_experiment* e, const Overrides& o) {
  specdn_status s = SPECDN_OK;
  if (o.seed) s = specdn_experiment_set_seed(e, *o.seed);
  if (s == SPECDN_OK && o.out) s = specdn_experiment_set_output_dir(e, o.out->c_str());
  if (s == SPECDN_OK && o.route) s = specdn_experiment_set_route(e, o.route->c_str());
  if (s == SPECDN_OK && o.drop_degenerate) s = specdn_experiment_set_drop_degenerate(e, 1);
  if (s == SPECDN_OK) {
    int jobs = 0;
    if (o.jobs) {
      jobs = *o.jobs;
    } else if (const char* env = std::getenv("SPECDN_JOBS")) {
      try {
        jobs = std::stoi(env);
      } catch (const std::exception&) {
        jobs = -1;
      }
    }
    if (o.jobs || std::getenv("SPECDN_JOBS")) s = specdn_experiment_set_jobs(e, jobs);
  }
  return s;
}

int run_command(const std::string& path, const Overrides& o, bool validate) {
  specdn_experiment* e = nullptr;
  specdn_status s = specdn_experiment_load(path.c_str(), &e);
  if (s == SPECDN_OK) s = apply(e, o);
  int code = report(s);
  if (code == 0 && !validate) {
    code = report(specdn_experiment_run(e));
  } else if (code == 0) {
    std::vector<char> table(1 << 14);
    int failures = 0;
    s = specdn_experiment_validate(e, table.data(), table.size(), &failures);
    code = report(s);
    if (code == 0) {
      std::fputs(table.data(), stdout);
      if (failures > 0) code = 3;
    }
  }
  specdn_experiment_free(e);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral distribution recovery from noisy high-frequency data"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides overrides;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config_path, "JSON experiment configuration")->required();
    sub->add_option_function<std::uint64_t>("--seed", [&](std::uint64_t v) { overrides.seed = v; },
                                            "Run a single seed");
    sub->add_option_function<int>("--jobs", [&](int v) { overrides.jobs = v; },
                                  "Worker threads (default: SPECDN_JOBS or all processors)")
        ->check(CLI::NonNegativeNumber);
  };

  CLI::App* run = app.add_subcommand("run", "Simulate, estimate and recover");
  add_common(run);
  run->add_option_function<std::string>("--out", [&](const std::string& v) { overrides.out = v; },
                                        "Output directory");
  run->add_option_function<std::string>("--route", [&](const std::string& v) { overrides.route = v; },
                                        "two_step, direct or both");
  run->add_flag("--drop-degenerate", overrides.drop_degenerate,
                "Skip zero pre-averaged returns instead of failing");

  CLI::App* validate = app.add_subcommand("validate", "Run the numerical self-checks");
  add_common(validate);

  app.add_subcommand("version", "Print the library version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (app.got_subcommand("version")) {
    std::printf("specdn %s\n", specdn_version());
    return 0;
  }
  return run_command(config_path, overrides, app.got_subcommand("validate"));
}
