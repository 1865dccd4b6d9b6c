#include "specdn/specdn.h"

#include <cstring>
#include <new>
#include <string>

#include "specdn/experiment.hpp"
#include "specdn/measures.hpp"
#include "specdn/solvers.hpp"

struct specdn_measure {
  specdn::measures::DiscreteMeasure value;
};

struct specdn_experiment {
  specdn::experiment::ExperimentConfig config;
};

namespace {

thread_local std::string last_error;

specdn_status status_of(specdn::ErrorCode code) {
  using specdn::ErrorCode;
  switch (code) {
    case ErrorCode::invalid_argument: return SPECDN_INVALID_ARGUMENT;
    case ErrorCode::domain: return SPECDN_DOMAIN;
    case ErrorCode::not_converged: return SPECDN_NOT_CONVERGED;
    case ErrorCode::degenerate: return SPECDN_DEGENERATE;
    case ErrorCode::config: return SPECDN_CONFIG;
    case ErrorCode::io: return SPECDN_IO;
    case ErrorCode::solver_threshold: return SPECDN_SOLVER_THRESHOLD;
  }
  return SPECDN_INTERNAL;
}

template <class F>
specdn_status guarded(F&& body) {
  try {
    body();
    return SPECDN_OK;
  } catch (const specdn::Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
  } catch (const std::exception& e) {
    last_error = e.what();
  } catch (...) {
    last_error = "unknown error";
  }
  return SPECDN_INTERNAL;
}

specdn_status null_argument(const char* name) {
  last_error = std::string(name) + " is NULL";
  return SPECDN_INVALID_ARGUMENT;
}

std::complex<double> to_cplx(specdn_complex z) { return {z.re, z.im}; }

void fill(const specdn::solvers::SolverReport& r, specdn_solver_report* out) {
  out->value = {r.value.real(), r.value.imag()};
  out->iterations = r.iterations;
  out->residual = r.residual;
  out->in_domain = r.in_domain ? 1 : 0;
}

}  // namespace

extern "C" {

const char* specdn_last_error(void) { return last_error.c_str(); }

const char* specdn_version(void) { return SPECDN_VERSION_STRING; }

specdn_status specdn_measure_from_eigenvalues(const double* eigenvalues, size_t count,
                                              specdn_measure** out) {
  if (!out) return null_argument("out");
  if (!eigenvalues && count > 0) return null_argument("eigenvalues");
  return guarded([&] {
    *out = new specdn_measure{specdn::measures::esd_from_eigenvalues({eigenvalues, count}, count)};
  });
}

specdn_status specdn_measure_from_atoms(const double* locations, const double* weights, size_t count,
                                        specdn_measure** out) {
  if (!out) return null_argument("out");
  if (!locations || !weights) return null_argument("locations or weights");
  return guarded([&] {
    std::vector<specdn::measures::Atom> atoms(count);
    for (size_t i = 0; i < count; ++i) atoms[i] = {locations[i], weights[i]};
    *out = new specdn_measure{specdn::measures::DiscreteMeasure::from_atoms(std::move(atoms))};
  });
}

specdn_status specdn_measure_read_csv(const char* path, specdn_measure** out) {
  if (!out) return null_argument("out");
  if (!path) return null_argument("path");
  return guarded([&] { *out = new specdn_measure{specdn::measures::read_csv(path)}; });
}

specdn_status specdn_measure_write_csv(const specdn_measure* measure, const char* path) {
  if (!measure) return null_argument("measure");
  if (!path) return null_argument("path");
  return guarded([&] { specdn::measures::write_csv(measure->value, path); });
}

size_t specdn_measure_size(const specdn_measure* measure) {
  return measure ? measure->value.size() : 0;
}

specdn_status specdn_measure_atoms(const specdn_measure* measure, double* locations, double* weights,
                                   size_t capacity) {
  if (!measure) return null_argument("measure");
  if ((!locations || !weights) && capacity > 0) return null_argument("locations or weights");
  const auto atoms = measure->value.atoms();
  for (size_t i = 0; i < atoms.size() && i < capacity; ++i) {
    locations[i] = atoms[i].location;
    weights[i] = atoms[i].weight;
  }
  return SPECDN_OK;
}

specdn_status specdn_measure_stieltjes(const specdn_measure* measure, specdn_complex z,
                                       specdn_complex* out) {
  if (!measure) return null_argument("measure");
  if (!out) return null_argument("out");
  return guarded([&] {
    const auto m = specdn::measures::stieltjes(measure->value, to_cplx(z));
    *out = {m.real(), m.imag()};
  });
}

specdn_status specdn_measure_cdf(const specdn_measure* measure, double x, double* out) {
  if (!measure) return null_argument("measure");
  if (!out) return null_argument("out");
  *out = specdn::measures::cdf_eval(measure->value, x);
  return SPECDN_OK;
}

specdn_status specdn_kolmogorov(const specdn_measure* a, const specdn_measure* b, double* out) {
  if (!a || !b) return null_argument("measure");
  if (!out) return null_argument("out");
  *out = specdn::measures::kolmogorov_distance(a->value, b->value);
  return SPECDN_OK;
}

specdn_status specdn_wasserstein1(const specdn_measure* a, const specdn_measure* b, double* out) {
  if (!a || !b) return null_argument("measure");
  if (!out) return null_argument("out");
  *out = specdn::measures::wasserstein1_distance(a->value, b->value);
  return SPECDN_OK;
}

void specdn_measure_free(specdn_measure* measure) { delete measure; }

specdn_status specdn_solve_mA(const specdn_measure* f, specdn_complex z, double sigma, double y,
                              specdn_solver_report* out) {
  if (!f) return null_argument("f");
  if (!out) return null_argument("out");
  return guarded([&] {
    fill(specdn::solvers::solve_mA(f->value, to_cplx(z), {sigma, y}), out);
  });
}

specdn_status specdn_mp_forward(const specdn_measure* h, specdn_complex z, double y,
                                specdn_solver_report* out) {
  if (!h) return null_argument("h");
  if (!out) return null_argument("out");
  return guarded([&] { fill(specdn::solvers::mp_forward(h->value, to_cplx(z), y), out); });
}

specdn_status specdn_experiment_load(const char* config_path, specdn_experiment** out) {
  if (!out) return null_argument("out");
  if (!config_path) return null_argument("config_path");
  return guarded([&] { *out = new specdn_experiment{specdn::experiment::load_config(config_path)}; });
}

specdn_status specdn_experiment_parse(const char* json_text, specdn_experiment** out) {
  if (!out) return null_argument("out");
  if (!json_text) return null_argument("json_text");
  return guarded([&] { *out = new specdn_experiment{specdn::experiment::parse_config(json_text)}; });
}

specdn_status specdn_experiment_set_seed(specdn_experiment* experiment, uint64_t seed) {
  if (!experiment) return null_argument("experiment");
  experiment->config.seeds = {seed};
  return SPECDN_OK;
}

specdn_status specdn_experiment_set_output_dir(specdn_experiment* experiment, const char* path) {
  if (!experiment) return null_argument("experiment");
  if (!path) return null_argument("path");
  experiment->config.output_dir = path;
  return SPECDN_OK;
}

specdn_status specdn_experiment_set_route(specdn_experiment* experiment, const char* route) {
  if (!experiment) return null_argument("experiment");
  if (!route) return null_argument("route");
  return guarded([&] {
    auto updated = experiment->config;
    updated.recovery.route = specdn::experiment::parse_route(route);
    updated.validate();
    experiment->config = std::move(updated);
  });
}

specdn_status specdn_experiment_set_drop_degenerate(specdn_experiment* experiment, int drop) {
  if (!experiment) return null_argument("experiment");
  experiment->config.estimators.drop_degenerate = drop != 0;
  return SPECDN_OK;
}

specdn_status specdn_experiment_set_jobs(specdn_experiment* experiment, int jobs) {
  if (!experiment) return null_argument("experiment");
  if (jobs < 0) {
    last_error = "jobs: must be non-negative";
    return SPECDN_INVALID_ARGUMENT;
  }
  experiment->config.jobs = jobs;
  return SPECDN_OK;
}

specdn_status specdn_experiment_run(specdn_experiment* experiment) {
  if (!experiment) return null_argument("experiment");
  return guarded([&] { specdn::experiment::run_experiment(experiment->config); });
}

specdn_status specdn_experiment_validate(specdn_experiment* experiment, char* table, size_t capacity,
                                         int* failures) {
  if (!experiment) return null_argument("experiment");
  if (!failures) return null_argument("failures");
  return guarded([&] {
    const auto checks = specdn::experiment::run_validation(
        {}, experiment->config.seeds.front(), experiment->config.jobs);
    int failed = 0;
    for (const auto& c : checks) failed += c.passed ? 0 : 1;
    *failures = failed;
    if (table && capacity > 0) {
      const std::string text = specdn::experiment::format_validation(checks);
      const size_t n = std::min(capacity - 1, text.size());
      std::memcpy(table, text.data(), n);
      table[n] = '\0';
    }
  });
}

void specdn_experiment_free(specdn_experiment* experiment) { delete experiment; }

}  // extern "C"
