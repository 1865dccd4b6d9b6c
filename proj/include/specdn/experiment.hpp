#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "specdn/measures.hpp"
#include "specdn/recovery.hpp"
#include "specdn/simulate.hpp"

namespace specdn::experiment {

enum class Route { two_step, direct, both };
enum class GammaMode { truth, estimated };
enum class GammaKind { ou, constant };
// Noise variance fed to step 1: per-asset estimates equalized to their
// maximum, the pooled mean estimate, or the configured value.
enum class NoiseVarianceMode { estimated, pooled, truth };

struct SimConfig {
  int p = 100;
  int n = 23400;
  GammaKind gamma_kind = GammaKind::ou;
  simulate::GammaParams gamma;
  double gamma_level = 0.08;  // constant path value
  // OU driver is the cross-sectional average of the price Brownian motions;
  // otherwise an independent Brownian motion.
  bool leverage = true;
  simulate::SpectrumSpec spectrum = simulate::Beta13{};
  bool normalize_trace = false;
  std::vector<double> drift;
  simulate::NoiseModel noise_model = simulate::NoiseModel::iid;
  double noise_variance = 2e-4;
  double noise_phi = 0.0;
};

struct EstimatorSettings {
  double theta_pav = 0.5;  // k = floor(theta_pav sqrt(n)) for the two-step route
  double theta_bm = 1.5;   // k = floor(theta_bm n^alpha) for the direct route
  double alpha = 0.6;
  bool drop_degenerate = false;
  NoiseVarianceMode noise_variance = NoiseVarianceMode::estimated;
};

struct RecoverySettings {
  int k = 100;
  int j_re = 8;
  int j_im = 8;
  std::array<double, 2> re_range{-20.0, 0.0};
  std::array<double, 2> im_range{1.0, 20.0};
  Route route = Route::both;
  GammaMode gamma_mode = GammaMode::truth;
  // Spectra are divided by lambda_max(B_m) / spectral_span before inversion,
  // so the atom grid spans [0, spectral_span] in the units of the z grid.
  double spectral_span = 5.0;
  double min_fraction = 0.9;
};

struct ExperimentConfig {
  SimConfig sim;
  EstimatorSettings estimators;
  RecoverySettings recovery;
  std::vector<std::uint64_t> seeds{1};
  std::filesystem::path output_dir = "out";
  int jobs = 0;  // 0: one per hardware thread

  /// Throws Error(config) naming the offending field.
  void validate() const;
};

ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

std::string route_name(Route route);
Route parse_route(std::string_view name);

/// One row of summary.csv: distance of a recovered spectrum to its target
/// next to the distance of the raw estimator's spectrum to the same target.
struct RouteOutcome {
  std::string route;  // step1 | two_step | direct
  double kolmogorov = 0.0;
  double wasserstein1 = 0.0;
  double baseline_kolmogorov = 0.0;
  double objective = 0.0;
  int dropped_points = 0;
};

struct SeedOutcome {
  std::uint64_t seed = 0;
  double zeta = 0.0;
  measures::DiscreteMeasure icv = measures::DiscreteMeasure::point_mass(0.0);
  measures::DiscreteMeasure a_m = measures::DiscreteMeasure::point_mass(0.0);
  measures::DiscreteMeasure pav = measures::DiscreteMeasure::point_mass(0.0);
  measures::DiscreteMeasure bm = measures::DiscreteMeasure::point_mass(0.0);
  std::optional<measures::DiscreteMeasure> step1;
  std::optional<measures::DiscreteMeasure> two_step;
  std::optional<measures::DiscreteMeasure> direct;
  std::vector<RouteOutcome> routes;
  // Dropped grid points and skipped degenerate blocks.
  std::vector<std::string> warnings;
  double runtime_ms = 0.0;
};

struct RunOptions {
  bool write_outputs = true;
};

/// Simulates, estimates and recovers for every configured seed. Outputs are
/// written, and warnings printed to stderr, by the calling thread only, after
/// all seeds finish. Solver
/// threshold failures propagate as Error(solver_threshold).
std::vector<SeedOutcome> run_experiment(const ExperimentConfig& config,
                                        const RunOptions& options = {});

/// Runs a single seed without touching the file system.
SeedOutcome run_seed(const ExperimentConfig& config, std::uint64_t seed, int jobs);

struct ValidationCheck {
  std::string name;
  double value = 0.0;
  double limit = 0.0;
  bool passed = false;
};

struct ValidationSettings {
  std::vector<int> ladder{100, 200};
  double z_imag = 4.0;
  double sigma = 1.0;
  int ladder_seeds = 3;
  int mp_cases = 20;
  int lp_cases = 20;
  double prop31_limit = 0.05;
  double mp_limit = 1e-9;
  double lp_limit = 2e-3;
};

/// Numerical self-tests: the finite-n signal-plus-noise residual over a
/// (p, n = 2p) ladder, the Marcenko-Pastur forward map against its
/// point-mass closed form, and the LP against grid search on the simplex.
std::vector<ValidationCheck> run_validation(const ValidationSettings& settings, std::uint64_t seed,
                                            int jobs);

/// Random K = 3 min-max instance with 1..6 residuals, used by the LP check.
recovery::LpProblem random_lp_instance(std::uint64_t seed, std::uint32_t index);

/// Fixed-width pass/fail table.
std::string format_validation(const std::vector<ValidationCheck>& checks);

/// `requested` when positive, otherwise the hardware thread count.
int resolved_jobs(int requested);

}  // namespace specdn::experiment
