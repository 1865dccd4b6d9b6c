#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <thread>

#include <json.hpp>

#include "specdn/estimators.hpp"
#include "specdn/experiment.hpp"
#include "specdn/recovery.hpp"

namespace specdn::experiment {

using measures::DiscreteMeasure;

int resolved_jobs(int requested) {
  if (requested > 0) return requested;
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

namespace {

DiscreteMeasure esd_of(const Eigen::MatrixXd& m) {
  const std::vector<double> e = estimators::sym_eigenvalues(m);
  return measures::esd_from_eigenvalues(e, e.size());
}

struct Sample {
  simulate::CovolFactor factor;
  simulate::VolPath vol;
  simulate::PricePanel panel;
};

Sample simulate_sample(const SimConfig& sim, std::uint64_t seed) {
  simulate::CovolFactor factor = simulate::build_covol_factor(sim.p, sim.spectrum, sim.normalize_trace, seed);
  simulate::VolPath vol;
  Eigen::MatrixXd latent;
  if (sim.gamma_kind == GammaKind::constant) {
    vol = simulate::make_vol_path(std::vector<double>(static_cast<std::size_t>(sim.n) + 1, sim.gamma_level),
                                  sim.gamma.bound);
    latent = simulate::simulate_prices(factor, vol, sim.drift, seed);
  } else if (sim.leverage) {
    simulate::ClassCSample s = simulate::simulate_class_c(factor, sim.gamma, sim.n, sim.drift, seed);
    vol = std::move(s.vol);
    latent = std::move(s.latent);
  } else {
    vol = simulate::simulate_gamma_path(sim.n, sim.gamma.rho, sim.gamma.sigma_ou, seed, sim.gamma.bound);
    latent = simulate::simulate_prices(factor, vol, sim.drift, seed);
  }
  simulate::NoiseSpec noise;
  noise.variances.assign(static_cast<std::size_t>(sim.p), sim.noise_variance);
  noise.model = sim.noise_model;
  noise.phi = sim.noise_phi;
  simulate::PricePanel panel = simulate::add_noise(latent, noise, seed);
  return Sample{std::move(factor), std::move(vol), std::move(panel)};
}

// gamma path estimated from pre-averaged returns: noise-corrected squared
// return norms, averaged over three neighbouring blocks and held constant
// over each block. Only the shape matters to the second step.
simulate::VolPath estimate_vol_path(const estimators::PavReturns& r, int n, double noise_variance) {
  const int m = r.m;
  const double p = static_cast<double>(r.values.rows());
  const double noise_floor = p * 2.0 * noise_variance / r.k;
  std::vector<double> q(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) q[static_cast<std::size_t>(i)] = r.values.col(i).squaredNorm() - noise_floor;
  const double mean_q = std::accumulate(q.begin(), q.end(), 0.0) / m;
  const double floor = 1e-3 * std::max(std::abs(mean_q), std::numeric_limits<double>::min());
  std::vector<double> smooth(q.size());
  for (int i = 0; i < m; ++i) {
    const int lo = std::max(0, i - 1), hi = std::min(m - 1, i + 1);
    double s = 0.0;
    for (int j = lo; j <= hi; ++j) s += q[static_cast<std::size_t>(j)];
    smooth[static_cast<std::size_t>(i)] = std::max(s / (hi - lo + 1), floor);
  }
  const double level = std::accumulate(smooth.begin(), smooth.end(), 0.0) / m;
  std::vector<double> values(static_cast<std::size_t>(n) + 1);
  for (int t = 0; t <= n; ++t) {
    const int block = std::min(m - 1, t / (2 * r.k));
    values[static_cast<std::size_t>(t)] = std::sqrt(smooth[static_cast<std::size_t>(block)] / level);
  }
  const double bound = *std::max_element(values.begin(), values.end());
  return simulate::make_vol_path(std::move(values), bound);
}

recovery::RecoveryGrid make_grid(const RecoverySettings& rec) {
  return recovery::RecoveryGrid{recovery::build_x_grid(rec.spectral_span, rec.k),
                                recovery::build_z_grid(rec.j_re, rec.j_im, rec.re_range, rec.im_range)};
}

// Scale dividing spectra so that lambda_max(B_m) lands at spectral_span.
double unit_scale(const DiscreteMeasure& bm, const RecoverySettings& rec) {
  const double top = bm.max_location();
  if (!(top > 0.0)) fail(ErrorCode::degenerate, "B_m has no positive eigenvalue");
  return top / rec.spectral_span;
}

RouteOutcome outcome(const char* route, const DiscreteMeasure& recovered, const DiscreteMeasure& target,
                     double baseline, const recovery::RecoveryResult& r) {
  return RouteOutcome{route,
                      measures::kolmogorov_distance(recovered, target),
                      measures::wasserstein1_distance(recovered, target),
                      baseline,
                      r.objective,
                      r.dropped_points};
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::io, "cannot write " + path.string());
  out << body;
  if (!out) fail(ErrorCode::io, "cannot write " + path.string());
}

void write_seed(const ExperimentConfig& config, const SeedOutcome& s) {
  const std::filesystem::path dir = config.output_dir / ("seed_" + std::to_string(s.seed));
  std::filesystem::create_directories(dir);
  measures::write_csv(s.icv, dir / "esd_icv.csv");
  measures::write_csv(s.pav, dir / "esd_pav.csv");
  measures::write_csv(s.bm, dir / "esd_bm.csv");
  measures::write_csv(s.a_m, dir / "esd_Am.csv");
  if (s.step1) measures::write_csv(*s.step1, dir / "recovered_step1.csv");
  if (s.two_step) measures::write_csv(*s.two_step, dir / "recovered_two_step.csv");
  if (s.direct) measures::write_csv(*s.direct, dir / "recovered_direct.csv");

  nlohmann::ordered_json report;
  report["seed"] = s.seed;
  report["route"] = route_name(config.recovery.route);
  report["K"] = config.recovery.k;
  report["J"] = config.recovery.j_re * config.recovery.j_im;
  report["zeta"] = s.zeta;
  for (const RouteOutcome& r : s.routes) {
    report["objective"][r.route] = r.objective;
    report["dropped_points"][r.route] = r.dropped_points;
    report["distances"][r.route] = {{"kolmogorov", r.kolmogorov},
                                    {"wasserstein1", r.wasserstein1},
                                    {"baseline_kolmogorov", r.baseline_kolmogorov}};
  }
  report["warnings"] = s.warnings;
  write_text(dir / "recovery_report.json", report.dump(2) + "\n");
}

}  // namespace

SeedOutcome run_seed(const ExperimentConfig& config, std::uint64_t seed, int jobs) {
  config.validate();
  const auto started = std::chrono::steady_clock::now();
  const SimConfig& sim = config.sim;
  const EstimatorSettings& est = config.estimators;
  const RecoverySettings& rec = config.recovery;
  const auto policy =
      est.drop_degenerate ? estimators::DegeneratePolicy::drop : estimators::DegeneratePolicy::reject;

  Sample sample = simulate_sample(sim, seed);
  const simulate::IcvTruth truth = simulate::icv_true(sample.factor, sample.vol);

  // Noise level handed to the first step. Unequal per-asset estimates are
  // equalized by adding noise so the scalar model applies.
  const std::vector<double> dhat = estimators::estimate_noise_variance(sample.panel.observed);
  double d2 = sim.noise_variance;
  Eigen::MatrixXd observed = sample.panel.observed;
  if (est.noise_variance == NoiseVarianceMode::estimated) {
    d2 = *std::max_element(dhat.begin(), dhat.end());
    observed = estimators::equalize_noise(sample.panel, dhat, seed).observed;
  } else if (est.noise_variance == NoiseVarianceMode::pooled) {
    d2 = std::accumulate(dhat.begin(), dhat.end(), 0.0) / static_cast<double>(dhat.size());
  }

  SeedOutcome out;
  out.seed = seed;
  out.zeta = sample.vol.zeta;
  out.icv = truth.esd;

  const recovery::RecoveryGrid grid = make_grid(rec);
  recovery::RecoveryOptions options;
  options.jobs = jobs;
  options.min_fraction = rec.min_fraction;

  const estimators::EstimatorConfig pav_cfg{sim.n, sim.p, est.theta_pav,
                                            estimators::WindowRule::sqrt_rule, est.alpha};
  const int k_pav = pav_cfg.window();
  const estimators::PavReturns r_pav = estimators::pav_returns(observed, k_pav);
  out.pav = esd_of(estimators::pav_matrix(r_pav));
  out.a_m = esd_of(estimators::pav_matrix(estimators::pav_returns(sample.panel.latent, k_pav)));
  auto note_dropped = [&](const char* what, int k_used, const estimators::BmMatrix& bm) {
    if (bm.dropped_blocks > 0)
      out.warnings.push_back(std::string(what) + " (k=" + std::to_string(k_used) + "): skipped " +
                             std::to_string(bm.dropped_blocks) + " zero pre-averaged returns");
  };
  auto note_points = [&](const char* route, const recovery::RecoveryResult& r) {
    if (r.dropped_points > 0)
      out.warnings.push_back(std::string(route) + ": dropped " + std::to_string(r.dropped_points) +
                             " unsolved grid points");
  };
  const estimators::BmMatrix bm_small = estimators::bm_matrix(r_pav, policy);
  note_dropped("B_m", k_pav, bm_small);
  const DiscreteMeasure bm_pav = esd_of(bm_small.matrix);
  out.bm = bm_pav;

  if (rec.route != Route::direct) {
    const double s = unit_scale(bm_pav, rec);
    const int m = r_pav.m;
    const double y = static_cast<double>(sim.p) / m;
    const solvers::NoisyInversionParams params{std::sqrt(2.0 * m * d2 / k_pav / s), y};
    const recovery::Step1Result step1 =
        recovery::recover_step1(measures::scale_measure(out.pav, 1.0 / s), params, grid, options);
    const simulate::VolPath gamma_star = rec.gamma_mode == GammaMode::truth
                                             ? sample.vol
                                             : estimate_vol_path(r_pav, sim.n, d2);
    const recovery::RecoveryResult step2 =
        recovery::recover_step2(step1.m_a, grid.z, gamma_star, y, grid.x, options);
    note_points("step1", step1.recovery);
    note_points("two_step", step2);
    out.step1 = measures::scale_measure(step1.recovery.measure, s);
    out.two_step = measures::scale_measure(step2.measure, s);
    out.routes.push_back(outcome("step1", *out.step1, out.a_m,
                                 measures::kolmogorov_distance(out.pav, out.a_m), step1.recovery));
    out.routes.push_back(outcome("two_step", *out.two_step, out.icv,
                                 measures::best_scaled_kolmogorov_distance(out.pav, out.icv), step2));
  }

  if (rec.route != Route::two_step) {
    const estimators::EstimatorConfig bm_cfg{sim.n, sim.p, est.theta_bm,
                                             estimators::WindowRule::power_rule, est.alpha};
    const estimators::BmMatrix bm = estimators::bm_matrix(estimators::pav_returns(observed, bm_cfg.window()), policy);
    note_dropped("B_m", bm_cfg.window(), bm);
    out.bm = esd_of(bm.matrix);
    const double s = unit_scale(out.bm, rec);
    const double y = static_cast<double>(sim.p) / bm.used_blocks;
    const recovery::RecoveryResult direct =
        recovery::recover_direct(measures::scale_measure(out.bm, 1.0 / s), y, grid, options);
    out.direct = measures::scale_measure(direct.measure, s);
    out.routes.push_back(outcome("direct", *out.direct, out.icv,
                                 measures::kolmogorov_distance(out.bm, out.icv), direct));
  }

  out.runtime_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  return out;
}

std::vector<SeedOutcome> run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  config.validate();
  const int jobs = resolved_jobs(config.jobs);
  const std::size_t count = config.seeds.size();
  std::vector<SeedOutcome> results(count);
  // Replicates fan out first; a single replicate spreads its grid instead.
  const int outer = count > 1 ? jobs : 1;
  const int inner = count > 1 ? 1 : jobs;
  recovery::parallel_for(count, outer, [&](std::size_t i) {
    results[i] = run_seed(config, config.seeds[i], inner);
  });

  for (const SeedOutcome& s : results)
    for (const std::string& w : s.warnings) std::cerr << "warning: seed " << s.seed << ": " << w << "\n";

  if (options.write_outputs) {
    std::filesystem::create_directories(config.output_dir);
    std::string summary = "seed,route,kolmogorov,wasserstein1,baseline_kolmogorov\n";
    std::string timing = "seed,runtime_ms\n";
    for (const SeedOutcome& s : results) {
      write_seed(config, s);
      for (const RouteOutcome& r : s.routes)
        summary += std::to_string(s.seed) + "," + r.route + "," + fmt(r.kolmogorov) + "," +
                   fmt(r.wasserstein1) + "," + fmt(r.baseline_kolmogorov) + "\n";
      timing += std::to_string(s.seed) + "," + fmt(std::round(s.runtime_ms * 1000.0) / 1000.0) + "\n";
    }
    write_text(config.output_dir / "summary.csv", summary);
    write_text(config.output_dir / "timing.csv", timing);
  }
  return results;
}

}  // namespace specdn::experiment
