#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "specdn/experiment.hpp"
#include "specdn/recovery.hpp"
#include "specdn/rng.hpp"
#include "specdn/solvers.hpp"

namespace specdn::experiment {

namespace {

using cplx = std::complex<double>;

Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed, std::uint32_t substream) {
  const rng::Stream stream(seed, rng::Purpose::validation, substream);
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j)
      out(i, j) = stream.normal(static_cast<std::uint64_t>(i * cols + j));
  return out;
}

double ladder_residual(int p, double sigma, double z_imag, std::uint64_t seed) {
  const int n = 2 * p;
  const auto sub = static_cast<std::uint32_t>(p);
  const Eigen::MatrixXd a = gaussian(p, n, seed, 2 * sub);
  const Eigen::MatrixXd noisy = a + sigma * gaussian(p, n, seed, 2 * sub + 1);
  const Eigen::MatrixXd s = noisy * noisy.transpose() / static_cast<double>(n);
  solvers::TnOptions options;
  options.enforce_contraction_region = false;
  return solvers::prop31_residual(a, s, cplx{0.0, z_imag}, sigma, options);
}

// Grid search over the simplex at step 1/steps.
double simplex_grid_search(const recovery::LpProblem& problem, int steps) {
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> w(3);
  for (int a = 0; a <= steps; ++a) {
    for (int b = 0; a + b <= steps; ++b) {
      w[0] = static_cast<double>(a) / steps;
      w[1] = static_cast<double>(b) / steps;
      w[2] = static_cast<double>(steps - a - b) / steps;
      best = std::min(best, recovery::minmax_objective(problem, w));
    }
  }
  return best;
}

}  // namespace

recovery::LpProblem random_lp_instance(std::uint64_t seed, std::uint32_t index) {
  const rng::Stream stream(seed, rng::Purpose::validation, 1000000u + index);
  std::uint64_t draw = 0;
  auto u = [&] { return stream.uniform(draw++); };
  const int j_count = 1 + static_cast<int>(u() * 6.0);
  recovery::LpProblem problem;
  problem.basis.resize(j_count, 3);
  std::vector<double> x(3);
  for (double& v : x) v = 5.0 * u();
  // Target: a random measure's transform, perturbed so the fit is inexact.
  std::vector<double> loc(3), wt(3);
  double total = 0.0;
  for (int i = 0; i < 3; ++i) {
    loc[static_cast<std::size_t>(i)] = 5.0 * u();
    wt[static_cast<std::size_t>(i)] = u();
    total += wt[static_cast<std::size_t>(i)];
  }
  for (int j = 0; j < j_count; ++j) {
    const cplx z{-5.0 + 5.0 * u(), 1.0 + 4.0 * u()};
    cplx t{0.0, 0.0};
    for (int i = 0; i < 3; ++i)
      t += wt[static_cast<std::size_t>(i)] / total / (loc[static_cast<std::size_t>(i)] - z);
    t += cplx{0.02 * (u() - 0.5), 0.02 * (u() - 0.5)};
    problem.target.push_back(t);
    for (int k = 0; k < 3; ++k) problem.basis(j, k) = 1.0 / (x[static_cast<std::size_t>(k)] - z);
  }
  return problem;
}

std::vector<ValidationCheck> run_validation(const ValidationSettings& settings, std::uint64_t seed,
                                            int jobs) {
  require(!settings.ladder.empty(), "validation ladder is empty");
  require(settings.ladder_seeds >= 1, "validation needs at least one ladder seed");
  std::vector<ValidationCheck> checks;

  const std::size_t rungs = settings.ladder.size();
  const auto reps = static_cast<std::size_t>(settings.ladder_seeds);
  std::vector<double> residuals(rungs * reps);
  recovery::parallel_for(residuals.size(), resolved_jobs(jobs), [&](std::size_t i) {
    residuals[i] = ladder_residual(settings.ladder[i / reps], settings.sigma, settings.z_imag,
                                   seed + i % reps);
  });
  std::vector<double> means(rungs, 0.0);
  for (std::size_t r = 0; r < rungs; ++r) {
    for (std::size_t s = 0; s < reps; ++s) means[r] += residuals[r * reps + s];
    means[r] /= static_cast<double>(reps);
    const int p = settings.ladder[r];
    checks.push_back({"residual p=" + std::to_string(p) + " n=" + std::to_string(2 * p), means[r],
                      settings.prop31_limit, means[r] <= settings.prop31_limit});
  }
  if (rungs > 1) {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t r = 1; r < rungs; ++r) worst = std::max(worst, means[r] - means[r - 1]);
    checks.push_back({"residual non-increasing", worst, 0.0, worst <= 0.0});
  }

  {
    const rng::Stream stream(seed, rng::Purpose::validation, 999u);
    double worst = 0.0;
    for (int i = 0; i < settings.mp_cases; ++i) {
      const auto base = static_cast<std::uint64_t>(4 * i);
      const double c = 0.5 + 3.5 * stream.uniform(base);
      const double y = 0.1 + 4.9 * stream.uniform(base + 1);
      const cplx z{-5.0 + 10.0 * stream.uniform(base + 2), 1.0 + 9.0 * stream.uniform(base + 3)};
      const cplx m = solvers::mp_forward(measures::DiscreteMeasure::point_mass(c), z, y).value;
      worst = std::max(worst, std::abs(m - solvers::mp_point_mass_closed_form(c, y, z)));
    }
    checks.push_back({"mp forward vs closed form (" + std::to_string(settings.mp_cases) + ")", worst,
                      settings.mp_limit, worst <= settings.mp_limit});
  }

  {
    std::vector<double> gaps(static_cast<std::size_t>(settings.lp_cases));
    std::vector<char> feasible(gaps.size());
    recovery::parallel_for(gaps.size(), resolved_jobs(jobs), [&](std::size_t i) {
      const recovery::LpProblem problem = random_lp_instance(seed, static_cast<std::uint32_t>(i));
      const recovery::LpResult lp = recovery::solve_minmax_lp(problem);
      double sum = 0.0;
      bool ok = true;
      for (double w : lp.weights) {
        sum += w;
        ok = ok && w >= 0.0;
      }
      feasible[i] = ok && std::abs(sum - 1.0) <= 1e-12;
      gaps[i] = std::abs(lp.objective - simplex_grid_search(problem, 1000));
    });
    const double worst = gaps.empty() ? 0.0 : *std::max_element(gaps.begin(), gaps.end());
    const bool all_feasible = std::all_of(feasible.begin(), feasible.end(), [](char f) { return f != 0; });
    checks.push_back({"lp vs grid search (" + std::to_string(settings.lp_cases) + ")", worst,
                      settings.lp_limit, all_feasible && worst <= settings.lp_limit});
  }
  return checks;
}

std::string format_validation(const std::vector<ValidationCheck>& checks) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-36s %14s %14s  %s\n", "check", "value", "limit", "result");
  out += line;
  for (const ValidationCheck& c : checks) {
    std::snprintf(line, sizeof line, "%-36s %14.6e %14.6e  %s\n", c.name.c_str(), c.value, c.limit,
                  c.passed ? "PASS" : "FAIL");
    out += line;
  }
  return out;
}

}  // namespace specdn::experiment
