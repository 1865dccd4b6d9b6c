#include "specdn/recovery.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

namespace specdn::recovery {

using measures::DiscreteMeasure;

std::vector<double> build_x_grid(double lambda_max, int k) {
  require(k >= 2, "x grid needs K >= 2");
  if (!(lambda_max > 0.0) || !std::isfinite(lambda_max))
    fail(ErrorCode::invalid_argument, "x grid needs lambda_max > 0");
  std::vector<double> x(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) x[static_cast<std::size_t>(i)] = i * lambda_max / (k - 1);
  x.back() = lambda_max;
  return x;
}

solvers::ComplexGrid build_z_grid(int j_re, int j_im, std::array<double, 2> re_range,
                                  std::array<double, 2> im_range) {
  require(j_re >= 1 && j_im >= 1, "z grid needs at least one point per axis");
  require(re_range[0] <= re_range[1] && im_range[0] <= im_range[1], "z grid range is reversed");
  if (!(im_range[0] >= 1.0))
    fail(ErrorCode::domain, "z grid imaginary range must start at or above 1");
  auto axis = [](std::array<double, 2> range, int count, int i) {
    if (count == 1) return range[0];
    return range[0] + (range[1] - range[0]) * i / (count - 1);
  };
  std::vector<cplx> points;
  points.reserve(static_cast<std::size_t>(j_re) * static_cast<std::size_t>(j_im));
  for (int a = 0; a < j_re; ++a)
    for (int b = 0; b < j_im; ++b) points.emplace_back(axis(re_range, j_re, a), axis(im_range, j_im, b));
  return solvers::ComplexGrid(std::move(points));
}

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& body) {
  const std::size_t workers =
      std::min<std::size_t>(count, static_cast<std::size_t>(std::max(jobs, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

namespace {

void check_usable(std::size_t usable, std::size_t total, std::size_t k, double min_fraction,
                  const char* stage) {
  const auto needed = static_cast<std::size_t>(std::ceil(min_fraction * static_cast<double>(total) - 1e-9));
  if (usable < needed || 2 * usable < k) {
    fail(ErrorCode::solver_threshold,
         std::string(stage) + ": only " + std::to_string(usable) + " of " + std::to_string(total) +
             " grid points solved");
  }
}

DiscreteMeasure measure_from_weights(const std::vector<double>& x, const std::vector<double>& w) {
  std::vector<measures::Atom> atoms;
  for (std::size_t k = 0; k < x.size(); ++k)
    if (w[k] > 0.0) atoms.push_back({x[k], w[k]});
  return DiscreteMeasure::from_atoms(std::move(atoms));
}

RecoveryResult fit(const std::vector<cplx>& target, const Eigen::MatrixXcd& basis,
                   const std::vector<double>& x, int dropped, const RecoveryOptions& options) {
  const LpResult lp = solve_minmax_lp(LpProblem{target, basis}, options.pivot_limit);
  return RecoveryResult{measure_from_weights(x, lp.weights), lp.objective, dropped};
}

void check_x_grid(const std::vector<double>& x) {
  require(x.size() >= 2, "x grid needs K >= 2");
  for (std::size_t k = 0; k < x.size(); ++k) {
    require(std::isfinite(x[k]) && x[k] >= 0.0, "x grid entries must be finite and >= 0");
    if (k > 0) require(x[k] > x[k - 1], "x grid must be strictly ascending");
  }
}

}  // namespace

Step1Result recover_step1(const DiscreteMeasure& pav_esd, const solvers::NoisyInversionParams& params,
                          const RecoveryGrid& grid, const RecoveryOptions& options) {
  check_x_grid(grid.x);
  const auto& z = grid.z.points();
  std::vector<std::optional<cplx>> m_a(z.size());
  parallel_for(z.size(), options.jobs, [&](std::size_t j) {
    try {
      const solvers::SolverReport r = solvers::solve_mA(pav_esd, z[j], params);
      if (r.in_domain) m_a[j] = r.value;
    } catch (const ConvergenceError&) {
      // Dropped point.
    }
  });

  std::vector<std::size_t> usable;
  for (std::size_t j = 0; j < z.size(); ++j)
    if (m_a[j]) usable.push_back(j);
  check_usable(usable.size(), z.size(), grid.x.size(), options.min_fraction, "step 1");

  std::vector<cplx> target;
  Eigen::MatrixXcd basis(static_cast<Eigen::Index>(usable.size()),
                         static_cast<Eigen::Index>(grid.x.size()));
  for (std::size_t r = 0; r < usable.size(); ++r) {
    const cplx zj = z[usable[r]];
    target.push_back(*m_a[usable[r]]);
    for (std::size_t k = 0; k < grid.x.size(); ++k)
      basis(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = 1.0 / (grid.x[k] - zj);
  }
  const int dropped = static_cast<int>(z.size() - usable.size());
  return Step1Result{fit(target, basis, grid.x, dropped, options), std::move(m_a)};
}

RecoveryResult recover_step2(const std::vector<std::optional<cplx>>& m_a,
                             const solvers::ComplexGrid& z_grid, const simulate::VolPath& gamma_star,
                             double y, const std::vector<double>& x_grid,
                             const RecoveryOptions& options) {
  check_x_grid(x_grid);
  const auto& z = z_grid.points();
  require(m_a.size() == z.size(), "one m_A value per z point is required");
  if (!(gamma_star.zeta > 0.0)) fail(ErrorCode::degenerate, "volatility path has zeta <= 0");

  std::vector<std::optional<cplx>> m_big(z.size());
  parallel_for(z.size(), options.jobs, [&](std::size_t j) {
    if (!m_a[j]) return;
    try {
      const solvers::SolverReport r = solvers::solve_M(z[j], *m_a[j], gamma_star, y);
      if (r.in_domain) m_big[j] = r.value;
    } catch (const ConvergenceError&) {
    }
  });

  std::vector<std::size_t> usable;
  for (std::size_t j = 0; j < z.size(); ++j)
    if (m_big[j]) usable.push_back(j);
  check_usable(usable.size(), z.size(), x_grid.size(), options.min_fraction, "step 2");

  const double zeta = gamma_star.zeta;
  std::vector<cplx> target;
  Eigen::MatrixXcd basis(static_cast<Eigen::Index>(usable.size()),
                         static_cast<Eigen::Index>(x_grid.size()));
  for (std::size_t r = 0; r < usable.size(); ++r) {
    const std::size_t j = usable[r];
    target.push_back(*m_a[j]);
    for (std::size_t k = 0; k < x_grid.size(); ++k) {
      basis(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) =
          -(1.0 / z[j]) * zeta / (x_grid[k] * *m_big[j] + zeta);
    }
  }
  return fit(target, basis, x_grid, static_cast<int>(z.size() - usable.size()), options);
}

RecoveryResult recover_direct(const DiscreteMeasure& bm_esd, double y, const RecoveryGrid& grid,
                              const RecoveryOptions& options) {
  check_x_grid(grid.x);
  require(y > 0.0 && std::isfinite(y), "aspect ratio y must be positive");
  const auto& z = grid.z.points();
  std::vector<cplx> target(z.size());
  Eigen::MatrixXcd basis(static_cast<Eigen::Index>(z.size()),
                         static_cast<Eigen::Index>(grid.x.size()));
  for (std::size_t j = 0; j < z.size(); ++j) {
    const cplx m_b = measures::stieltjes(bm_esd, z[j]);
    target[j] = m_b;
    const cplx factor = 1.0 - y * (1.0 + z[j] * m_b);
    for (std::size_t k = 0; k < grid.x.size(); ++k)
      basis(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) =
          1.0 / (grid.x[k] * factor - z[j]);
  }
  return fit(target, basis, grid.x, 0, options);
}

}  // namespace specdn::recovery
