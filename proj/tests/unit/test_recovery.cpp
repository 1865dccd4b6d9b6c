#include <doctest.h>

#include <atomic>
#include <cmath>
#include <numeric>

#include "specdn/error.hpp"
#include "specdn/experiment.hpp"
#include "specdn/recovery.hpp"

using namespace specdn;
using namespace specdn::recovery;
using measures::DiscreteMeasure;

TEST_CASE("grids") {
  const auto x = build_x_grid(2.0, 5);
  CHECK(x == std::vector<double>{0.0, 0.5, 1.0, 1.5, 2.0});
  const auto z = build_z_grid(3, 2);
  REQUIRE(z.points().size() == 6);
  CHECK(z.points()[0] == cplx{-20.0, 1.0});
  CHECK(z.points()[1] == cplx{-20.0, 20.0});
  CHECK(z.points()[5] == cplx{0.0, 20.0});
  CHECK(build_z_grid(1, 1).points()[0] == cplx{-20.0, 1.0});
  CHECK_THROWS_AS(build_z_grid(2, 2, {-1.0, 0.0}, {0.5, 2.0}), Error);
  CHECK_THROWS_AS(build_x_grid(0.0, 5), Error);
}

TEST_CASE("textbook linear program with duals") {
  // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18.
  LinearProgram lp;
  lp.c = Eigen::Vector2d(-3.0, -5.0);
  lp.a_ub.resize(3, 2);
  lp.a_ub << 1, 0, 0, 2, 3, 2;
  lp.b_ub = Eigen::Vector3d(4, 12, 18);
  const LinearProgramSolution s = solve_linear_program(lp);
  CHECK(s.x(0) == doctest::Approx(2.0));
  CHECK(s.x(1) == doctest::Approx(6.0));
  CHECK(s.objective == doctest::Approx(-36.0));
  CHECK(s.duals(0) == doctest::Approx(0.0));
  CHECK(s.duals(1) == doctest::Approx(-1.5));
  CHECK(s.duals(2) == doctest::Approx(-1.0));
}

TEST_CASE("equalities, negative right-hand sides and failures") {
  // min x + 2y s.t. x + y = 3, -x <= -1 (x >= 1).
  LinearProgram lp;
  lp.c = Eigen::Vector2d(1.0, 2.0);
  lp.a_ub = Eigen::RowVector2d(-1.0, 0.0);
  lp.b_ub = Eigen::VectorXd::Constant(1, -1.0);
  lp.a_eq = Eigen::RowVector2d(1.0, 1.0);
  lp.b_eq = Eigen::VectorXd::Constant(1, 3.0);
  const LinearProgramSolution s = solve_linear_program(lp);
  CHECK(s.x(0) == doctest::Approx(3.0));
  CHECK(s.objective == doctest::Approx(3.0));

  LinearProgram infeasible = lp;
  infeasible.b_ub(0) = -5.0;
  CHECK_THROWS_AS(solve_linear_program(infeasible), Error);

  LinearProgram unbounded;
  unbounded.c = Eigen::Vector2d(-1.0, 0.0);
  unbounded.a_ub = Eigen::RowVector2d(0.0, 1.0);
  unbounded.b_ub = Eigen::VectorXd::Constant(1, 1.0);
  CHECK_THROWS_AS(solve_linear_program(unbounded), Error);

  CHECK_THROWS_AS(solve_linear_program(lp, 0), PivotLimitError);
}

TEST_CASE("two atoms and one residual are recovered exactly") {
  const std::vector<double> x{0.5, 2.0};
  const cplx z{-1.0, 2.0};
  LpProblem p;
  p.basis.resize(1, 2);
  p.basis(0, 0) = 1.0 / (x[0] - z);
  p.basis(0, 1) = 1.0 / (x[1] - z);
  p.target = {0.3 / (x[0] - z) + 0.7 / (x[1] - z)};
  const LpResult r = solve_minmax_lp(p);
  CHECK(r.objective < 1e-12);
  CHECK(r.weights[0] == doctest::Approx(0.3).epsilon(1e-9));
  CHECK(r.weights[1] == doctest::Approx(0.7).epsilon(1e-9));
}

TEST_CASE("min-max lp against grid search") {
  for (std::uint32_t i = 0; i < 10; ++i) {
    const LpProblem p = experiment::random_lp_instance(5, i);
    const LpResult r = solve_minmax_lp(p);
    CHECK(std::accumulate(r.weights.begin(), r.weights.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    for (double w : r.weights) CHECK(w >= 0.0);
    CHECK(r.objective == doctest::Approx(minmax_objective(p, r.weights)));
    double best = 1e300;
    for (int a = 0; a <= 400; ++a)
      for (int b = 0; a + b <= 400; ++b)
        best = std::min(best, minmax_objective(p, {a / 400.0, b / 400.0, (400 - a - b) / 400.0}));
    CHECK(r.objective <= best + 1e-12);
    CHECK(best - r.objective < 5e-3);
  }
}

TEST_CASE("pivot limit hands back a feasible incumbent") {
  const LpProblem p = experiment::random_lp_instance(5, 3);
  try {
    solve_minmax_lp(p, 1);
    FAIL("expected the pivot limit to trip");
  } catch (const PivotLimitError& e) {
    const auto& w = e.incumbent().weights;
    REQUIRE(w.size() == 3);
    CHECK(std::accumulate(w.begin(), w.end(), 0.0) == doctest::Approx(1.0));
  }
}

TEST_CASE("noiseless step one fits a measure on the grid") {
  RecoveryGrid grid{build_x_grid(4.0, 9), build_z_grid(4, 4, {-5.0, 0.0}, {1.0, 5.0})};
  const DiscreteMeasure truth = DiscreteMeasure::from_atoms({{1.0, 0.25}, {2.5, 0.5}, {4.0, 0.25}});
  const Step1Result r = recover_step1(truth, {0.0, 0.5}, grid);
  CHECK(r.recovery.dropped_points == 0);
  CHECK(r.recovery.objective < 1e-9);
  for (cplx z : grid.z.points())
    CHECK(std::abs(measures::stieltjes(r.recovery.measure, z) - measures::stieltjes(truth, z)) < 1e-8);
}

TEST_CASE("too few solved points trip the threshold") {
  const auto z = build_z_grid(2, 2);
  const std::vector<std::optional<cplx>> none(4);
  const simulate::VolPath gamma = simulate::make_vol_path({1.0, 1.0, 1.0}, 2.0);
  try {
    recover_step2(none, z, gamma, 0.5, build_x_grid(1.0, 4));
    FAIL("expected a threshold error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::solver_threshold);
  }
}

TEST_CASE("direct-route basis fits its own forward map") {
  // With m_B produced by the forward map of H, the LP target is consistent
  // with H itself.
  RecoveryGrid grid{build_x_grid(2.0, 5), build_z_grid(3, 3, {-4.0, 0.0}, {1.0, 4.0})};
  const DiscreteMeasure h = DiscreteMeasure::from_atoms({{0.5, 0.5}, {1.5, 0.5}});
  std::vector<cplx> m(grid.z.points().size());
  LpProblem p;
  p.basis.resize(static_cast<Eigen::Index>(m.size()), 5);
  for (std::size_t j = 0; j < m.size(); ++j) {
    const cplx z = grid.z.points()[j];
    m[j] = solvers::mp_forward(h, z, 0.3).value;
    p.target.push_back(m[j]);
    for (int k = 0; k < 5; ++k)
      p.basis(static_cast<Eigen::Index>(j), k) = 1.0 / (grid.x[static_cast<std::size_t>(k)] * (1.0 - 0.3 * (1.0 + z * m[j])) - z);
  }
  const LpResult r = solve_minmax_lp(p);
  CHECK(r.objective < 1e-10);
}

TEST_CASE("parallel_for covers every index and rethrows") {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i]++; });
  for (auto& h : hits) CHECK(h.load() == 1);
  CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) {
                    if (i == 7) throw Error(ErrorCode::degenerate, "boom");
                  }),
                  Error);
}
