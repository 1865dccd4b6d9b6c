#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "specdn/error.hpp"
#include "specdn/measures.hpp"
#include "specdn/simulate.hpp"
#include "specdn/solvers.hpp"

namespace specdn::recovery {

using cplx = std::complex<double>;

/// Candidate atom locations x (ascending, >= 0) and evaluation points z.
struct RecoveryGrid {
  std::vector<double> x;
  solvers::ComplexGrid z;
};

/// x_k = (k-1) lambda_max / (K-1), k = 1..K.
std::vector<double> build_x_grid(double lambda_max, int k);

/// Cartesian product of j_re equally spaced real parts and j_im equally
/// spaced imaginary parts; a single point per axis sits at the range start.
solvers::ComplexGrid build_z_grid(int j_re, int j_im, std::array<double, 2> re_range = {-20.0, 0.0},
                                  std::array<double, 2> im_range = {1.0, 20.0});

// Linear programming ----------------------------------------------------------

/// min c^T x subject to a_ub x <= b_ub, a_eq x = b_eq, x >= 0.
struct LinearProgram {
  Eigen::VectorXd c;
  Eigen::MatrixXd a_ub;
  Eigen::VectorXd b_ub;
  Eigen::MatrixXd a_eq;
  Eigen::VectorXd b_eq;
};

struct LinearProgramSolution {
  Eigen::VectorXd x;
  double objective = 0.0;
  int pivots = 0;
  // Multipliers y of the inequality rows then the equality rows, so that
  // c - A^T y is the reduced-cost vector (y <= 0 on inequality rows).
  Eigen::VectorXd duals;
};

/// Two-phase dense tableau simplex with Bland's rule. Throws
/// PivotLimitError once `pivot_limit` pivots have been spent.
LinearProgramSolution solve_linear_program(const LinearProgram& lp, int pivot_limit = 200000);

/// Residuals e_j(w) = target_j - sum_k w_k basis(j, k).
struct LpProblem {
  std::vector<cplx> target;
  Eigen::MatrixXcd basis;  // J x K
};

struct LpResult {
  std::vector<double> weights;
  double objective = 0.0;
  int pivots = 0;
};

class PivotLimitError : public Error {
 public:
  PivotLimitError(const std::string& what, LpResult incumbent)
      : Error(ErrorCode::not_converged, what), incumbent_(std::move(incumbent)) {}
  const LpResult& incumbent() const noexcept { return incumbent_; }

 private:
  LpResult incumbent_;
};

/// max_j max(|Re e_j(w)|, |Im e_j(w)|).
double minmax_objective(const LpProblem& problem, const std::vector<double>& weights);

/// argmin_w max_j max(|Re e_j|, |Im e_j|) over the probability simplex, via
/// the epigraph LP in (w, u). Weights are clamped at
/// zero and renormalized; the objective is recomputed from the returned
/// weights.
LpResult solve_minmax_lp(const LpProblem& problem, int pivot_limit = 200000);

// Pipelines -------------------------------------------------------------------

struct RecoveryOptions {
  int jobs = 1;
  // Fraction of z points whose solve must succeed before the LP runs.
  double min_fraction = 0.9;
  int pivot_limit = 200000;
};

struct RecoveryResult {
  measures::DiscreteMeasure measure;
  double objective = 0.0;
  int dropped_points = 0;
};

struct Step1Result {
  RecoveryResult recovery;
  // m_A estimates per z point; empty where the solve failed.
  std::vector<std::optional<cplx>> m_a;
};

/// Solves for m_A at each z point from the PAV spectrum and fits atoms on x.
Step1Result recover_step1(const measures::DiscreteMeasure& pav_esd,
                          const solvers::NoisyInversionParams& params, const RecoveryGrid& grid,
                          const RecoveryOptions& options = {});

/// Solves for M at each usable z point and fits the spectrum through
/// m_A(z) = -(1/z) int zeta / (tau M + zeta) dH(tau).
RecoveryResult recover_step2(const std::vector<std::optional<cplx>>& m_a,
                             const solvers::ComplexGrid& z_grid,
                             const simulate::VolPath& gamma_star, double y,
                             const std::vector<double>& x_grid,
                             const RecoveryOptions& options = {});

/// Fits the Marcenko-Pastur equation with the empirical transform of B_m
/// plugged in.
RecoveryResult recover_direct(const measures::DiscreteMeasure& bm_esd, double y,
                              const RecoveryGrid& grid, const RecoveryOptions& options = {});

/// Runs body(i) for i in [0, count) on up to `jobs` threads. The first
/// exception thrown by any task is rethrown after all workers finish.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& body);

}  // namespace specdn::recovery
