#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <vector>

#include "specdn/measures.hpp"
#include "specdn/simulate.hpp"

namespace specdn::solvers {

using cplx = std::complex<double>;

/// Evaluation points in the trusted half-plane Im z >= 1.
class ComplexGrid {
 public:
  explicit ComplexGrid(std::vector<cplx> points);

  const std::vector<cplx>& points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }

 private:
  std::vector<cplx> points_;
};

/// Noise scale sigma and aspect ratio y of the information-plus-noise model
/// S = (1/n)(A + sigma eps)(A + sigma eps)^T, y = p/n.
struct NoisyInversionParams {
  double sigma = 0.0;
  double y = 1.0;
};

struct SolverReport {
  cplx value{};
  int iterations = 0;
  double residual = 0.0;
  bool in_domain = false;
};

struct IterationOptions {
  int max_iterations = 10000;
  double damping = 0.5;
  std::optional<cplx> start;
};

// Information-plus-noise inversion ------------------------------------------

/// Right-hand side of the m_A equation:
/// int dF(tau) / (tau/(1 - y s xi) - z (1 - y s xi) + s (y - 1)), s = sigma^2.
cplx noisy_inversion_map(const measures::DiscreteMeasure& f, cplx z,
                         const NoisyInversionParams& params, cplx xi);

/// Membership of xi in the uniqueness domain
/// { z (1 - y s xi)^2 - s (y - 1)(1 - y s xi) in C+ }.
bool in_noisy_inversion_domain(cplx z, const NoisyInversionParams& params, cplx xi);

/// Solves xi = noisy_inversion_map(F, z, params, xi) by damped fixed-point
/// iteration from stieltjes(F, z), polished by complex Newton. Residual
/// <= 1e-10 or ConvergenceError. Requires Im z >= 1. A root outside the
/// uniqueness domain is returned with in_domain = false.
SolverReport solve_mA(const measures::DiscreteMeasure& f, cplx z,
                      const NoisyInversionParams& params, const IterationOptions& options = {});

// Marcenko-Pastur -----------------------------------------------------------

cplx mp_map(const measures::DiscreteMeasure& h, cplx z, double y, cplx m);

/// m = int dH(tau) / (tau (1 - y (1 + z m)) - z), via the companion transform
/// -(1 - y)/z + y m from -1/z, then Newton on m; residual
/// <= 1e-12, Im m > 0. Requires Im z >= 0.5.
SolverReport mp_forward(const measures::DiscreteMeasure& h, cplx z, double y,
                        const IterationOptions& options = {});

/// Root of y c z m^2 + (z - c (1 - y)) m + 1 = 0 with Im m > 0: the MP
/// transform for a point-mass population at c.
cplx mp_point_mass_closed_form(double c, double y, cplx z);

// Time-varying volatility reduction -----------------------------------------

/// Solves int_0^1 M / (M - (1/3) gamma_s^2 y (1/z + m_A)) ds = 1 - y - y z m_A
/// by Newton from M0 = -zeta / (3z) with perturbed restarts; the path
/// integral is the trapezoid rule on the gamma grid. in_domain reports
/// Im M > 0 and Im m~ > 0 with m~ = -(1/z + m_A)/M.
SolverReport solve_M(cplx z, cplx m_a, const simulate::VolPath& gamma_star, double y);

/// -(1/z) int zeta / (tau M + zeta) dH(tau).
cplx mA_from_H(const measures::DiscreteMeasure& h, cplx m, double zeta, cplx z);

/// m~(z) = -(1/z) int tau / (tau M + zeta) dH(tau).
cplx mtilde_from_H(const measures::DiscreteMeasure& h, cplx m, double zeta, cplx z);

/// M(z) = -(1/z) int (1/3) gamma_s^2 / (1 + y m~ (1/3) gamma_s^2) ds.
cplx M_from_mtilde(cplx mtilde, const simulate::VolPath& gamma_star, double y, cplx z);

// Finite-n fixed point t_n ---------------------------------------------------

struct TnOptions {
  // When set, Im z below K* = 2(sigma+1) sqrt((y+1)(b+1)) is rejected.
  bool enforce_contraction_region = true;
  int max_iterations = 10000;
};

double contraction_threshold(const measures::DiscreteMeasure& f_s, double sigma, double y);

/// G(t) = y - 1 + y (z - t s) m_{F_S}(z - t s), s = sigma^2.
cplx tn_map(const measures::DiscreteMeasure& f_s, cplx z, double sigma, double y, cplx t);

/// Fixed point of tn_map by Banach iteration (Newton polish), residual
/// <= 1e-12. in_domain: 0 <= Im t <= Im z / (2 (sigma+1)^2).
SolverReport solve_tn(const measures::DiscreteMeasure& f_s, cplx z, double sigma, double y,
                      const TnOptions& options = {});

struct Prop31Evaluation {
  double residual = 0.0;
  cplx t{};
  cplx delta{};
};

/// |(1/p) tr(calA/(1+delta) - z)^{-1} - (1/p) tr(S - (z - t sigma^2))^{-1}|
/// with calA = A A^T / n, t from solve_tn, delta = y sigma^2 (1/p) tr(...)^{-1}.
Prop31Evaluation prop31_evaluate(const Eigen::MatrixXd& a, const Eigen::MatrixXd& s, cplx z,
                                 double sigma, const TnOptions& options = {});
double prop31_residual(const Eigen::MatrixXd& a, const Eigen::MatrixXd& s, cplx z, double sigma,
                       const TnOptions& options = {});

}  // namespace specdn::solvers
