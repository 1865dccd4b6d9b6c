#include "specdn/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "specdn/error.hpp"
#include "specdn/estimators.hpp"

namespace specdn::solvers {

using measures::Atom;
using measures::DiscreteMeasure;

namespace {

constexpr double kTrustedImag = 1.0;
constexpr double kMpMinImag = 0.5;
constexpr double kMaTolerance = 1e-10;
constexpr double kMpTolerance = 1e-12;
constexpr double kMTolerance = 1e-10;
constexpr double kTnTolerance = 1e-12;
// Fixed-point iterations hand over to Newton once the step residual is this small.
constexpr double kHandover = 1e-9;
constexpr int kNewtonSteps = 60;

bool finite(cplx v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); }

// Damped fixed point x <- (1-b) x + b psi(x), then Newton on x - psi(x).
template <typename Map, typename Derivative>
SolverReport fixed_point_then_newton(Map psi, Derivative dpsi, cplx start,
                                     const IterationOptions& options, double tolerance,
                                     const char* what) {
  cplx x = start;
  cplx best = x;
  double best_res = std::numeric_limits<double>::infinity();
  int iterations = 0;

  auto track = [&](cplx candidate, double res) {
    if (std::isfinite(res) && res < best_res) {
      best_res = res;
      best = candidate;
    }
  };

  for (; iterations < options.max_iterations; ++iterations) {
    const cplx fx = psi(x);
    const double res = std::abs(x - fx);
    if (!finite(fx) || !std::isfinite(res)) break;
    track(x, res);
    if (res <= kHandover * std::max(1.0, std::abs(x))) break;
    x = (1.0 - options.damping) * x + options.damping * fx;
  }

  x = best;
  for (int step = 0; step < kNewtonSteps; ++step) {
    ++iterations;
    const cplx g = x - psi(x);
    const double res = std::abs(g);
    track(x, res);
    if (res <= 1e-3 * tolerance) break;
    const cplx slope = 1.0 - dpsi(x);
    if (!finite(slope) || std::abs(slope) == 0.0) break;
    const cplx next = x - g / slope;
    if (!finite(next)) break;
    x = next;
  }
  track(x, std::abs(x - psi(x)));

  if (!(best_res <= tolerance)) throw ConvergenceError(what, best_res);
  return SolverReport{best, iterations, best_res, true};
}

double trapezoid_weight(int i, int n) { return (i == 0 || i == n) ? 0.5 / n : 1.0 / n; }

}  // namespace

ComplexGrid::ComplexGrid(std::vector<cplx> points) : points_(std::move(points)) {
  require(!points_.empty(), "complex grid must not be empty");
  for (const cplx& z : points_) {
    if (!(z.imag() >= kTrustedImag))
      fail(ErrorCode::domain, "complex grid point below the trusted half-plane Im z >= 1");
  }
}

cplx noisy_inversion_map(const DiscreteMeasure& f, cplx z, const NoisyInversionParams& params,
                         cplx xi) {
  const double s = params.sigma * params.sigma;
  const cplx a = 1.0 - params.y * s * xi;
  const cplx shift = -z * a + s * (params.y - 1.0);
  cplx sum{0.0, 0.0};
  for (const Atom& atom : f.atoms()) sum += atom.weight / (atom.location / a + shift);
  return sum;
}

bool in_noisy_inversion_domain(cplx z, const NoisyInversionParams& params, cplx xi) {
  const double s = params.sigma * params.sigma;
  const cplx a = 1.0 - params.y * s * xi;
  return (z * a * a - s * (params.y - 1.0) * a).imag() > 0.0;
}

SolverReport solve_mA(const DiscreteMeasure& f, cplx z, const NoisyInversionParams& params,
                      const IterationOptions& options) {
  if (!(z.imag() >= kTrustedImag))
    fail(ErrorCode::domain, "solve_mA requires Im z >= 1");
  require(params.sigma >= 0.0 && std::isfinite(params.sigma), "sigma must be nonnegative");
  require(params.y > 0.0 && std::isfinite(params.y), "aspect ratio y must be positive");

  const double s = params.sigma * params.sigma;
  auto psi = [&](cplx xi) { return noisy_inversion_map(f, z, params, xi); };
  auto dpsi = [&](cplx xi) {
    const cplx a = 1.0 - params.y * s * xi;
    const cplx shift = -z * a + s * (params.y - 1.0);
    const double ys = params.y * s;
    cplx sum{0.0, 0.0};
    for (const Atom& atom : f.atoms()) {
      const cplx den = atom.location / a + shift;
      sum -= atom.weight * ys * (atom.location / (a * a) + z) / (den * den);
    }
    return sum;
  };
  const cplx start = options.start.value_or(measures::stieltjes(f, z));
  SolverReport report = fixed_point_then_newton(psi, dpsi, start, options, kMaTolerance,
                                                "solve_mA did not converge");
  report.in_domain = in_noisy_inversion_domain(z, params, report.value);
  return report;
}

cplx mp_map(const DiscreteMeasure& h, cplx z, double y, cplx m) {
  const cplx factor = 1.0 - y * (1.0 + z * m);
  cplx sum{0.0, 0.0};
  for (const Atom& atom : h.atoms()) sum += atom.weight / (atom.location * factor - z);
  return sum;
}

SolverReport mp_forward(const DiscreteMeasure& h, cplx z, double y,
                        const IterationOptions& options) {
  if (!(z.imag() >= kMpMinImag)) fail(ErrorCode::domain, "mp_forward requires Im z >= 0.5");
  require(y > 0.0 && std::isfinite(y), "aspect ratio y must be positive");
  // Iterating on m directly can settle on a spurious root. The companion
  // transform u = -(1 - y)/z + y m satisfies u = -1/(z - y int tau/(1 + tau u) dH),
  // which has a unique solution in C+, so it is solved first.
  auto psi_u = [&](cplx u) {
    cplx s{0.0, 0.0};
    for (const Atom& atom : h.atoms()) s += atom.weight * atom.location / (1.0 + atom.location * u);
    return -1.0 / (z - y * s);
  };
  auto dpsi_u = [&](cplx u) {
    cplx s{0.0, 0.0}, s2{0.0, 0.0};
    for (const Atom& atom : h.atoms()) {
      const cplx den = 1.0 + atom.location * u;
      s += atom.weight * atom.location / den;
      s2 += atom.weight * atom.location * atom.location / (den * den);
    }
    const cplx d = z - y * s;
    return y * s2 / (d * d);
  };
  IterationOptions companion = options;
  companion.start = options.start ? std::optional<cplx>(-(1.0 - y) / z + y * *options.start)
                                  : std::optional<cplx>(-1.0 / z);
  const SolverReport u = fixed_point_then_newton(psi_u, dpsi_u, *companion.start, companion,
                                                 kMpTolerance, "mp_forward did not converge");

  auto psi = [&](cplx m) { return mp_map(h, z, y, m); };
  auto dpsi = [&](cplx m) {
    const cplx factor = 1.0 - y * (1.0 + z * m);
    cplx sum{0.0, 0.0};
    for (const Atom& atom : h.atoms()) {
      const cplx den = atom.location * factor - z;
      sum += atom.weight * atom.location * y * z / (den * den);
    }
    return sum;
  };
  IterationOptions polish = options;
  polish.max_iterations = 0;
  SolverReport report = fixed_point_then_newton(psi, dpsi, (u.value + (1.0 - y) / z) / y, polish,
                                                kMpTolerance, "mp_forward did not converge");
  report.iterations += u.iterations;
  report.in_domain = report.value.imag() > 0.0;
  return report;
}

cplx mp_point_mass_closed_form(double c, double y, cplx z) {
  const cplx qa = y * c * z;
  const cplx qb = z - c * (1.0 - y);
  if (c == 0.0) return -1.0 / z;
  const cplx disc = std::sqrt(qb * qb - 4.0 * qa);
  const cplx r1 = (-qb + disc) / (2.0 * qa);
  const cplx r2 = (-qb - disc) / (2.0 * qa);
  return r1.imag() > r2.imag() ? r1 : r2;
}

SolverReport solve_M(cplx z, cplx m_a, const simulate::VolPath& gamma_star, double y) {
  if (!(z.imag() >= kTrustedImag)) fail(ErrorCode::domain, "solve_M requires Im z >= 1");
  if (!(gamma_star.zeta > 0.0) || gamma_star.values.size() < 2)
    fail(ErrorCode::degenerate, "solve_M needs a volatility path with zeta > 0");
  require(y > 0.0, "aspect ratio y must be positive");

  const int n = gamma_star.steps();
  const cplx coupling = (1.0 / 3.0) * y * (1.0 / z + m_a);
  const cplx rhs = 1.0 - y - y * z * m_a;

  // Distinct squared values with accumulated trapezoid weights keep the
  // evaluation cost independent of n for piecewise-constant paths.
  std::vector<std::pair<double, double>> nodes;
  nodes.reserve(gamma_star.values.size());
  for (int i = 0; i <= n; ++i) {
    const double g2 = gamma_star.values[i] * gamma_star.values[i];
    nodes.emplace_back(g2, trapezoid_weight(i, n));
  }
  std::sort(nodes.begin(), nodes.end());
  std::vector<std::pair<double, double>> compact;
  for (const auto& node : nodes) {
    if (!compact.empty() && compact.back().first == node.first) {
      compact.back().second += node.second;
    } else {
      compact.push_back(node);
    }
  }

  auto residual_and_slope = [&](cplx m, cplx& f, cplx& slope) {
    f = -rhs;
    slope = 0.0;
    for (const auto& [g2, w] : compact) {
      const cplx c = g2 * coupling;
      const cplx den = m - c;
      f += w * m / den;
      slope -= w * c / (den * den);
    }
  };

  const cplx base = -gamma_star.zeta / (3.0 * z);
  std::vector<cplx> starts{base};
  for (int r = 0; r < 8; ++r) {
    const double angle = 2.0 * std::numbers::pi * r / 8.0;
    starts.push_back(base * (1.0 + 0.25 * std::polar(1.0, angle)));
  }
  starts.push_back(base * 2.0);
  starts.push_back(base * 0.5);

  double best_res = std::numeric_limits<double>::infinity();
  SolverReport best_report;
  int total_iterations = 0;
  for (const cplx& start : starts) {
    cplx m = start;
    for (int step = 0; step < 200; ++step) {
      ++total_iterations;
      cplx f, slope;
      residual_and_slope(m, f, slope);
      const double res = std::abs(f);
      if (!std::isfinite(res)) break;
      const cplx mtilde = -(1.0 / z + m_a) / m;
      const bool domain = m.imag() > 0.0 && mtilde.imag() > 0.0;
      // Prefer in-domain roots; among equals keep the smaller residual.
      const bool better = (domain && !best_report.in_domain) ||
                          (domain == best_report.in_domain && res < best_res);
      if (better) {
        best_res = res;
        best_report = SolverReport{m, total_iterations, res, domain};
      }
      if (res <= 1e-3 * kMTolerance) break;
      if (std::abs(slope) == 0.0) break;
      const cplx next = m - f / slope;
      if (!finite(next)) break;
      m = next;
    }
    if (best_res <= kMTolerance && best_report.in_domain) break;
  }
  best_report.iterations = total_iterations;
  if (!(best_res <= kMTolerance))
    throw ConvergenceError("solve_M Newton iterations diverged", best_res);
  return best_report;
}

cplx mA_from_H(const DiscreteMeasure& h, cplx m, double zeta, cplx z) {
  if (!(z.imag() > 0.0)) fail(ErrorCode::domain, "lower half-plane");
  cplx sum{0.0, 0.0};
  for (const Atom& atom : h.atoms()) {
    const cplx den = atom.location * m + zeta;
    if (den == cplx{0.0, 0.0}) fail(ErrorCode::domain, "tau M + zeta vanishes");
    sum += atom.weight * zeta / den;
  }
  return -sum / z;
}

cplx mtilde_from_H(const DiscreteMeasure& h, cplx m, double zeta, cplx z) {
  if (!(z.imag() > 0.0)) fail(ErrorCode::domain, "lower half-plane");
  cplx sum{0.0, 0.0};
  for (const Atom& atom : h.atoms()) {
    const cplx den = atom.location * m + zeta;
    if (den == cplx{0.0, 0.0}) fail(ErrorCode::domain, "tau M + zeta vanishes");
    sum += atom.weight * atom.location / den;
  }
  return -sum / z;
}

cplx M_from_mtilde(cplx mtilde, const simulate::VolPath& gamma_star, double y, cplx z) {
  const int n = gamma_star.steps();
  cplx sum{0.0, 0.0};
  for (int i = 0; i <= n; ++i) {
    const double g2 = gamma_star.values[i] * gamma_star.values[i] / 3.0;
    sum += trapezoid_weight(i, n) * g2 / (1.0 + y * mtilde * g2);
  }
  return -sum / z;
}

double contraction_threshold(const DiscreteMeasure& f_s, double sigma, double y) {
  return 2.0 * (sigma + 1.0) * std::sqrt((y + 1.0) * (f_s.max_location() + 1.0));
}

cplx tn_map(const DiscreteMeasure& f_s, cplx z, double sigma, double y, cplx t) {
  const cplx w = z - t * sigma * sigma;
  if (!(w.imag() > 0.0)) fail(ErrorCode::domain, "z - t sigma^2 left the upper half-plane");
  return y - 1.0 + y * w * measures::stieltjes(f_s, w);
}

SolverReport solve_tn(const DiscreteMeasure& f_s, cplx z, double sigma, double y,
                      const TnOptions& options) {
  require(sigma >= 0.0 && y > 0.0, "solve_tn needs sigma >= 0 and y > 0");
  if (options.enforce_contraction_region && z.imag() < contraction_threshold(f_s, sigma, y))
    fail(ErrorCode::domain, "outside contraction region");
  if (!(z.imag() > 0.0)) fail(ErrorCode::domain, "lower half-plane");

  const double s = sigma * sigma;
  auto psi = [&](cplx t) {
    const cplx w = z - t * s;
    if (!(w.imag() > 0.0)) return cplx{std::nan(""), std::nan("")};
    return y - 1.0 + y * w * measures::stieltjes(f_s, w);
  };
  auto dpsi = [&](cplx t) {
    const cplx w = z - t * s;
    cplx m{0.0, 0.0}, dm{0.0, 0.0};
    for (const Atom& atom : f_s.atoms()) {
      const cplx inv = 1.0 / (atom.location - w);
      m += atom.weight * inv;
      dm += atom.weight * inv * inv;
    }
    return -y * s * (m + w * dm);
  };
  IterationOptions it;
  it.max_iterations = options.max_iterations;
  it.damping = 1.0;
  const cplx start = y - 1.0 + y * z * measures::stieltjes(f_s, z);
  SolverReport report =
      fixed_point_then_newton(psi, dpsi, start, it, kTnTolerance, "solve_tn did not converge");
  const double upper = z.imag() / (2.0 * (sigma + 1.0) * (sigma + 1.0));
  report.in_domain = report.value.imag() >= 0.0 && report.value.imag() <= upper;
  return report;
}

Prop31Evaluation prop31_evaluate(const Eigen::MatrixXd& a, const Eigen::MatrixXd& s, cplx z,
                                 double sigma, const TnOptions& options) {
  const Eigen::Index p = a.rows();
  const Eigen::Index n = a.cols();
  require(s.rows() == p && s.cols() == p, "S must be p x p");
  const double y = static_cast<double>(p) / static_cast<double>(n);

  const auto s_eigs = estimators::sym_eigenvalues(s);
  const DiscreteMeasure f_s =
      measures::esd_from_eigenvalues(s_eigs, static_cast<std::size_t>(p));
  const Eigen::MatrixXd signal = a * a.transpose() / static_cast<double>(n);
  const auto a_eigs = estimators::sym_eigenvalues(signal);

  const SolverReport tn = solve_tn(f_s, z, sigma, y, options);
  const cplx w = z - tn.value * sigma * sigma;
  const cplx m_s = measures::stieltjes(f_s, w);
  const cplx delta = y * sigma * sigma * m_s;

  cplx lhs{0.0, 0.0};
  for (double lambda : a_eigs) lhs += 1.0 / (lambda / (1.0 + delta) - z);
  lhs /= static_cast<double>(p);
  return Prop31Evaluation{std::abs(lhs - m_s), tn.value, delta};
}

double prop31_residual(const Eigen::MatrixXd& a, const Eigen::MatrixXd& s, cplx z, double sigma,
                       const TnOptions& options) {
  return prop31_evaluate(a, s, z, sigma, options).residual;
}

}  // namespace specdn::solvers
