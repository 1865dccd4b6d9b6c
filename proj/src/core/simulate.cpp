#include "specdn/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "specdn/error.hpp"
#include "specdn/rng.hpp"

namespace specdn::simulate {

using Eigen::MatrixXd;
using Eigen::VectorXd;

VolPath make_vol_path(std::vector<double> values, double bound) {
  require(values.size() >= 3, "volatility path needs at least two steps");
  for (double g : values) {
    if (!std::isfinite(g)) fail(ErrorCode::invalid_argument, "volatility path is not finite");
    if (std::abs(g) > bound)
      fail(ErrorCode::invalid_argument, "volatility path exceeds its configured bound");
  }
  const double n = static_cast<double>(values.size() - 1);
  double acc = 0.0;
  for (std::size_t i = 1; i < values.size(); ++i)
    acc += 0.5 * (values[i - 1] * values[i - 1] + values[i] * values[i]);
  VolPath path{std::move(values), acc / n};
  if (!(path.zeta > 0.0)) fail(ErrorCode::invalid_argument, "volatility path has zeta = 0");
  return path;
}

double interval_square_integral(const VolPath& vol, int j) {
  require(j >= 1 && j <= vol.steps(), "step index out of range");
  const double a = vol.values[j - 1];
  const double b = vol.values[j];
  return 0.5 * (a * a + b * b) / vol.steps();
}

double u_shape_mean(double t) noexcept {
  return 2.0 * std::sqrt(0.0009 + 0.0008 * std::cos(2.0 * std::numbers::pi * t));
}

VolPath simulate_gamma_path(const GammaParams& params, std::span<const double> driver_normals) {
  const int n = static_cast<int>(driver_normals.size());
  require(n >= 2, "gamma path needs n >= 2");
  const double dt = 1.0 / n;
  const double sqrt_dt = std::sqrt(dt);
  std::vector<double> g(n + 1);
  g[0] = u_shape_mean(0.0);
  for (int i = 1; i <= n; ++i) {
    const double t_prev = (i - 1) * dt;
    g[i] = g[i - 1] - params.rho * (g[i - 1] - u_shape_mean(t_prev)) * dt +
           params.sigma_ou * sqrt_dt * driver_normals[i - 1];
  }
  return make_vol_path(std::move(g), params.bound);
}

VolPath simulate_gamma_path(int n, double rho, double sigma_ou, std::uint64_t seed,
                            double bound) {
  require(n >= 2, "gamma path needs n >= 2");
  const rng::Stream stream(seed, rng::Purpose::gamma_driver);
  std::vector<double> normals(n);
  for (int i = 0; i < n; ++i) normals[i] = stream.normal(static_cast<std::uint64_t>(i));
  return simulate_gamma_path(GammaParams{rho, sigma_ou, bound}, normals);
}

namespace {

std::vector<double> draw_spectrum(int p, const SpectrumSpec& spectrum, std::uint64_t seed) {
  if (const auto* explicit_values = std::get_if<std::vector<double>>(&spectrum)) {
    require(static_cast<int>(explicit_values->size()) == p,
            "explicit spectrum length must equal p");
    for (double d : *explicit_values) {
      if (!(d >= 0.0) || !std::isfinite(d))
        fail(ErrorCode::invalid_argument, "explicit spectrum has a negative entry");
    }
    return *explicit_values;
  }
  // Beta(1,3) by inversion: F(x) = 1 - (1 - x)^3.
  const rng::Stream stream(seed, rng::Purpose::spectrum);
  std::vector<double> d(p);
  for (int i = 0; i < p; ++i) d[i] = 1.0 - std::cbrt(stream.uniform(static_cast<std::uint64_t>(i)));
  return d;
}

MatrixXd haar_orthogonal(int p, std::uint64_t seed) {
  MatrixXd g(p, p);
  for (int i = 0; i < p; ++i) {
    const rng::Stream stream(seed, rng::Purpose::orthogonal, static_cast<std::uint32_t>(i));
    for (int j = 0; j < p; ++j) g(i, j) = stream.normal(static_cast<std::uint64_t>(j));
  }
  Eigen::HouseholderQR<MatrixXd> qr(g);
  MatrixXd q = qr.householderQ() * MatrixXd::Identity(p, p);
  const MatrixXd& r = qr.matrixQR();
  for (int j = 0; j < p; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

}  // namespace

CovolFactor build_covol_factor(int p, const SpectrumSpec& spectrum, bool normalize_trace,
                               std::uint64_t seed) {
  require(p >= 1, "p must be positive");
  std::vector<double> d = draw_spectrum(p, spectrum, seed);
  if (normalize_trace) {
    double trace = 0.0;
    for (double v : d) trace += v;
    require(trace > 0.0, "cannot normalize the trace of a zero spectrum");
    for (double& v : d) v *= p / trace;
  }
  const MatrixXd u = haar_orthogonal(p, seed);
  VectorXd root(p), diag(p);
  for (int i = 0; i < p; ++i) {
    diag[i] = d[i];
    root[i] = std::sqrt(d[i]);
  }
  MatrixXd lambda = u * root.asDiagonal() * u.transpose();
  lambda = 0.5 * (lambda + lambda.transpose()).eval();
  MatrixXd sigma_breve = u * diag.asDiagonal() * u.transpose();
  sigma_breve = 0.5 * (sigma_breve + sigma_breve.transpose()).eval();
  return CovolFactor{std::move(lambda), std::move(sigma_breve),
                     measures::esd_from_eigenvalues(d, static_cast<std::size_t>(p))};
}

MatrixXd draw_brownian_normals(int p, int n, std::uint64_t seed) {
  MatrixXd z(p, n);
  for (int a = 0; a < p; ++a) {
    const rng::Stream stream(seed, rng::Purpose::price_increments, static_cast<std::uint32_t>(a));
    for (int i = 0; i + 1 < n; i += 2) {
      const auto pair = stream.normal_pair(static_cast<std::uint64_t>(i / 2));
      z(a, i) = pair[0];
      z(a, i + 1) = pair[1];
    }
    if (n % 2 == 1) z(a, n - 1) = stream.normal(static_cast<std::uint64_t>(n - 1));
  }
  return z;
}

std::vector<double> aggregate_driver(const MatrixXd& normals) {
  const double inv_sqrt_p = 1.0 / std::sqrt(static_cast<double>(normals.rows()));
  std::vector<double> out(normals.cols());
  for (Eigen::Index i = 0; i < normals.cols(); ++i) out[i] = normals.col(i).sum() * inv_sqrt_p;
  return out;
}

MatrixXd simulate_prices(const CovolFactor& factor, const VolPath& vol,
                         std::span<const double> drift, const MatrixXd& normals) {
  const Eigen::Index p = factor.lambda.rows();
  const int n = vol.steps();
  if (normals.rows() != p || normals.cols() != n)
    fail(ErrorCode::invalid_argument, "dimension mismatch between factor, path and normals");
  if (!drift.empty() && static_cast<Eigen::Index>(drift.size()) != p)
    fail(ErrorCode::invalid_argument, "drift length must equal p");

  MatrixXd increments = factor.lambda * normals;  // p x n
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
  MatrixXd x(p, n + 1);
  x.col(0).setZero();
  for (int i = 1; i <= n; ++i) {
    x.col(i) = x.col(i - 1) + (vol.values[i - 1] * inv_sqrt_n) * increments.col(i - 1);
    if (!drift.empty()) {
      for (Eigen::Index a = 0; a < p; ++a) x(a, i) += drift[a] / n;
    }
  }
  return x;
}

MatrixXd simulate_prices(const CovolFactor& factor, const VolPath& vol,
                         std::span<const double> drift, std::uint64_t seed) {
  return simulate_prices(factor, vol, drift,
                         draw_brownian_normals(static_cast<int>(factor.lambda.rows()),
                                               vol.steps(), seed));
}

ClassCSample simulate_class_c(const CovolFactor& factor, const GammaParams& gamma, int n,
                              std::span<const double> drift, std::uint64_t seed) {
  MatrixXd z = draw_brownian_normals(static_cast<int>(factor.lambda.rows()), n, seed);
  VolPath vol = simulate_gamma_path(gamma, aggregate_driver(z));
  MatrixXd latent = simulate_prices(factor, vol, drift, z);
  return {std::move(vol), std::move(latent)};
}

PricePanel add_noise(const MatrixXd& latent, const NoiseSpec& spec, std::uint64_t seed) {
  const Eigen::Index p = latent.rows();
  const Eigen::Index cols = latent.cols();
  if (static_cast<Eigen::Index>(spec.variances.size()) != p)
    fail(ErrorCode::invalid_argument, "noise variances must have one entry per asset");
  if (spec.model == NoiseModel::ar1 && !(std::abs(spec.phi) < 1.0))
    fail(ErrorCode::invalid_argument, "AR(1) noise needs |phi| < 1");

  PricePanel panel{latent, latent, spec};
  for (Eigen::Index a = 0; a < p; ++a) {
    const double var = spec.variances[a];
    if (var < 0.0) fail(ErrorCode::invalid_argument, "noise variance must be nonnegative");
    if (var == 0.0) continue;
    const double sd = std::sqrt(var);
    const rng::Stream stream(seed, rng::Purpose::noise, static_cast<std::uint32_t>(a));
    if (spec.model == NoiseModel::iid) {
      for (Eigen::Index t = 0; t < cols; ++t)
        panel.observed(a, t) += sd * stream.normal(static_cast<std::uint64_t>(t));
    } else {
      const double innovation_sd = sd * std::sqrt(1.0 - spec.phi * spec.phi);
      double eps = sd * stream.normal(0);
      panel.observed(a, 0) += eps;
      for (Eigen::Index t = 1; t < cols; ++t) {
        eps = spec.phi * eps + innovation_sd * stream.normal(static_cast<std::uint64_t>(t));
        panel.observed(a, t) += eps;
      }
    }
  }
  return panel;
}

IcvTruth icv_true(const CovolFactor& factor, const VolPath& vol) {
  return IcvTruth{vol.zeta * factor.sigma_breve, measures::scale_measure(factor.esd, vol.zeta)};
}

double pav_weight_oracle(const VolPath& vol, int n, int k, int i) {
  require(k >= 1 && n == vol.steps(), "window and path length are inconsistent");
  const int m = n / (2 * k);
  if (i < 1 || i > m) fail(ErrorCode::invalid_argument, "pre-averaging block index out of range");
  double w = 0.0;
  for (int j = -(k - 1); j <= k - 1; ++j) {
    const double kernel = 1.0 - std::abs(j) / static_cast<double>(k);
    w += kernel * kernel * interval_square_integral(vol, (2 * i - 1) * k + j);
  }
  return w;
}

}  // namespace specdn::simulate
