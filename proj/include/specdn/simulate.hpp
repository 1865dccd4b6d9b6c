#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "specdn/measures.hpp"

namespace specdn::simulate {

/// Scalar volatility factor gamma sampled at t_i = i/n, i = 0..n, with
/// zeta = int_0^1 gamma_t^2 dt by the trapezoid rule on the grid.
struct VolPath {
  std::vector<double> values;
  double zeta = 0.0;

  int steps() const noexcept { return static_cast<int>(values.size()) - 1; }
};

/// Builds a VolPath from grid values; rejects |gamma| > bound and zeta <= 0.
VolPath make_vol_path(std::vector<double> values, double bound);

/// Squared-gamma integral over [(j-1)/n, j/n] by the trapezoid rule.
double interval_square_integral(const VolPath& vol, int j);

/// U-shaped intraday mean 2 sqrt(0.0009 + 0.0008 cos(2 pi t)).
double u_shape_mean(double t) noexcept;

struct GammaParams {
  double rho = 10.0;
  double sigma_ou = 0.05;
  double bound = 1.0;  // C2 in |gamma_t| <= C2
};

/// Euler-Maruyama for d gamma = -rho (gamma - mu_t) dt + sigma dW at step 1/n,
/// gamma_0 = mu_0, driven by its own Brownian motion.
VolPath simulate_gamma_path(int n, double rho, double sigma_ou, std::uint64_t seed,
                            double bound = GammaParams{}.bound);

/// Same scheme driven by given standard normals (one per step); the price
/// simulation uses this with the cross-sectional average of its own
/// increments, so gamma depends on every component of W.
VolPath simulate_gamma_path(const GammaParams& params, std::span<const double> driver_normals);

struct Beta13 {};
using SpectrumSpec = std::variant<Beta13, std::vector<double>>;

/// Lambda, Sigma_breve = Lambda Lambda^T and the ESD of Sigma_breve.
struct CovolFactor {
  Eigen::MatrixXd lambda;
  Eigen::MatrixXd sigma_breve;
  measures::DiscreteMeasure esd;
};

/// Sigma_breve = U D U^T with U Haar-orthogonal (QR of a Gaussian matrix,
/// R diagonal made positive) and Lambda = U D^{1/2} U^T. With normalize_trace
/// the spectrum is rescaled so that tr(Sigma_breve) = p.
CovolFactor build_covol_factor(int p, const SpectrumSpec& spectrum, bool normalize_trace,
                               std::uint64_t seed);

/// p x n matrix of i.i.d. standard normals keyed by (seed, asset, time).
Eigen::MatrixXd draw_brownian_normals(int p, int n, std::uint64_t seed);

/// Column sums of the increment normals divided by sqrt(p): the normals of
/// W~ = sum_i W^i / sqrt(p).
std::vector<double> aggregate_driver(const Eigen::MatrixXd& normals);

/// X_{t_i} = X_{t_{i-1}} + mu/n + gamma_{t_{i-1}} Lambda Z_i / sqrt(n), X_0 = 0.
/// `drift` is empty (zero drift) or has one constant per asset.
Eigen::MatrixXd simulate_prices(const CovolFactor& factor, const VolPath& vol,
                                std::span<const double> drift, const Eigen::MatrixXd& normals);
Eigen::MatrixXd simulate_prices(const CovolFactor& factor, const VolPath& vol,
                                std::span<const double> drift, std::uint64_t seed);

struct ClassCSample {
  VolPath vol;
  Eigen::MatrixXd latent;
};

/// Joint simulation of gamma and X with gamma driven by the average of the
/// price Brownian motions (leverage through all components of W).
ClassCSample simulate_class_c(const CovolFactor& factor, const GammaParams& gamma, int n,
                              std::span<const double> drift, std::uint64_t seed);

enum class NoiseModel { iid, ar1 };

struct NoiseSpec {
  std::vector<double> variances;  // d_j^2 per asset
  NoiseModel model = NoiseModel::iid;
  double phi = 0.0;               // AR(1) coefficient, |phi| < 1
};

struct PricePanel {
  Eigen::MatrixXd latent;    // p x (n+1)
  Eigen::MatrixXd observed;  // p x (n+1)
  NoiseSpec noise;

  int assets() const noexcept { return static_cast<int>(latent.rows()); }
  int steps() const noexcept { return static_cast<int>(latent.cols()) - 1; }
};

/// observed = latent + eps; eps i.i.d. N(0, d_j^2) over time, or AR(1) per
/// asset with stationary variance d_j^2.
PricePanel add_noise(const Eigen::MatrixXd& latent, const NoiseSpec& spec, std::uint64_t seed);

struct IcvTruth {
  Eigen::MatrixXd icv;
  measures::DiscreteMeasure esd;
};

/// ICV = zeta * Sigma_breve with ESD scale_measure(esd(Sigma_breve), zeta).
IcvTruth icv_true(const CovolFactor& factor, const VolPath& vol);

/// w_i = sum_{|j|<k} (1 - |j|/k)^2 int gamma_t^2 dt over the
/// ((2i-1)k + j)-th step; 1 <= i <= floor(n / 2k).
double pav_weight_oracle(const VolPath& vol, int n, int k, int i);

}  // namespace specdn::simulate
