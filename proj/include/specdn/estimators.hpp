#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "specdn/simulate.hpp"

namespace specdn::estimators {

/// Pre-averaged returns dY_{2i} = Ybar_{2i} - Ybar_{2i-1}, one column per
/// block pair, with Ybar_i the mean of k consecutive observations.
struct PavReturns {
  Eigen::MatrixXd values;  // p x m
  int k = 0;
  int m = 0;
};

enum class WindowRule { sqrt_rule, power_rule };

/// k = floor(theta sqrt(n)) or k = floor(theta n^alpha); m = floor(n / 2k).
struct EstimatorConfig {
  int n = 0;
  int p = 0;
  double theta = 0.5;
  WindowRule rule = WindowRule::sqrt_rule;
  double alpha = 0.6;  // power rule only, in (1/2, 1)

  int window() const;
  int blocks() const;
  double aspect_ratio() const;  // y = p / m
  /// Throws when alpha is out of range for the power rule, or k < 2, or m < 2.
  void validate() const;
};

/// Block-mean form; observations past 2k * floor(n / 2k) are discarded.
PavReturns pav_returns(const Eigen::MatrixXd& observed, int k);

/// The same returns via the triangular kernel
/// sum_{|j|<k} (1 - |j|/k) dY_{(2i-1)k + j}.
PavReturns pav_returns_kernel_form(const Eigen::MatrixXd& observed, int k);

/// PAV = sum_i dY_{2i} dY_{2i}^T.
Eigen::MatrixXd pav_matrix(const PavReturns& returns);
Eigen::MatrixXd pav_matrix(const Eigen::MatrixXd& observed, int k);

enum class DegeneratePolicy { reject, drop };

struct BmMatrix {
  Eigen::MatrixXd matrix;
  int used_blocks = 0;     // m after dropping degenerate columns
  int dropped_blocks = 0;
};

/// B_m = 3 (sum_i |dY_{2i}|^2 / m) sum_i dY_{2i} dY_{2i}^T / |dY_{2i}|^2.
/// A zero column is an error under `reject`; under `drop` it is skipped and m
/// is reduced accordingly.
BmMatrix bm_matrix(const PavReturns& returns, DegeneratePolicy policy = DegeneratePolicy::reject);
Eigen::MatrixXd bm_matrix(const Eigen::MatrixXd& observed, int k);

/// Self-normalized factor (p/m) sum_i dY dY^T / |dY|^2.
Eigen::MatrixXd self_normalized_covariance(const PavReturns& returns);

/// Realized covariance of one-step observed returns.
Eigen::MatrixXd rcv_matrix(const Eigen::MatrixXd& observed);

/// d_j^2 estimate sum_i (dY_i^j)^2 / (2n).
std::vector<double> estimate_noise_variance(const Eigen::MatrixXd& observed);

/// Adds independent N(0, d_max^2 - d_j^2) noise to asset j so that every
/// asset carries noise variance d_max^2.
simulate::PricePanel equalize_noise(const simulate::PricePanel& panel,
                                    std::span<const double> variances, std::uint64_t seed);

/// Eigenvalues of (A + A^T)/2 in ascending order, by cyclic Jacobi.
std::vector<double> sym_eigenvalues(const Eigen::MatrixXd& a);

}  // namespace specdn::estimators
