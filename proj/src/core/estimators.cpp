#include "specdn/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "specdn/error.hpp"
#include "specdn/rng.hpp"

namespace specdn::estimators {

using Eigen::MatrixXd;

int EstimatorConfig::window() const {
  const double raw = rule == WindowRule::sqrt_rule
                         ? theta * std::sqrt(static_cast<double>(n))
                         : theta * std::pow(static_cast<double>(n), alpha);
  return static_cast<int>(std::floor(raw));
}

int EstimatorConfig::blocks() const {
  const int k = window();
  return k > 0 ? n / (2 * k) : 0;
}

double EstimatorConfig::aspect_ratio() const {
  return static_cast<double>(p) / blocks();
}

void EstimatorConfig::validate() const {
  require(n >= 2 && p >= 1, "estimator needs n >= 2 and p >= 1");
  require(theta > 0.0, "window coefficient theta must be positive");
  if (rule == WindowRule::power_rule)
    require(alpha > 0.5 && alpha < 1.0, "window exponent alpha must lie in (1/2, 1)");
  require(window() >= 2, "window length k must be at least 2");
  require(blocks() >= 2, "number of pre-averaged blocks m must be at least 2");
}

namespace {

int checked_blocks(const MatrixXd& observed, int k) {
  require(k >= 1, "window length must be positive");
  const int n = static_cast<int>(observed.cols()) - 1;
  if (2 * k > n) fail(ErrorCode::invalid_argument, "window too long: 2k > n");
  return n / (2 * k);
}

}  // namespace

PavReturns pav_returns(const MatrixXd& observed, int k) {
  const int m = checked_blocks(observed, k);
  const Eigen::Index p = observed.rows();
  PavReturns out{MatrixXd(p, m), k, m};
  for (int i = 1; i <= m; ++i) {
    // Ybar_{2i-1} averages Y_{(2i-2)k .. (2i-1)k-1}; Ybar_{2i} the next k.
    const auto first = observed.middleCols((2 * i - 2) * k, k).rowwise().mean();
    const auto second = observed.middleCols((2 * i - 1) * k, k).rowwise().mean();
    out.values.col(i - 1) = second - first;
  }
  return out;
}

PavReturns pav_returns_kernel_form(const MatrixXd& observed, int k) {
  const int m = checked_blocks(observed, k);
  const Eigen::Index p = observed.rows();
  PavReturns out{MatrixXd::Zero(p, m), k, m};
  for (int i = 1; i <= m; ++i) {
    for (int j = -(k - 1); j <= k - 1; ++j) {
      const int step = (2 * i - 1) * k + j;
      const double kernel = 1.0 - std::abs(j) / static_cast<double>(k);
      out.values.col(i - 1) += kernel * (observed.col(step) - observed.col(step - 1));
    }
  }
  return out;
}

MatrixXd pav_matrix(const PavReturns& returns) {
  MatrixXd pav = returns.values * returns.values.transpose();
  return 0.5 * (pav + pav.transpose());
}

MatrixXd pav_matrix(const MatrixXd& observed, int k) {
  return pav_matrix(pav_returns(observed, k));
}

BmMatrix bm_matrix(const PavReturns& returns, DegeneratePolicy policy) {
  const Eigen::Index p = returns.values.rows();
  MatrixXd normalized_sum = MatrixXd::Zero(p, p);
  double total_square = 0.0;
  int used = 0;
  int dropped = 0;
  for (int i = 0; i < returns.m; ++i) {
    const auto col = returns.values.col(i);
    const double sq = col.squaredNorm();
    if (!(sq > 0.0)) {
      if (policy == DegeneratePolicy::reject)
        fail(ErrorCode::degenerate, "degenerate return: pre-averaged block " +
                                        std::to_string(i + 1) + " is zero");
      ++dropped;
      continue;
    }
    normalized_sum.noalias() += col * col.transpose() / sq;
    total_square += sq;
    ++used;
  }
  if (used == 0) fail(ErrorCode::degenerate, "degenerate return: every pre-averaged block is zero");
  MatrixXd b = (3.0 * total_square / used) * normalized_sum;
  b = 0.5 * (b + b.transpose()).eval();
  return BmMatrix{std::move(b), used, dropped};
}

MatrixXd bm_matrix(const MatrixXd& observed, int k) {
  return bm_matrix(pav_returns(observed, k)).matrix;
}

MatrixXd self_normalized_covariance(const PavReturns& returns) {
  const Eigen::Index p = returns.values.rows();
  MatrixXd s = MatrixXd::Zero(p, p);
  for (int i = 0; i < returns.m; ++i) {
    const auto col = returns.values.col(i);
    const double sq = col.squaredNorm();
    if (!(sq > 0.0)) fail(ErrorCode::degenerate, "degenerate return");
    s.noalias() += col * col.transpose() / sq;
  }
  return (static_cast<double>(p) / returns.m) * s;
}

MatrixXd rcv_matrix(const MatrixXd& observed) {
  require(observed.cols() >= 2, "need at least one return");
  const Eigen::Index n = observed.cols() - 1;
  const MatrixXd diffs = observed.rightCols(n) - observed.leftCols(n);
  MatrixXd rcv = diffs * diffs.transpose();
  return 0.5 * (rcv + rcv.transpose());
}

std::vector<double> estimate_noise_variance(const MatrixXd& observed) {
  const Eigen::Index n = observed.cols() - 1;
  require(n >= 2, "noise variance estimation needs n >= 2");
  std::vector<double> out(static_cast<std::size_t>(observed.rows()));
  for (Eigen::Index a = 0; a < observed.rows(); ++a) {
    double acc = 0.0;
    for (Eigen::Index i = 1; i <= n; ++i) {
      const double d = observed(a, i) - observed(a, i - 1);
      acc += d * d;
    }
    out[static_cast<std::size_t>(a)] = acc / (2.0 * static_cast<double>(n));
  }
  return out;
}

simulate::PricePanel equalize_noise(const simulate::PricePanel& panel,
                                    std::span<const double> variances, std::uint64_t seed) {
  const Eigen::Index p = panel.observed.rows();
  require(static_cast<Eigen::Index>(variances.size()) == p,
          "one noise variance per asset is required");
  const double d_max = *std::max_element(variances.begin(), variances.end());
  simulate::PricePanel out = panel;
  for (Eigen::Index a = 0; a < p; ++a) {
    const double gap = d_max - variances[static_cast<std::size_t>(a)];
    if (gap < -1e-12) fail(ErrorCode::invalid_argument, "negative noise-variance gap");
    if (gap <= 0.0) continue;
    if (static_cast<Eigen::Index>(out.noise.variances.size()) == p)
      out.noise.variances[static_cast<std::size_t>(a)] += gap;
    const double sd = std::sqrt(gap);
    const rng::Stream stream(seed, rng::Purpose::equalize, static_cast<std::uint32_t>(a));
    for (Eigen::Index t = 0; t < out.observed.cols(); ++t)
      out.observed(a, t) += sd * stream.normal(static_cast<std::uint64_t>(t));
  }
  return out;
}

}  // namespace specdn::estimators
