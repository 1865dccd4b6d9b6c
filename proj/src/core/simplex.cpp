#include <algorithm>
#include <cmath>
#include <limits>

#include "specdn/recovery.hpp"

namespace specdn::recovery {

namespace {

constexpr double kReducedCostTolerance = 1e-11;
constexpr double kPivotTolerance = 1e-9;
constexpr double kFeasibilityTolerance = 1e-9;
// A recomputed basic solution more negative than this counts as lost.
constexpr double kRepairTolerance = 1e-7;
constexpr int kRefreshInterval = 32;
constexpr int kCarefulPivots = 64;

class PivotLimitReached : public std::exception {};

using Real = double;
using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using RowVec = Eigen::RowVectorXd;

// Dense tableau over the original system [A | b].
//
// The min-max fits have nearly collinear columns, so bases along long
// degenerate pivot runs can be badly conditioned. Every kRefreshInterval
// pivots, and before optimality is declared, the tableau is recomputed as
// B^{-1} [A | b]. A basis whose recomputed solution is infeasible is
// abandoned for the last verified one; the next kCarefulPivots pivots are
// then verified one at a time, and an entering column whose single pivot
// breaks feasibility is banned until the careful stretch ends.
class Tableau {
 public:
  Tableau(Mat system, std::vector<int> basis)
      : a0_(std::move(system)),
        t_(a0_),
        obj_(RowVec::Zero(a0_.cols())),
        costs_(Vec::Zero(a0_.cols() - 1)),
        basis_(std::move(basis)),
        checkpoint_(basis_),
        banned_(static_cast<std::size_t>(a0_.cols() - 1), false) {
    refresh();
  }

  const Mat& body() const { return t_; }
  const std::vector<int>& basis() const { return basis_; }
  Eigen::Index rows() const { return t_.rows(); }
  Eigen::Index cols() const { return t_.cols() - 1; }
  Real rhs(Eigen::Index i) const { return t_(i, cols()); }
  // Current objective value (the tableau stores its negative).
  double objective() const { return -obj_(cols()); }
  int pivots() const { return pivots_; }

  void set_costs(const Eigen::VectorXd& costs) {
    costs_ = costs;
    std::fill(banned_.begin(), banned_.end(), false);
    price();
  }

  void pivot(Eigen::Index r, Eigen::Index col) {
    t_.row(r) /= t_(r, col);
    Vec factors = t_.col(col);
    factors(r) = 0.0;
    const RowVec pivot_row = t_.row(r);
    t_.noalias() -= factors * pivot_row;
    obj_ -= obj_(col) * pivot_row;
    basis_[static_cast<std::size_t>(r)] = static_cast<int>(col);
    ++pivots_;
    last_entering_ = col;
    ++since_refresh_;
    if (careful_left_ > 0 || since_refresh_ >= kRefreshInterval) verify();
  }

  // Bland's rule over columns [0, allowed): the lowest-index improving column
  // enters. Returns false when unbounded.
  bool optimize(Eigen::Index allowed, int pivot_limit) {
    for (;;) {
      bool pivoted = false;
      for (Eigen::Index entering = 0; entering < allowed; ++entering) {
        if (banned_[static_cast<std::size_t>(entering)]) continue;
        if (!(obj_(entering) < -kReducedCostTolerance)) continue;
        const Eigen::Index leaving = ratio_test(entering);
        if (leaving == kUnbounded) return false;
        // Columns whose admissible pivots are all tiny are skipped.
        if (leaving < 0) continue;
        if (pivots_ >= pivot_limit) throw PivotLimitReached{};
        pivot(leaving, entering);
        pivoted = true;
        break;
      }
      if (pivoted) continue;
      if (since_refresh_ == 0) return true;
      verify(true);
    }
  }

  // Drives a basic artificial variable (index >= first_artificial) out of
  // row r if some structural or slack column has a usable entry there.
  void evict(Eigen::Index r, Eigen::Index first_artificial) {
    for (Eigen::Index j = 0; j < first_artificial; ++j) {
      if (std::abs(t_(r, j)) > kPivotTolerance) {
        pivot(r, j);
        return;
      }
    }
  }

  Eigen::VectorXd primal(Eigen::Index n) const {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < rows(); ++i) {
      const int b = basis_[static_cast<std::size_t>(i)];
      if (b < n) x(b) = std::max(rhs(i), 0.0);
    }
    return x;
  }

  // Simplex multipliers y = B^{-T} c_B for the rows as stored.
  Vec multipliers() const {
    Vec cb(rows());
    for (Eigen::Index i = 0; i < rows(); ++i) cb(i) = costs_(basis_[static_cast<std::size_t>(i)]);
    return basis_matrix().transpose().partialPivLu().solve(cb);
  }

 private:
  static constexpr Eigen::Index kUnbounded = -2;

  Mat basis_matrix() const {
    Mat b(rows(), rows());
    for (Eigen::Index i = 0; i < rows(); ++i) b.col(i) = a0_.col(basis_[static_cast<std::size_t>(i)]);
    return b;
  }

  void refresh() { refresh(basis_matrix().partialPivLu()); }

  void refresh(const Eigen::PartialPivLU<Mat>& lu) {
    t_ = lu.solve(a0_);
    // Basic columns are exact unit vectors by definition.
    for (Eigen::Index i = 0; i < rows(); ++i) {
      const Eigen::Index col = basis_[static_cast<std::size_t>(i)];
      t_.col(col).setZero();
      t_(i, col) = 1.0;
    }
    price();
    since_refresh_ = 0;
  }

  // Checks the current basis against the original system. The full tableau
  // is only recomputed on schedule or at an optimality check; the careful
  // per-pivot checks solve for the basic values alone.
  void verify() {
    const bool full = careful_left_ == 0 || since_refresh_ >= kRefreshInterval ||
                      since_refresh_ == 0;
    verify(full);
  }

  void verify(bool full) {
    const Eigen::PartialPivLU<Mat> lu = basis_matrix().partialPivLu();
    const Vec values = lu.solve(a0_.col(cols()));
    const Real scale = std::max(1.0, values.cwiseAbs().maxCoeff());
    if (values.allFinite() && values.minCoeff() >= -kRepairTolerance * scale) {
      if (full) refresh(lu);
      checkpoint_ = basis_;
      if (careful_left_ > 0 && --careful_left_ == 0)
        std::fill(banned_.begin(), banned_.end(), false);
      return;
    }
    if (careful_left_ > 0 && last_entering_ >= 0)
      banned_[static_cast<std::size_t>(last_entering_)] = true;
    basis_ = checkpoint_;
    refresh();
    careful_left_ = kCarefulPivots;
  }

  // Two-pass (Harris) ratio test. The first pass bounds the step using rows
  // relaxed by kFeasibilityTolerance; the second picks the largest pivot
  // within that bound, remaining ties going to the lowest basic index.
  // Returns -1 when the best admissible pivot is below kPivotTolerance.
  Eigen::Index ratio_test(Eigen::Index entering) const {
    Real bound = std::numeric_limits<Real>::infinity();
    bool any = false;
    for (Eigen::Index i = 0; i < rows(); ++i) {
      const Real a = t_(i, entering);
      if (a <= 0.0) continue;
      any = true;
      bound = std::min(bound, (std::max(rhs(i), 0.0) + kFeasibilityTolerance) / a);
    }
    if (!any) return kUnbounded;
    Eigen::Index leaving = -1;
    Real best_pivot = 0;
    for (Eigen::Index i = 0; i < rows(); ++i) {
      const Real a = t_(i, entering);
      if (a <= 0.0) continue;
      if (std::max(rhs(i), 0.0) / a > bound) continue;
      if (leaving < 0 || a > best_pivot ||
          (a == best_pivot &&
           basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leaving)])) {
        leaving = i;
        best_pivot = a;
      }
    }
    return best_pivot >= kPivotTolerance ? leaving : -1;
  }

  void price() {
    obj_.setZero();
    obj_.head(costs_.size()) = costs_.transpose();
    Vec cb(rows());
    for (Eigen::Index i = 0; i < rows(); ++i) cb(i) = costs_(basis_[static_cast<std::size_t>(i)]);
    obj_.noalias() -= cb.transpose() * t_;
  }

  Mat a0_;
  Mat t_;
  RowVec obj_;
  Vec costs_;
  std::vector<int> basis_;
  std::vector<int> checkpoint_;
  std::vector<bool> banned_;
  int pivots_ = 0;
  int since_refresh_ = 0;
  int careful_left_ = 0;
  Eigen::Index last_entering_ = -1;
};

}  // namespace

LinearProgramSolution solve_linear_program(const LinearProgram& lp, int pivot_limit) {
  const Eigen::Index n = lp.c.size();
  const Eigen::Index m_ub = lp.a_ub.rows();
  const Eigen::Index m_eq = lp.a_eq.rows();
  require(n >= 1, "linear program needs at least one variable");
  require(m_ub == 0 || lp.a_ub.cols() == n, "a_ub has the wrong column count");
  require(m_eq == 0 || lp.a_eq.cols() == n, "a_eq has the wrong column count");
  require(lp.b_ub.size() == m_ub && lp.b_eq.size() == m_eq, "right-hand side size mismatch");
  require(lp.c.allFinite() && lp.a_ub.allFinite() && lp.a_eq.allFinite() &&
              lp.b_ub.allFinite() && lp.b_eq.allFinite(),
          "linear program has non-finite entries");

  const Eigen::Index rows = m_ub + m_eq;
  Eigen::Index artificials = m_eq;
  for (Eigen::Index i = 0; i < m_ub; ++i)
    if (lp.b_ub(i) < 0.0) ++artificials;
  const Eigen::Index slack0 = n;
  const Eigen::Index art0 = n + m_ub;
  const Eigen::Index cols = art0 + artificials;

  Mat t = Mat::Zero(rows, cols + 1);
  Eigen::VectorXd row_sign = Eigen::VectorXd::Ones(rows);
  std::vector<int> start_basis(static_cast<std::size_t>(rows));
  Eigen::Index next_art = art0;
  for (Eigen::Index i = 0; i < m_ub; ++i) {
    const double sign = lp.b_ub(i) < 0.0 ? -1.0 : 1.0;
    row_sign(i) = sign;
    t.row(i).head(n) = sign * lp.a_ub.row(i);
    t(i, slack0 + i) = sign;
    t(i, cols) = sign * lp.b_ub(i);
    if (sign > 0.0) {
      start_basis[static_cast<std::size_t>(i)] = static_cast<int>(slack0 + i);
    } else {
      t(i, next_art) = 1.0;
      start_basis[static_cast<std::size_t>(i)] = static_cast<int>(next_art++);
    }
  }
  for (Eigen::Index e = 0; e < m_eq; ++e) {
    const Eigen::Index i = m_ub + e;
    const double sign = lp.b_eq(e) < 0.0 ? -1.0 : 1.0;
    row_sign(i) = sign;
    t.row(i).head(n) = sign * lp.a_eq.row(e);
    t(i, cols) = sign * lp.b_eq(e);
    t(i, next_art) = 1.0;
    start_basis[static_cast<std::size_t>(i)] = static_cast<int>(next_art++);
  }

  Tableau tab(std::move(t), std::move(start_basis));
  const Mat& body = tab.body();

  bool feasible = artificials == 0;
  try {
    if (artificials > 0) {
      Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(cols);
      phase1.tail(artificials).setOnes();
      tab.set_costs(phase1);
      tab.optimize(cols, pivot_limit);
      const double scale = std::max(1.0, body.col(cols).cwiseAbs().maxCoeff());
      if (tab.objective() > kFeasibilityTolerance * scale)
        fail(ErrorCode::degenerate, "linear program is infeasible");
      // Drive artificial variables out of the basis; rows where that is
      // impossible are redundant and stay inert.
      for (Eigen::Index i = 0; i < rows; ++i)
        if (tab.basis()[static_cast<std::size_t>(i)] >= art0) tab.evict(i, art0);
    }

    feasible = true;
    Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(cols);
    phase2.head(n) = lp.c;
    tab.set_costs(phase2);
    if (!tab.optimize(art0, pivot_limit)) fail(ErrorCode::degenerate, "linear program is unbounded");
  } catch (const PivotLimitReached&) {
    // Past phase one the current basis is a feasible incumbent.
    LpResult incumbent{{}, std::numeric_limits<double>::infinity(), tab.pivots()};
    if (feasible) {
      const Eigen::VectorXd x = tab.primal(n);
      incumbent.weights.assign(x.data(), x.data() + n);
      incumbent.objective = lp.c.dot(x);
    }
    throw PivotLimitError("simplex pivot limit reached", std::move(incumbent));
  }

  LinearProgramSolution out;
  out.x = tab.primal(n);
  out.objective = lp.c.dot(out.x);
  out.pivots = tab.pivots();
  out.duals = tab.multipliers().cwiseProduct(row_sign);
  return out;
}

double minmax_objective(const LpProblem& problem, const std::vector<double>& weights) {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < problem.basis.rows(); ++j) {
    cplx e = problem.target[static_cast<std::size_t>(j)];
    for (Eigen::Index k = 0; k < problem.basis.cols(); ++k)
      e -= weights[static_cast<std::size_t>(k)] * problem.basis(j, k);
    worst = std::max({worst, std::abs(e.real()), std::abs(e.imag())});
  }
  return worst;
}

namespace {

std::vector<double> normalized_weights(const Eigen::VectorXd& x, Eigen::Index k) {
  std::vector<double> w(static_cast<std::size_t>(k));
  double sum = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    w[static_cast<std::size_t>(i)] = std::max(x(i), 0.0);
    sum += w[static_cast<std::size_t>(i)];
  }
  if (!(sum > 0.0)) fail(ErrorCode::degenerate, "LP returned zero total weight");
  for (double& v : w) v /= sum;
  return w;
}

}  // namespace

LpResult solve_minmax_lp(const LpProblem& problem, int pivot_limit) {
  const Eigen::Index j_count = problem.basis.rows();
  const Eigen::Index k = problem.basis.cols();
  require(k >= 1, "LP needs at least one atom");
  require(j_count >= 1, "LP needs at least one residual");
  require(static_cast<Eigen::Index>(problem.target.size()) == j_count,
          "one target per basis row is required");
  require(problem.basis.allFinite(), "LP basis has non-finite entries");

  // Variables (w_1..w_K, u). Each residual contributes four rows:
  //   Re t - Re(B w) <= u,  Re(B w) - Re t <= u, and the same for Im.
  // With sum w = 1 the target moves inside the sum, so every inequality has
  // a zero right-hand side and phase one only has to satisfy sum w = 1.
  LinearProgram lp;
  lp.c = Eigen::VectorXd::Zero(k + 1);
  lp.c(k) = 1.0;
  lp.a_ub = Eigen::MatrixXd::Zero(4 * j_count, k + 1);
  lp.b_ub = Eigen::VectorXd::Zero(4 * j_count);
  for (Eigen::Index j = 0; j < j_count; ++j) {
    const cplx target = problem.target[static_cast<std::size_t>(j)];
    for (Eigen::Index c = 0; c < k; ++c) {
      const cplx d = target - problem.basis(j, c);
      lp.a_ub(4 * j, c) = d.real();
      lp.a_ub(4 * j + 1, c) = -d.real();
      lp.a_ub(4 * j + 2, c) = d.imag();
      lp.a_ub(4 * j + 3, c) = -d.imag();
    }
    lp.a_ub.block(4 * j, k, 4, 1).setConstant(-1.0);
  }
  lp.a_eq = Eigen::MatrixXd::Zero(1, k + 1);
  lp.a_eq.row(0).head(k).setOnes();
  lp.b_eq = Eigen::VectorXd::Ones(1);

  LinearProgramSolution solution;
  try {
    solution = solve_linear_program(lp, pivot_limit);
  } catch (const PivotLimitError& e) {
    std::vector<double> w(static_cast<std::size_t>(k), 1.0 / static_cast<double>(k));
    if (!e.incumbent().weights.empty()) {
      const Eigen::VectorXd x =
          Eigen::Map<const Eigen::VectorXd>(e.incumbent().weights.data(), k + 1);
      w = normalized_weights(x, k);
    }
    throw PivotLimitError(e.what(), LpResult{w, minmax_objective(problem, w),
                                             e.incumbent().pivots});
  }
  LpResult out;
  out.weights = normalized_weights(solution.x, k);
  out.objective = minmax_objective(problem, out.weights);
  out.pivots = solution.pivots;
  return out;
}

}  // namespace specdn::recovery
