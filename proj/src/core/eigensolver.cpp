#include <algorithm>
#include <cmath>

#include "specdn/error.hpp"
#include "specdn/estimators.hpp"

namespace specdn::estimators {

namespace {

constexpr double kSymmetryTolerance = 1e-8;
constexpr double kOffDiagonalTolerance = 1e-12;
constexpr int kMaxSweeps = 100;

double off_diagonal_norm(const Eigen::MatrixXd& a) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < j; ++i) s += 2.0 * a(i, j) * a(i, j);
  return std::sqrt(s);
}

}  // namespace

// Cyclic Jacobi with the Rutishauser rotation formulas. Each rotation zeroes
// a(p,q) and updates rows/columns p and q of the symmetric working copy.
std::vector<double> sym_eigenvalues(const Eigen::MatrixXd& input) {
  require(input.rows() == input.cols(), "matrix must be square");
  const Eigen::Index n = input.rows();
  if (n == 0) return {};
  if (!input.allFinite()) fail(ErrorCode::invalid_argument, "matrix has non-finite entries");
  const double max_entry = input.cwiseAbs().maxCoeff();
  if ((input - input.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance * max_entry)
    fail(ErrorCode::invalid_argument, "matrix is not symmetric");

  Eigen::MatrixXd a = 0.5 * (input + input.transpose());
  const double frob = a.norm();
  const double target = kOffDiagonalTolerance * frob;

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    if (off_diagonal_norm(a) <= target) break;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        const double theta = (aqq - app) / (2.0 * apq);
        double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        if (theta < 0.0) t = -t;
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);

        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (Eigen::Index r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const double arp = a(r, p);
          const double arq = a(r, q);
          const double new_rp = arp - s * (arq + tau * arp);
          const double new_rq = arq + s * (arp - tau * arq);
          a(r, p) = new_rp;
          a(p, r) = new_rp;
          a(r, q) = new_rq;
          a(q, r) = new_rq;
        }
      }
    }
  }
  if (off_diagonal_norm(a) > target)
    throw ConvergenceError("Jacobi sweeps did not converge", off_diagonal_norm(a));

  std::vector<double> eig(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) eig[static_cast<std::size_t>(i)] = a(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

}  // namespace specdn::estimators
