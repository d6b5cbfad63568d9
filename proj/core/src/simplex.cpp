#include "detplace/simplex.hpp"

#include <cmath>

#include "detplace/types.hpp"

namespace detplace {

LpSolution solve_standard_lp(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                             const Eigen::VectorXd& c) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  if (b.size() != m || c.size() != n) {
    throw Error(ErrorCode::kLPFailure, "dimension mismatch");
  }
  if ((b.array() < 0.0).any()) {
    throw Error(ErrorCode::kLPFailure, "right-hand side must be nonnegative");
  }
  constexpr double eps = 1e-12;

  // Columns: x (n), slacks (m), rhs. Last row holds -c (reduced costs).
  Eigen::MatrixXd tab = Eigen::MatrixXd::Zero(m + 1, n + m + 1);
  tab.topLeftCorner(m, n) = A;
  tab.block(0, n, m, m).setIdentity();
  tab.topRightCorner(m, 1) = b;
  tab.bottomLeftCorner(1, n) = -c.transpose();
  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) basis[i] = n + i;

  const int max_pivots = 50 * (n + m) + 1000;
  LpSolution sol;
  for (;;) {
    int enter = -1;
    for (int j = 0; j < n + m; ++j) {
      if (tab(m, j) < -eps) {
        enter = j;
        break;
      }
    }
    if (enter < 0) break;
    int leave = -1;
    double best = 0.0;
    for (int i = 0; i < m; ++i) {
      if (tab(i, enter) > eps) {
        const double ratio = tab(i, n + m) / tab(i, enter);
        if (leave < 0 || ratio < best - eps ||
            (std::abs(ratio - best) <= eps && basis[i] < basis[leave])) {
          leave = i;
          best = ratio;
        }
      }
    }
    if (leave < 0) throw Error(ErrorCode::kLPFailure, "objective unbounded");
    if (++sol.pivots > max_pivots) throw Error(ErrorCode::kLPFailure, "pivot limit reached");

    tab.row(leave) /= tab(leave, enter);
    for (int i = 0; i <= m; ++i) {
      if (i != leave && tab(i, enter) != 0.0) tab.row(i) -= tab(i, enter) * tab.row(leave);
    }
    basis[leave] = enter;
  }

  sol.x = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < m; ++i) {
    if (basis[i] < n) sol.x[basis[i]] = tab(i, n + m);
  }
  sol.dual = tab.bottomRows(1).middleCols(n, m).transpose();
  sol.objective = tab(m, n + m);
  return sol;
}

}  // namespace detplace
