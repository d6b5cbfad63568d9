#pragma once

#include <Eigen/Dense>

namespace detplace {

struct LpSolution {
  Eigen::VectorXd x;     // primal
  Eigen::VectorXd dual;  // one multiplier per inequality row
  double objective = 0.0;
  int pivots = 0;
};

/// maximize c^T x  subject to  A x <= b, x >= 0, with b >= 0 so that the
/// origin is feasible. Dense tableau, Bland's rule.
///
/// Throws Error(kLPFailure) on negative b, unboundedness, or pivot overflow.
LpSolution solve_standard_lp(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                             const Eigen::VectorXd& c);

}  // namespace detplace
