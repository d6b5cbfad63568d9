#pragma once

#include <ostream>
#include <vector>

#include <Eigen/Dense>

namespace detplace::sdp {

/// coef * (p_u p_v^T + p_v p_u^T) / 2 for pool columns u and v.
struct Term {
  int u = 0;
  int v = 0;
  double coef = 0.0;
};

/// One semidefinite block. Every constraint matrix of the block is a short
/// sum of symmetrized outer products of columns of a shared vector pool.
struct Block {
  int dim = 0;
  Eigen::MatrixXd pool;              // dim x pool_size
  std::vector<std::vector<Term>> a;  // a[i]: terms of A_i in this block
  std::vector<Term> c;               // terms of C
};

/// Dual standard form
///
///   minimize b^T y  subject to  S = sum_i y_i A_i - C >= 0 (blockwise),
///
/// paired with the primal  maximize <C, X>  s.t.  <A_i, X> = b_i, X >= 0.
struct Problem {
  int num_vars = 0;
  Eigen::VectorXd b;
  std::vector<Block> blocks;
};

struct Settings {
  int max_iterations = 100;
  double gap_tol = 1e-9;
  double feas_tol = 1e-9;
  double step_fraction = 0.95;
  /// Looser thresholds accepted when progress stalls or the iteration
  /// breaks down numerically. Degenerate faces stall the gap near 1e-6, so
  /// callers should verify accepted iterates independently.
  double near_gap_tol = 1e-5;
  double near_primal_tol = 1e-5;
  double near_dual_tol = 1e-8;
  /// Iterations without a 10% gap reduction that count as a stall.
  int stall_iterations = 4;
  /// Per-iteration progress lines when set.
  std::ostream* log = nullptr;
};

enum class Status { kOptimal, kNearOptimal, kMaxIterations, kNumericalError };

const char* to_string(Status s);

struct Solution {
  Status status = Status::kNumericalError;
  Eigen::VectorXd y;
  std::vector<Eigen::MatrixXd> X;
  std::vector<Eigen::MatrixXd> S;
  double primal_objective = 0.0;  // <C, X>
  double dual_objective = 0.0;    // b^T y
  double relative_gap = 0.0;
  double primal_residual = 0.0;   // ||b - A(X)|| / (1 + ||b||)
  double dual_residual = 0.0;     // ||sum y A - C - S||_F / (1 + ||C||_F)
  int iterations = 0;
};

/// Dense primal-dual interior point method (HKM direction, Mehrotra
/// predictor-corrector, infeasible start).
Solution solve(const Problem& problem, const Settings& settings = {});

/// sum_i y_i A_i - C for one block.
Eigen::MatrixXd dual_slack(const Block& block, const Eigen::VectorXd& y);

}  // namespace detplace::sdp
