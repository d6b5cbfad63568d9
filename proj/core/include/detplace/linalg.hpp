#pragma once

#include <complex>

#include <Eigen/Dense>

namespace detplace::linalg {

using Complex = std::complex<double>;

/// Solves A X + X A^T + Q = 0 (Bartels-Stewart on the complex Schur form).
/// Requires lambda_i(A) + conj(lambda_j(A)) != 0 for all i, j.
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q);

/// Stabilizing solution of the filter Riccati equation
///   A P + P A^T - P C^T C P / r + Q = 0
/// by Newton-Kleinman iteration started from the zero gain. A must be Hurwitz.
/// Throws Error(kObserverDesignFailed) when the iteration does not settle.
Eigen::MatrixXd solve_filter_riccati(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C,
                                     const Eigen::MatrixXd& Q, double r);

/// Largest real part of the eigenvalues.
double spectral_abscissa(const Eigen::MatrixXd& A);

double min_eigenvalue(const Eigen::MatrixXd& symmetric);
double max_eigenvalue(const Eigen::MatrixXd& symmetric);

/// lambda_min(S) > rel_tol * ||S||_2.
bool is_positive_definite(const Eigen::MatrixXd& symmetric, double rel_tol = 1e-9);

/// Orthonormal basis of the orthogonal complement of range(K).
Eigen::MatrixXd orthogonal_complement(const Eigen::MatrixXd& K, double rank_tol = 1e-12);

/// C A^k B for a single input column and output row.
double markov_parameter(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                        const Eigen::RowVectorXd& c, int k);

/// Evaluates C (sI - A)^{-1} b for many complex s in O(n^2) each, after a
/// one-off Hessenberg reduction of A.
class Resolvent {
 public:
  Resolvent(const Eigen::MatrixXd& A, const Eigen::VectorXd& b);

  /// (sI - A)^{-1} b in the original coordinates.
  Eigen::VectorXcd solve(Complex s) const;
  Complex transfer(const Eigen::RowVectorXd& c, Complex s) const;

  int dimension() const { return static_cast<int>(hess_.rows()); }

 private:
  Eigen::MatrixXd hess_;   // upper Hessenberg
  Eigen::MatrixXd basis_;  // A = basis * hess * basis^T
  Eigen::VectorXd rhs_;    // basis^T b
};

/// Sigma_min / Sigma_max of a complex matrix.
double relative_smallest_singular_value(const Eigen::MatrixXcd& M);

}  // namespace detplace::linalg
