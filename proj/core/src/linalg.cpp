#include "detplace/linalg.hpp"

#include <cmath>
#include <limits>

#include "detplace/types.hpp"

namespace detplace::linalg {

Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q) {
  const Eigen::Index n = A.rows();
  Eigen::ComplexSchur<Eigen::MatrixXcd> schur(A.cast<Complex>());
  const Eigen::MatrixXcd& T = schur.matrixT();
  const Eigen::MatrixXcd& U = schur.matrixU();
  // T Y + Y T^H = -U^H Q U, solved column by column from the right.
  const Eigen::MatrixXcd rhs = -(U.adjoint() * Q.cast<Complex>() * U);
  Eigen::MatrixXcd Y = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index j = n - 1; j >= 0; --j) {
    Eigen::VectorXcd c = rhs.col(j);
    for (Eigen::Index k = j + 1; k < n; ++k) c -= std::conj(T(j, k)) * Y.col(k);
    Eigen::MatrixXcd shifted = T;
    shifted.diagonal().array() += std::conj(T(j, j));
    Y.col(j) = shifted.triangularView<Eigen::Upper>().solve(c);
  }
  const Eigen::MatrixXd X = (U * Y * U.adjoint()).real();
  return 0.5 * (X + X.transpose());
}

Eigen::MatrixXd solve_filter_riccati(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C,
                                     const Eigen::MatrixXd& Q, double r) {
  if (spectral_abscissa(A) >= 0.0) {
    throw Error(ErrorCode::kObserverDesignFailed, "Newton-Kleinman start requires Hurwitz A");
  }
  const Eigen::Index n = A.rows();
  Eigen::MatrixXd gain = Eigen::MatrixXd::Zero(n, C.rows());
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  for (int iter = 0; iter < 100; ++iter) {
    const Eigen::MatrixXd closed = A - gain * C;
    const Eigen::MatrixXd P_next = solve_lyapunov(closed, Q + r * gain * gain.transpose());
    const double change = (P_next - P).norm();
    P = P_next;
    gain = P * C.transpose() / r;
    if (!P.allFinite()) break;
    if (change <= 1e-14 * std::max(1.0, P.norm())) {
      const Eigen::MatrixXd residual =
          A * P + P * A.transpose() - P * C.transpose() * C * P / r + Q;
      if (residual.norm() <= 1e-8 * std::max(1.0, P.norm() * A.norm())) return P;
      break;
    }
  }
  throw Error(ErrorCode::kObserverDesignFailed, "Riccati iteration did not converge");
}

double spectral_abscissa(const Eigen::MatrixXd& A) {
  if (A.size() == 0) return -std::numeric_limits<double>::infinity();
  Eigen::EigenSolver<Eigen::MatrixXd> eig(A, false);
  return eig.eigenvalues().real().maxCoeff();
}

double min_eigenvalue(const Eigen::MatrixXd& S) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S, Eigen::EigenvaluesOnly);
  return eig.eigenvalues()[0];
}

double max_eigenvalue(const Eigen::MatrixXd& S) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S, Eigen::EigenvaluesOnly);
  return eig.eigenvalues()[S.rows() - 1];
}

bool is_positive_definite(const Eigen::MatrixXd& S, double rel_tol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S, Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();
  const double norm = std::max(std::abs(ev[0]), std::abs(ev[ev.size() - 1]));
  return ev[0] > rel_tol * norm;
}

Eigen::MatrixXd orthogonal_complement(const Eigen::MatrixXd& K, double rank_tol) {
  const Eigen::Index n = K.rows();
  if (K.cols() == 0) return Eigen::MatrixXd::Identity(n, n);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(K);
  qr.setThreshold(rank_tol);
  const Eigen::Index rank = qr.rank();
  const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  return Q.rightCols(n - rank);
}

double markov_parameter(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                        const Eigen::RowVectorXd& c, int k) {
  Eigen::VectorXd v = b;
  for (int i = 0; i < k; ++i) v = A * v;
  return c.dot(v);
}

Resolvent::Resolvent(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  Eigen::HessenbergDecomposition<Eigen::MatrixXd> hd(A);
  hess_ = hd.matrixH();
  basis_ = hd.matrixQ();
  rhs_ = basis_.transpose() * b;
}

Eigen::VectorXcd Resolvent::solve(Complex s) const {
  // (sI - H) z = rhs with H upper Hessenberg: Gaussian elimination with
  // partial pivoting between adjacent rows, then back substitution.
  const Eigen::Index n = hess_.rows();
  Eigen::MatrixXcd M = -hess_.cast<Complex>();
  M.diagonal().array() += s;
  Eigen::VectorXcd z = rhs_.cast<Complex>();
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    if (std::abs(M(k + 1, k)) > std::abs(M(k, k))) {
      M.row(k).tail(n - k).swap(M.row(k + 1).tail(n - k));
      std::swap(z[k], z[k + 1]);
    }
    if (M(k, k) == Complex(0.0)) continue;
    const Complex f = M(k + 1, k) / M(k, k);
    M.row(k + 1).tail(n - k) -= f * M.row(k).tail(n - k);
    z[k + 1] -= f * z[k];
  }
  z = M.triangularView<Eigen::Upper>().solve(z);
  return basis_.cast<Complex>() * z;
}

Complex Resolvent::transfer(const Eigen::RowVectorXd& c, Complex s) const {
  return (c.cast<Complex>() * solve(s))(0);
}

double relative_smallest_singular_value(const Eigen::MatrixXcd& M) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv[0] == 0.0) return 0.0;
  return sv[sv.size() - 1] / sv[0];
}

}  // namespace detplace::linalg
