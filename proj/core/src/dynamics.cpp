#include "detplace/dynamics.hpp"

#include <algorithm>
#include <sstream>

#include "detplace/linalg.hpp"

namespace detplace {

ClosedLoopSystem::ClosedLoopSystem(Eigen::MatrixXd A, int agent_count, Agent rho)
    : A_(std::move(A)), n_(agent_count), rho_(rho) {}

Eigen::VectorXd ClosedLoopSystem::input_column(Agent a) const {
  if (a.id() < 1 || a.id() > n_) {
    throw Error(ErrorCode::kBadIndex, "no agent " + std::to_string(a.id()));
  }
  Eigen::VectorXd e = Eigen::VectorXd::Zero(3 * n_);
  e[n_ + a.index()] = 1.0;
  return e;
}

Eigen::RowVectorXd ClosedLoopSystem::output_row(Agent i) const {
  if (i.id() < 1 || i.id() > n_) {
    throw Error(ErrorCode::kBadIndex, "no agent " + std::to_string(i.id()));
  }
  Eigen::RowVectorXd c = Eigen::RowVectorXd::Zero(3 * n_);
  c[i.index()] = 1.0;
  return c;
}

ClosedLoopSystem assemble_closed_loop(const NetworkModel& model) {
  const int n = model.agent_count();
  const Eigen::MatrixXd L = laplacian(model).L;
  const Eigen::VectorXd m_inv = model.inertia().cwiseInverse();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  const double kd = model.kappa_d();
  const double tau = model.tau();

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(3 * n, 3 * n);
  A.block(0, n, n, n) = I;
  Eigen::MatrixXd stiffness = L;
  stiffness.diagonal() += model.theta();
  A.block(n, 0, n, n) = -(m_inv.asDiagonal() * stiffness);
  A.block(n, n, n, n) = (-m_inv.cwiseProduct(model.damping())).asDiagonal();
  A.block(n, 2 * n, n, n) = m_inv.cwiseProduct(model.phi()).asDiagonal();
  A.block(2 * n, n, n, n) = -(kd / tau) * I;
  A.block(2 * n, 2 * n, n, n) = -(1.0 / tau) * I;
  return ClosedLoopSystem(std::move(A), n, model.rho());
}

double sigma_upper_bound(const NetworkModel& model) {
  const double damping_ratio = (model.damping().array() / model.inertia().array()).minCoeff();
  const double gain_ratio =
      4.0 * model.theta().minCoeff() / (model.kappa_d() * model.phi().maxCoeff());
  return std::min(damping_ratio, gain_ratio);
}

StabilityCertificate certify_stability(const ClosedLoopSystem& sys, const NetworkModel& model,
                                       std::optional<double> sigma) {
  const double bound = sigma_upper_bound(model);
  const double s = sigma.value_or(0.5 * bound);
  if (!(s > 0.0 && s < bound)) {
    std::ostringstream os;
    os << "sigma = " << s << " outside (0, " << bound << ")";
    throw Error(ErrorCode::kInvalidSigma, os.str());
  }

  const int n = model.agent_count();
  const Eigen::MatrixXd L = laplacian(model).L;
  const Eigen::MatrixXd M = model.inertia().asDiagonal();
  const Eigen::MatrixXd H = model.damping().asDiagonal();
  const Eigen::MatrixXd Theta = model.theta().asDiagonal();
  const Eigen::MatrixXd Phi = model.phi().asDiagonal();
  const double kd = model.kappa_d();
  const double tau = model.tau();

  StabilityCertificate cert;
  cert.sigma = s;
  cert.P_bar = Eigen::MatrixXd::Zero(3 * n, 3 * n);
  cert.P_bar.block(0, 0, n, n) = L + Theta + s * H;
  cert.P_bar.block(0, n, n, n) = s * M;
  cert.P_bar.block(n, 0, n, n) = s * M;
  cert.P_bar.block(n, n, n, n) = M;
  cert.P_bar.block(2 * n, 2 * n, n, n) = (tau / kd) * Phi;

  cert.Q_bar = Eigen::MatrixXd::Zero(3 * n, 3 * n);
  cert.Q_bar.block(0, 0, n, n) = 2.0 * s * (L + Theta);
  cert.Q_bar.block(0, 2 * n, n, n) = -s * Phi;
  cert.Q_bar.block(2 * n, 0, n, n) = -s * Phi;
  cert.Q_bar.block(n, n, n, n) = 2.0 * (H - s * M);
  cert.Q_bar.block(2 * n, 2 * n, n, n) = (2.0 / kd) * Phi;

  const Eigen::MatrixXd& A = sys.A();
  const Eigen::MatrixXd derivative = A.transpose() * cert.P_bar + cert.P_bar * A;
  if ((derivative + cert.Q_bar).norm() > 1e-9 * std::max(1.0, cert.Q_bar.norm())) {
    throw Error(ErrorCode::kCertificateFailed,
                "Q_bar does not match -(A^T P_bar + P_bar A); system and model disagree");
  }

  cert.min_eig_P = linalg::min_eigenvalue(cert.P_bar);
  cert.min_eig_Q = linalg::min_eigenvalue(cert.Q_bar);
  cert.spectral_abscissa = linalg::spectral_abscissa(A);
  if (!linalg::is_positive_definite(cert.P_bar) || !linalg::is_positive_definite(cert.Q_bar)) {
    std::ostringstream os;
    os << "certificate not positive definite (min eig P = " << cert.min_eig_P
       << ", min eig Q = " << cert.min_eig_Q << ")";
    throw Error(ErrorCode::kCertificateFailed, os.str());
  }
  if (!(cert.spectral_abscissa < 0.0)) {
    throw Error(ErrorCode::kCertificateFailed, "A has an eigenvalue in the closed right half-plane");
  }
  return cert;
}

Eigen::VectorXd design_observer(const ClosedLoopSystem& sys, Agent d) {
  const Eigen::RowVectorXd C = sys.output_row(d);
  const Eigen::Index n = sys.state_dim();
  const Eigen::MatrixXd P =
      linalg::solve_filter_riccati(sys.A(), C, Eigen::MatrixXd::Identity(n, n), 1.0);
  Eigen::VectorXd K = P * C.transpose();
  if (!(linalg::spectral_abscissa(sys.A() - K * C) < 0.0)) {
    throw Error(ErrorCode::kObserverDesignFailed, "A - K_d C_d is not Hurwitz");
  }
  return K;
}

Eigen::MatrixXd AugmentedPlant::plant_block() const {
  const Eigen::Index n = A_d.rows() / 2;
  return A_d.topLeftCorner(n, n);
}

Eigen::MatrixXd AugmentedPlant::observer_error_block() const {
  const Eigen::Index n = A_d.rows() / 2;
  return A_d.bottomRightCorner(n, n);
}

AugmentedPlant build_augmented(const ClosedLoopSystem& sys, Agent a, Agent d,
                               const Eigen::VectorXd& K_d) {
  if (a == sys.rho() || d == sys.rho()) {
    throw Error(ErrorCode::kForbiddenAgent,
                "attack and detector must differ from the protected agent " +
                    std::to_string(sys.rho().id()));
  }
  const Eigen::Index n = sys.state_dim();
  if (K_d.size() != n) throw Error(ErrorCode::kInvalidArgument, "observer gain has wrong size");
  const Eigen::VectorXd E = sys.input_column(a);
  const Eigen::RowVectorXd Cd = sys.output_row(d);
  const Eigen::RowVectorXd Cr = sys.output_row(sys.rho());

  AugmentedPlant plant;
  plant.attack = a;
  plant.detector = d;
  plant.rho = sys.rho();
  plant.K_d = K_d;
  plant.A_d = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  plant.A_d.topLeftCorner(n, n) = sys.A();
  plant.A_d.bottomRightCorner(n, n) = sys.A() - K_d * Cd;
  plant.E_bar.resize(2 * n);
  plant.E_bar << E, E;
  plant.C_rho = Eigen::RowVectorXd::Zero(2 * n);
  plant.C_rho.head(n) = Cr;
  plant.C_det = Eigen::RowVectorXd::Zero(2 * n);
  plant.C_det.tail(n) = Cd;
  return plant;
}

AugmentedPlant build_augmented(const ClosedLoopSystem& sys, Agent a, Agent d) {
  if (a == sys.rho() || d == sys.rho()) return build_augmented(sys, a, d, Eigen::VectorXd());
  return build_augmented(sys, a, d, design_observer(sys, d));
}

}  // namespace detplace
