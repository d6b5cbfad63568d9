#pragma once

#include <optional>

#include <Eigen/Dense>

#include "detplace/netmodel.hpp"
#include "detplace/types.hpp"

namespace detplace {

/// Closed-loop network x' = A x + E_a zeta, y_i = C_i x.
///
/// The state is stacked block-wise as x = [p; v; xi], each block of length N
/// in agent order, so agent k's velocity sits at position N + k (zero-based).
class ClosedLoopSystem {
 public:
  ClosedLoopSystem(Eigen::MatrixXd A, int agent_count, Agent rho);

  const Eigen::MatrixXd& A() const { return A_; }
  int agent_count() const { return n_; }
  int state_dim() const { return 3 * n_; }
  Agent rho() const { return rho_; }

  /// E_a = [0; e_a; 0].
  Eigen::VectorXd input_column(Agent a) const;
  /// C_i = [e_i^T, 0, 0].
  Eigen::RowVectorXd output_row(Agent i) const;

 private:
  Eigen::MatrixXd A_;
  int n_;
  Agent rho_;
};

ClosedLoopSystem assemble_closed_loop(const NetworkModel& model);

/// Numeric Lyapunov certificate for the healthy closed loop.
struct StabilityCertificate {
  double sigma = 0.0;
  Eigen::MatrixXd P_bar;
  Eigen::MatrixXd Q_bar;
  double min_eig_P = 0.0;
  double min_eig_Q = 0.0;
  /// Independent check: max Re(eig(A)).
  double spectral_abscissa = 0.0;
};

/// Upper end of the admissible sigma interval:
/// min{ min_i h_i/m_i, 4 min_i theta_i / (kappa_D max_i phi_i) }.
double sigma_upper_bound(const NetworkModel& model);

/// Builds P_bar and Q_bar = -(A^T P_bar + P_bar A) in the inertia-weighted
/// form and checks both are positive definite (relative tolerance 1e-9).
/// sigma defaults to the midpoint of the admissible interval.
///
/// Throws Error(kInvalidSigma) for sigma outside the open interval and
/// Error(kCertificateFailed) if either matrix is not positive definite or A
/// is not Hurwitz.
StabilityCertificate certify_stability(const ClosedLoopSystem& sys, const NetworkModel& model,
                                       std::optional<double> sigma = std::nullopt);

/// Steady-state Kalman gain for (A, C_d) with unit process and measurement
/// noise weights, so that A - K_d C_d is Hurwitz.
Eigen::VectorXd design_observer(const ClosedLoopSystem& sys, Agent d);

/// Observer-augmented plant z = [x; x - x_hat] for one attack/detector pair.
struct AugmentedPlant {
  Agent attack;
  Agent detector;
  Agent rho;
  Eigen::VectorXd K_d;        // 3N
  Eigen::MatrixXd A_d;        // blkdiag(A, A - K_d C_d), 6N x 6N
  Eigen::VectorXd E_bar;      // [E_a; E_a]
  Eigen::RowVectorXd C_rho;   // [C_rho, 0]
  Eigen::RowVectorXd C_det;   // [0, C_d]

  int state_dim() const { return static_cast<int>(A_d.rows()); }
  /// Upper-left and lower-right diagonal blocks.
  Eigen::MatrixXd plant_block() const;
  Eigen::MatrixXd observer_error_block() const;
};

/// Throws Error(kForbiddenAgent) if a or d is rho, Error(kBadIndex) if either
/// is not an agent of the network.
AugmentedPlant build_augmented(const ClosedLoopSystem& sys, Agent a, Agent d,
                               const Eigen::VectorXd& K_d);

/// Convenience: designs K_d and assembles the augmented plant.
AugmentedPlant build_augmented(const ClosedLoopSystem& sys, Agent a, Agent d);

}  // namespace detplace
