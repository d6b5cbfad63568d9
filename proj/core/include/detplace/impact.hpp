#pragma once

#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "detplace/dynamics.hpp"
#include "detplace/sdp.hpp"
#include "detplace/structure.hpp"

namespace detplace {

enum class ImpactStatus { kOptimal, kInfeasible, kUnbounded, kNumericalTrouble };

std::string to_string(ImpactStatus s);

/// Worst-case impact of a stealthy attack for one (attack, detector) pair.
struct ImpactResult {
  Agent attack;
  Agent detector;
  ImpactStatus status = ImpactStatus::kNumericalTrouble;
  /// +inf unless status is Optimal.
  double gamma_star = std::numeric_limits<double>::infinity();
  /// Storage matrix F (6N x 6N); empty unless status is Optimal.
  Eigen::MatrixXd certificate;
  /// Largest eigenvalue of the full LMI at the solution, relative to the
  /// scale of its terms.
  double lmi_residual = 0.0;
  int solver_iterations = 0;

  /// Frequency-domain cross-check; oracle_ok is false when the oracle
  /// reported an unbounded ratio.
  bool oracle_ok = false;
  double oracle_gamma = std::numeric_limits<double>::infinity();
  /// Maximizing frequency; +inf when the supremum is the high-frequency limit.
  double worst_frequency = std::numeric_limits<double>::quiet_NaN();
  /// |gamma_star - oracle_gamma| <= 1e-3 max(gamma_star, delta_sq).
  bool agreement = false;

  std::string message;

  bool finite() const { return status == ImpactStatus::kOptimal; }
};

struct ImpactOptions {
  sdp::Settings solver;
  /// Post-hoc acceptance threshold on lmi_residual.
  double residual_tol = 1e-7;
};

/// Minimizes gamma over gamma >= 0, F >= 0 subject to the dissipation LMI of
/// the augmented plant. Directions that the LMI forces into the kernel of F
/// are eliminated exactly before the conic solve.
///
/// Returns status Unbounded when the detector channel has a larger relative
/// degree than the performance channel or an unshared unstable real zero.
ImpactResult impact_sdp(const AugmentedPlant& plant, double delta_sq,
                        const ImpactOptions& options = {});

struct OracleResult {
  double gamma = 0.0;
  double omega_star = 0.0;
};

/// delta_sq * sup_w |G_rho(jw) / G_d(jw)|^2 over w = 0, a log grid on
/// [1e-4, 1e4] refined by golden section, and the w -> inf limit.
///
/// Throws Error(kUnboundedRatio) when the high-frequency limit is infinite,
/// G_d vanishes on the grid, or the ratio exceeds 1e12.
OracleResult impact_frequency_oracle(const AugmentedPlant& plant, double delta_sq);

/// impact_sdp plus the oracle and the agreement flag.
ImpactResult evaluate_impact(const AugmentedPlant& plant, double delta_sq,
                             const ImpactOptions& options = {});

/// Worst-case impact for every attack location (rows) and detector (columns).
struct PayoffMatrix {
  std::vector<Agent> attacks;
  std::vector<Agent> detectors;
  Eigen::MatrixXd gamma;
  /// Row-major per-entry details; may be empty for matrices built from values.
  std::vector<ImpactResult> entries;

  /// Labels rows and columns 1..n.
  static PayoffMatrix from_values(const Eigen::MatrixXd& values);

  int rows() const { return static_cast<int>(gamma.rows()); }
  int cols() const { return static_cast<int>(gamma.cols()); }
  /// Column maxima (one per detector).
  Eigen::VectorXd alpha() const;
  /// Row minima (one per attack).
  Eigen::VectorXd beta() const;
  const ImpactResult& entry(int row, int col) const { return entries.at(row * cols() + col); }
  bool all_finite() const;
};

/// Solves every (a, d) pair with a in V \ {rho} and d in the detection set.
/// Entries are computed by a pool of `threads` workers (0: hardware
/// concurrency) and stored by position, so the result does not depend on
/// scheduling. Failures are recorded per entry.
PayoffMatrix payoff_matrix(const NetworkModel& model, const ClosedLoopSystem& sys,
                           const DetectionSet& detection, const ImpactOptions& options = {},
                           unsigned threads = 0);

}  // namespace detplace
