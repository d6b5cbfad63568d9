#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "detplace/dynamics.hpp"
#include "detplace/netmodel.hpp"

namespace detplace {

/// Single-input single-output realization (A, B, C, D).
struct SisoSystem {
  Eigen::MatrixXd A;
  Eigen::VectorXd B;
  Eigen::RowVectorXd C;
  double D = 0.0;
};

/// Sigma_d = (A_d, E_bar, C_det, 0): attack input to residual.
SisoSystem detector_channel(const AugmentedPlant& plant);
/// Sigma_rho = (A_d, E_bar, C_rho, 0): attack input to protected output.
SisoSystem performance_channel(const AugmentedPlant& plant);
/// Sigma_m = (A, E_a, C_d, 0).
SisoSystem measurement_channel(const ClosedLoopSystem& sys, Agent a, Agent d);
/// Sigma_o = (A - K_d C_d, K_d, -C_d, 1).
SisoSystem residual_generator(const ClosedLoopSystem& sys, Agent d, const Eigen::VectorXd& K_d);

enum class ZeroKind { kStable, kPositiveRealUnstable, kComplexUnstable };

struct InvariantZero {
  std::complex<double> value;
  ZeroKind kind = ZeroKind::kStable;
  /// sigma_min / sigma_max of the system pencil at value.
  double residual = 0.0;
};

struct ZeroReport {
  std::vector<InvariantZero> zeros;  // sorted by (real, imag)

  std::vector<InvariantZero> unstable() const;
  bool has_positive_real_unstable() const;
  bool has_complex_unstable() const;
};

/// Relative smallest singular value of [lambda I - A, -B; C, D].
double pencil_residual(const SisoSystem& sys, std::complex<double> lambda);

/// Finite eigenvalues of the Rosenbrock pencil, obtained from the pencil
/// deflated onto the largest output-nulling subspace (the zero dynamics).
/// Throws Error(kPencilFailure) if the transfer function vanishes
/// identically or the eigenvalue iteration fails.
ZeroReport finite_zeros(const SisoSystem& sys);
ZeroReport finite_zeros(const AugmentedPlant& plant);

/// Smallest k with C_i A^{k-1} E_a != 0, where the zero test is
/// |C A^{k-1} E| > 1e-9 ||C|| ||A^{k-1} E||.
///
/// Throws Error(kDegreeOverflow) if no k up to twice the state dimension
/// qualifies.
int relative_degree(const ClosedLoopSystem& sys, Agent i, Agent a);
int relative_degree(const SisoSystem& sys);

struct RelativeDegreeTable {
  Eigen::MatrixXi r;  // r(i, a), zero-based indices
  int at(Agent i, Agent a) const { return r(i.index(), a.index()); }
};

RelativeDegreeTable relative_degree_table(const ClosedLoopSystem& sys);

struct DetectionSet {
  std::vector<Agent> members;  // ascending
  /// Candidates passing the degree rule but rejected by the finite-zero screen.
  std::vector<std::pair<Agent, std::string>> rejected;
  /// Members kept despite unshared complex unstable zeros, with a description.
  std::vector<std::pair<Agent, std::string>> unverified;

  bool contains(Agent d) const;
};

/// Candidate detectors d with r(d, a) <= r(rho, a) for every a != rho.
/// The rule is evaluated both on hop distances and on Markov parameters.
/// Candidates with an unshared unstable real zero in some (A, E_a, C_d) are
/// rejected; unshared complex unstable zeros are recorded in `unverified`.
///
/// Throws Error(kMethodDisagreement) if the two evaluations differ and
/// Error(kEmptyDetectionSet) if no candidate survives.
DetectionSet detection_set(const ClosedLoopSystem& sys, const NetworkModel& model);

/// Degree rule only, on hop distances (no numerics).
std::vector<Agent> detection_candidates_by_distance(const NetworkModel& model);
/// Degree rule only, on Markov-parameter relative degrees.
std::vector<Agent> detection_candidates_by_markov(const ClosedLoopSystem& sys,
                                                  const NetworkModel& model);

/// Q(lambda) = L + Theta + lambda^2 M + lambda H + lambda kappa_D / (tau lambda + 1) Phi.
/// Throws Error(kPoleAtFilter) at lambda = -1/tau.
Eigen::MatrixXcd q_lambda(const NetworkModel& model, std::complex<double> lambda);

/// Result of sampling Q(lambda)^{-1} over a right half-plane grid.
struct RhpEntryScreen {
  bool passed = true;
  double min_relative_entry = 0.0;  // min |entry| / max |entry| over all samples
  std::complex<double> worst_lambda;
  int samples = 0;
};

/// Samples Re(lambda) in {0, 0.01, 0.1, 1, 10} x Im(lambda) in {0} and 61
/// log-spaced values on [1e-3, 1e3] (both signs are equivalent by symmetry).
RhpEntryScreen rhp_entry_screen(const NetworkModel& model, double tol = 1e-10);

enum class Verdict {
  kFeasible,
  kInfeasibleRelDegree,
  kInfeasibleUnstableZero,
  kUnverifiedComplexZeros,
};

std::string to_string(Verdict v);

struct FeasibilityReport {
  Verdict verdict = Verdict::kFeasible;
  int r_detector = 0;
  int r_rho = 0;
  ZeroReport detector_zeros;
};

/// A zero of Sigma_d counts as shared with Sigma_rho when Sigma_rho's pencil
/// residual there is below 1e-6 and Sigma_rho has a computed zero within
/// 1e-6 max(1, |z|).
FeasibilityReport feasibility_report(const AugmentedPlant& plant);
Verdict feasibility_verdict(const NetworkModel& model, const ClosedLoopSystem& sys, Agent a,
                            Agent d);

}  // namespace detplace
