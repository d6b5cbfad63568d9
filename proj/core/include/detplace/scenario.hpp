#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "detplace/dynamics.hpp"
#include "detplace/impact.hpp"

namespace detplace {

/// zeta(t) = amplitude * sin(frequency * t), or the constant amplitude when
/// frequency is zero.
struct AttackSignal {
  Agent agent;
  double amplitude = 0.0;
  double frequency = 0.0;

  double operator()(double t) const;
};

/// Sinusoid at the worst-case frequency whose steady-state normalized
/// residual energy equals margin * delta_sq. Frequencies below 1e-3 are
/// realized as a constant input.
///
/// Throws Error(kInvalidArgument) if the impact is not finite or margin is
/// negative, and Error(kInfiniteWorstFrequency) if the supremum sits at
/// infinite frequency.
AttackSignal synthesize_stealthy_attack(const AugmentedPlant& plant, const ImpactResult& impact,
                                        double delta_sq, double margin);

struct SimulationOptions {
  double horizon = 200.0;
  double step = 1e-3;
  /// Keep every stride-th integration step in the sampled trajectories.
  int record_stride = 100;
};

struct SimulationRun {
  double horizon = 0.0;
  double step = 0.0;
  double delta_sq = 0.0;
  std::vector<double> t;
  std::vector<double> zeta;
  std::vector<double> y_rho;
  std::vector<double> eta;
  /// Running energies (1/t) int_0^t s^2, zero at t = 0.
  std::vector<double> energy_y;
  std::vector<double> energy_eta;
  double final_energy_y = 0.0;
  double final_energy_eta = 0.0;
  Eigen::VectorXd final_state;
  /// Residual energy at the horizon exceeds delta_sq.
  bool detected = false;

  /// final_energy_y / final_energy_eta (0 if both vanish).
  double energy_ratio() const;
};

/// Largest step simulate() accepts for this plant, 0.1 / ||A_d||_2.
double max_step(const AugmentedPlant& plant);

/// Fixed-step RK4 integration of the augmented plant from the zero state.
///
/// Throws Error(kStepTooLarge) if step > 0.1 / ||A_d||_2 and
/// Error(kInvalidArgument) for a nonpositive horizon or step.
SimulationRun simulate(const AugmentedPlant& plant, const std::function<double(double)>& input,
                       double delta_sq, const SimulationOptions& options = {});

/// Residual from integrating the plant and the observer as separate
/// equations (state x and estimate x_hat), sampled like simulate().
std::vector<double> simulate_residual_componentwise(const ClosedLoopSystem& sys, Agent attack,
                                                    Agent detector, const Eigen::VectorXd& K_d,
                                                    const std::function<double(double)>& input,
                                                    const SimulationOptions& options = {});

}  // namespace detplace
