#pragma once

#include <optional>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "detplace/impact.hpp"

namespace detplace {

enum class GameKind { kPure, kMixed };

std::string to_string(GameKind k);

/// Equilibrium of the zero-sum placement game. The attacker picks a row and
/// maximizes the payoff; the defender picks a column and minimizes it.
struct GameSolution {
  GameKind kind = GameKind::kMixed;
  /// (attack, detector) for a pure equilibrium.
  std::optional<std::pair<Agent, Agent>> pure;
  Eigen::VectorXd attack_strategy;    // over pm.attacks
  Eigen::VectorXd defense_strategy;   // over pm.detectors
  double value = 0.0;
  /// |value_attacker - value_defender| of the two linear programs (0 if pure).
  double lp_gap = 0.0;
};

/// Saddle point in pure strategies when min alpha equals max beta within
/// 1e-9 relative. Ties go to the lowest index.
std::optional<std::pair<Agent, Agent>> check_pure_equilibrium(const PayoffMatrix& pm);

/// Mixed equilibrium from two linear programs, one per player.
/// Throws Error(kLPFailure) when the values differ by more than 1e-8.
GameSolution solve_mixed(const PayoffMatrix& pm);

/// Pure solution when one exists, otherwise the mixed one.
GameSolution place_detector(const PayoffMatrix& pm);

}  // namespace detplace
