#include "detplace/game.hpp"

#include <cmath>

#include "detplace/simplex.hpp"

namespace detplace {
namespace {

constexpr double kPureTol = 1e-9;
constexpr double kValueTol = 1e-8;

struct ColumnPlayer {
  Eigen::VectorXd strategy;  // minimizer over columns
  double value = 0.0;
};

Eigen::VectorXd to_distribution(Eigen::VectorXd w) {
  w = w.cwiseMax(0.0);
  const double s = w.sum();
  if (!(s > 0.0)) throw Error(ErrorCode::kLPFailure, "degenerate strategy");
  return w / s;
}

// min over column mixtures of max over rows of G q.
ColumnPlayer solve_column_player(const Eigen::MatrixXd& G) {
  const double shift = 1.0 - G.minCoeff();
  const Eigen::MatrixXd positive = G.array() + shift;
  const LpSolution lp =
      solve_standard_lp(positive, Eigen::VectorXd::Ones(G.rows()), Eigen::VectorXd::Ones(G.cols()));
  if (!(lp.objective > 0.0)) throw Error(ErrorCode::kLPFailure, "nonpositive LP value");
  return {to_distribution(lp.x), 1.0 / lp.objective - shift};
}

template <typename Vec>
int first_index_of(const Vec& v, double target) {
  for (int i = 0; i < v.size(); ++i) {
    if (v[i] == target) return i;
  }
  return 0;
}

}  // namespace

std::string to_string(GameKind k) { return k == GameKind::kPure ? "Pure" : "Mixed"; }

std::optional<std::pair<Agent, Agent>> check_pure_equilibrium(const PayoffMatrix& pm) {
  if (pm.rows() == 0 || pm.cols() == 0) {
    throw Error(ErrorCode::kInvalidArgument, "empty payoff matrix");
  }
  if (!pm.all_finite()) throw Error(ErrorCode::kInvalidArgument, "non-finite payoff entry");
  const Eigen::VectorXd alpha = pm.alpha();
  const Eigen::VectorXd beta = pm.beta();
  const double min_alpha = alpha.minCoeff();
  const double max_beta = beta.maxCoeff();
  const double scale = std::max(std::abs(min_alpha), std::abs(max_beta));
  if (std::abs(min_alpha - max_beta) > kPureTol * scale) return std::nullopt;
  const int d = first_index_of(alpha, min_alpha);
  const int a = first_index_of(beta, max_beta);
  return std::make_pair(pm.attacks[a], pm.detectors[d]);
}

GameSolution solve_mixed(const PayoffMatrix& pm) {
  if (pm.rows() == 0 || pm.cols() == 0) {
    throw Error(ErrorCode::kInvalidArgument, "empty payoff matrix");
  }
  if (!pm.all_finite()) throw Error(ErrorCode::kInvalidArgument, "non-finite payoff entry");
  const ColumnPlayer defender = solve_column_player(pm.gamma);
  // The attacker minimizes the negated transposed game.
  const ColumnPlayer attacker = solve_column_player(-pm.gamma.transpose());
  const double attacker_value = -attacker.value;

  GameSolution sol;
  sol.kind = GameKind::kMixed;
  sol.defense_strategy = defender.strategy;
  sol.attack_strategy = attacker.strategy;
  sol.value = defender.value;
  sol.lp_gap = std::abs(defender.value - attacker_value);
  if (sol.lp_gap > kValueTol * std::max(1.0, std::abs(defender.value))) {
    throw Error(ErrorCode::kLPFailure, "attacker and defender programs disagree on the value");
  }
  return sol;
}

GameSolution place_detector(const PayoffMatrix& pm) {
  if (const auto pure = check_pure_equilibrium(pm)) {
    GameSolution sol;
    sol.kind = GameKind::kPure;
    sol.pure = pure;
    int a = 0;
    int d = 0;
    while (pm.attacks[a] != pure->first) ++a;
    while (pm.detectors[d] != pure->second) ++d;
    sol.attack_strategy = Eigen::VectorXd::Unit(pm.rows(), a);
    sol.defense_strategy = Eigen::VectorXd::Unit(pm.cols(), d);
    sol.value = pm.gamma(a, d);
    return sol;
  }
  return solve_mixed(pm);
}

}  // namespace detplace
