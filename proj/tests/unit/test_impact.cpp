#include <random>

#include <gtest/gtest.h>

#include "detplace/impact.hpp"
#include "detplace/scenario.hpp"
#include "oracles.hpp"

namespace detplace {
namespace {

constexpr double kAgreement = 1e-3;

NetworkModel unit_path(int n, int rho) {
  NetworkConfig c;
  c.agents.assign(n, AgentParameters{1, 1, 1, 1});
  for (int i = 1; i < n; ++i) c.edges.push_back({Agent(i), Agent(i + 1), -1.0});
  c.kappa_d = 1;
  c.tau = 0.5;
  c.rho = Agent(rho);
  c.delta_sq = 1.5;
  return build_network(c);
}

// Frequency sweep written independently of the library: dense complex solves
// on a log grid plus DC.
double brute_force_ratio(const AugmentedPlant& p) {
  double best = 0.0;
  auto ratio = [&](std::complex<double> s) {
    const auto num = testing::dense_transfer(p.A_d, p.E_bar, p.C_rho, s);
    const auto den = testing::dense_transfer(p.A_d, p.E_bar, p.C_det, s);
    return std::norm(num) / std::norm(den);
  };
  best = ratio(0.0);
  for (int k = 0; k <= 4000; ++k) {
    const double w = std::pow(10.0, -3.0 + 5.0 * k / 4000.0);
    best = std::max(best, ratio({0.0, w}));
  }
  return best;
}

TEST(ImpactSdp, IdenticalOutputsGiveThreshold) {
  const NetworkModel m = unit_path(3, 3);
  const ClosedLoopSystem sys = assemble_closed_loop(m);
  AugmentedPlant p = build_augmented(sys, Agent(1), Agent(2));
  p.C_rho = p.C_det;
  const ImpactResult r = evaluate_impact(p, m.delta_sq());
  ASSERT_EQ(r.status, ImpactStatus::kOptimal) << r.message;
  // The optimum is F = 0, a degenerate face; the gap stalls near 1e-6.
  EXPECT_NEAR(r.gamma_star, m.delta_sq(), 1e-5 * m.delta_sq());
  ASSERT_TRUE(r.oracle_ok);
  EXPECT_NEAR(r.oracle_gamma, m.delta_sq(), 1e-9);
  EXPECT_TRUE(r.agreement);
}

TEST(ImpactSdp, ScalesWithThreshold) {
  const NetworkModel m = unit_path(3, 3);
  const ClosedLoopSystem sys = assemble_closed_loop(m);
  const AugmentedPlant p = build_augmented(sys, Agent(1), Agent(2));
  const ImpactResult base = impact_sdp(p, 1.0);
  ASSERT_EQ(base.status, ImpactStatus::kOptimal);
  for (double c : {0.25, 3.0, 40.0}) {
    const ImpactResult scaled = impact_sdp(p, c);
    ASSERT_EQ(scaled.status, ImpactStatus::kOptimal);
    EXPECT_NEAR(scaled.gamma_star, c * base.gamma_star, 1e-6 * c * base.gamma_star);
  }
}

TEST(ImpactSdp, CertificateIsValid) {
  const NetworkModel m = unit_path(4, 4);
  const ClosedLoopSystem sys = assemble_closed_loop(m);
  const AugmentedPlant p = build_augmented(sys, Agent(1), Agent(3));
  const ImpactResult r = impact_sdp(p, m.delta_sq());
  ASSERT_EQ(r.status, ImpactStatus::kOptimal);
  const Eigen::MatrixXd& F = r.certificate;
  ASSERT_EQ(F.rows(), p.state_dim());
  const double scale = std::max(1.0, F.norm());
  EXPECT_GE(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(F).eigenvalues().minCoeff(), -1e-7 * scale);

  // Full dissipation inequality assembled here rather than taken from the library.
  const int n = p.state_dim();
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(n + 1, n + 1);
  R.topLeftCorner(n, n) = p.A_d.transpose() * F + F * p.A_d +
                          p.C_rho.transpose() * p.C_rho -
                          (r.gamma_star / m.delta_sq()) * p.C_det.transpose() * p.C_det;
  R.topRightCorner(n, 1) = F * p.E_bar;
  R.bottomLeftCorner(1, n) = (F * p.E_bar).transpose();
  EXPECT_LE(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(R).eigenvalues().maxCoeff(), 1e-6 * scale);
  EXPECT_LE(r.lmi_residual, 1e-7);
}

TEST(ImpactSdp, RelativeDegreeMismatchIsUnbounded) {
  // Path 1-2-3-4, rho = 2: the detector at 4 is farther from agent 1 than rho.
  const NetworkModel m = unit_path(4, 2);
  const ClosedLoopSystem sys = assemble_closed_loop(m);
  const AugmentedPlant p = build_augmented(sys, Agent(1), Agent(4));
  EXPECT_EQ(impact_sdp(p, m.delta_sq()).status, ImpactStatus::kUnbounded);
  try {
    impact_frequency_oracle(p, m.delta_sq());
    ADD_FAILURE() << "oracle returned a finite value";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnboundedRatio);
  }
  const ImpactResult r = evaluate_impact(p, m.delta_sq());
  EXPECT_FALSE(r.finite());
  EXPECT_FALSE(r.oracle_ok);
  EXPECT_TRUE(r.agreement);
}

TEST(FrequencyOracle, MatchesBruteForceSweep) {
  std::mt19937_64 rng(101);
  testing::RandomModelOptions opt;
  opt.min_agents = opt.max_agents = 4;
  for (int trial = 0; trial < 5; ++trial) {
    const NetworkModel m = testing::random_model(rng, opt);
    const ClosedLoopSystem sys = assemble_closed_loop(m);
    for (Agent d : detection_candidates_by_distance(m)) {
      const AugmentedPlant p = build_augmented(sys, m.agents_except_rho().front(), d);
      if (feasibility_report(p).verdict != Verdict::kFeasible) continue;
      const OracleResult o = impact_frequency_oracle(p, 1.0);
      const double brute = brute_force_ratio(p);
      // The oracle refines the grid, so it can only exceed the brute sweep.
      EXPECT_GE(o.gamma, brute * (1.0 - 1e-9));
      EXPECT_LE(o.gamma, brute * (1.0 + 1e-2));
    }
  }
}

TEST(FrequencyOracle, RandomFeasiblePlantsMatchSdp) {
  std::mt19937_64 rng(103);
  testing::RandomModelOptions opt;
  opt.min_agents = opt.max_agents = 4;
  int checked = 0;
  for (int trial = 0; trial < 6; ++trial) {
    const NetworkModel m = testing::random_model(rng, opt);
    const ClosedLoopSystem sys = assemble_closed_loop(m);
    for (Agent d : detection_candidates_by_distance(m)) {
      for (Agent a : m.agents_except_rho()) {
        const AugmentedPlant p = build_augmented(sys, a, d);
        if (feasibility_report(p).verdict != Verdict::kFeasible) continue;
        const ImpactResult r = evaluate_impact(p, m.delta_sq());
        ASSERT_EQ(r.status, ImpactStatus::kOptimal) << r.message;
        ASSERT_TRUE(r.oracle_ok);
        EXPECT_LE(std::abs(r.gamma_star - r.oracle_gamma),
                  kAgreement * std::max(r.gamma_star, m.delta_sq()));
        EXPECT_GE(r.gamma_star, 0.0);
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 5);
}

TEST(PayoffMatrix, TwoAgentsGiveSingleEntry) {
  const NetworkModel m = load_network_config(std::filesystem::path(DETPLACE_DATA_DIR) / "two_agent.cfg");
  const ClosedLoopSystem sys = assemble_closed_loop(m);
  const PayoffMatrix pm = payoff_matrix(m, sys, detection_set(sys, m));
  ASSERT_EQ(pm.rows(), 1);
  ASSERT_EQ(pm.cols(), 1);
  EXPECT_TRUE(pm.all_finite());
  EXPECT_GT(pm.gamma(0, 0), 0.0);
  EXPECT_TRUE(pm.entry(0, 0).agreement);
}

TEST(PayoffMatrix, EntriesFiniteNonnegativeAndIndependentOfThreads) {
  std::mt19937_64 rng(107);
  testing::RandomModelOptions opt;
  opt.min_agents = opt.max_agents = 5;
  const NetworkModel m = testing::random_model(rng, opt);
  const ClosedLoopSystem sys = assemble_closed_loop(m);
  const DetectionSet ds = detection_set(sys, m);
  const PayoffMatrix serial = payoff_matrix(m, sys, ds, {}, 1);
  const PayoffMatrix pooled = payoff_matrix(m, sys, ds, {}, 3);
  EXPECT_EQ(serial.gamma, pooled.gamma);
  EXPECT_EQ(serial.rows(), m.agent_count() - 1);
  EXPECT_EQ(serial.cols(), static_cast<int>(ds.members.size()));
  EXPECT_TRUE(serial.all_finite());
  EXPECT_GE(serial.gamma.minCoeff(), 0.0);
  EXPECT_GE(serial.alpha().minCoeff(), serial.beta().maxCoeff());
}

TEST(PayoffMatrix, FromValuesLabelsAndExtremes) {
  Eigen::MatrixXd g(3, 2);
  g << 4, 1, 2, 3, 0, 5;
  const PayoffMatrix pm = PayoffMatrix::from_values(g);
  EXPECT_EQ(pm.attacks.size(), 3u);
  EXPECT_EQ(pm.detectors.back(), Agent(2));
  EXPECT_EQ(pm.alpha(), Eigen::Vector2d(4, 5));
  EXPECT_EQ(pm.beta(), Eigen::Vector3d(1, 2, 0));
}

TEST(ImpactBound, SimulatedInputsNeverBeatTheSupremum) {
  const NetworkModel m = unit_path(3, 3);
  const ClosedLoopSystem sys = assemble_closed_loop(m);
  const AugmentedPlant p = build_augmented(sys, Agent(1), Agent(2));
  const ImpactResult r = impact_sdp(p, m.delta_sq());
  ASSERT_EQ(r.status, ImpactStatus::kOptimal);
  const double bound = r.gamma_star / m.delta_sq();

  std::mt19937_64 rng(109);
  std::uniform_real_distribution<double> freq(0.05, 5.0);
  std::uniform_real_distribution<double> duration(5.0, 40.0);
  SimulationOptions opt;
  opt.horizon = 80.0;
  opt.step = std::min(1e-2, max_step(p));
  for (int k = 0; k < 10; ++k) {
    const double w = freq(rng);
    const double stop = duration(rng);  // finite-energy input
    const auto input = [=](double t) { return t < stop ? std::sin(w * t) : 0.0; };
    const SimulationRun run = simulate(p, input, m.delta_sq(), opt);
    EXPECT_LE(run.energy_ratio(), bound + 1e-3) << "w=" << w << " stop=" << stop;
  }
}

}  // namespace
}  // namespace detplace
