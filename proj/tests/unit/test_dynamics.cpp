#include <random>

#include <gtest/gtest.h>

#include "detplace/dynamics.hpp"
#include "detplace/linalg.hpp"
#include "oracles.hpp"

namespace detplace {
namespace {

NetworkModel single_agent() {
  NetworkConfig c;
  c.agents = {AgentParameters{1, 1, 1, 1}};
  c.kappa_d = 2;
  c.tau = 1;
  c.rho = Agent(1);
  c.delta_sq = 1;
  return build_network(c);
}

NetworkModel unit_path(int n, int rho) {
  NetworkConfig c;
  c.agents.assign(n, AgentParameters{1, 1, 1, 1});
  for (int i = 1; i < n; ++i) c.edges.push_back({Agent(i), Agent(i + 1), -1.0});
  c.kappa_d = 1;
  c.tau = 1;
  c.rho = Agent(rho);
  c.delta_sq = 1;
  return build_network(c);
}

double max_real_eig(const Eigen::MatrixXd& A) {
  return A.eigenvalues().real().maxCoeff();
}

TEST(ClosedLoop, SingleAgentSubstitution) {
  const ClosedLoopSystem sys = assemble_closed_loop(single_agent());
  // -(L + theta)/m = -1 with L = 0; the filter row carries -kappa/tau = -2.
  Eigen::Matrix3d expected;
  expected << 0, 1, 0, -1, -1, 1, 0, -2, -1;
  EXPECT_TRUE(sys.A().isApprox(expected));
}

TEST(ClosedLoop, TwoAgentStiffnessBlock) {
  const ClosedLoopSystem sys = assemble_closed_loop(unit_path(2, 2));
  Eigen::Matrix2d expected;
  expected << -2, 1, 1, -2;
  EXPECT_TRUE(sys.A().block(2, 0, 2, 2).isApprox(expected));
  EXPECT_EQ(sys.input_column(Agent(1)), (Eigen::VectorXd(6) << 0, 0, 1, 0, 0, 0).finished());
  EXPECT_EQ(sys.output_row(Agent(2)), (Eigen::RowVectorXd(6) << 0, 1, 0, 0, 0, 0).finished());
}

TEST(ClosedLoop, FourteenBusIsHurwitz) {
  const NetworkModel m = import_power_case(std::filesystem::path(DETPLACE_DATA_DIR) / "ieee14.case");
  const ClosedLoopSystem sys = assemble_closed_loop(m);
  EXPECT_EQ(sys.state_dim(), 42);
  EXPECT_LT(max_real_eig(sys.A()), 0.0);
}

TEST(Certificate, SingleAgentMidpoint) {
  const NetworkModel m = single_agent();
  const ClosedLoopSystem sys = assemble_closed_loop(m);
  const StabilityCertificate cert = certify_stability(sys, m);
  // bound = min(h/m, 4 theta / (kappa phi)) = min(1, 2)
  EXPECT_DOUBLE_EQ(cert.sigma, 0.5);
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(cert.P_bar).eigenvalues().minCoeff(), 0);
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(cert.Q_bar).eigenvalues().minCoeff(), 0);
  EXPECT_TRUE((sys.A().transpose() * cert.P_bar + cert.P_bar * sys.A() + cert.Q_bar).isZero(1e-12));
}

TEST(Certificate, SigmaOutsideIntervalRejected) {
  const NetworkModel m = single_agent();
  const ClosedLoopSystem sys = assemble_closed_loop(m);
  for (double s : {0.0, -0.1, 1.0, 3.0}) {
    try {
      certify_stability(sys, m, s);
      ADD_FAILURE() << "sigma " << s << " accepted";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kInvalidSigma);
    }
  }
}

TEST(Certificate, RandomModelsAgreeWithEigenvalues) {
  std::mt19937_64 rng(17);
  testing::RandomModelOptions opt;
  opt.max_agents = 10;
  for (int trial = 0; trial < 100; ++trial) {
    const NetworkModel m = testing::random_model(rng, opt);
    const ClosedLoopSystem sys = assemble_closed_loop(m);
    const StabilityCertificate cert = certify_stability(sys, m);
    const Eigen::VectorXd p = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(cert.P_bar).eigenvalues();
    const Eigen::VectorXd q = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(cert.Q_bar).eigenvalues();
    EXPECT_GT(p.minCoeff(), 0.0);
    EXPECT_GT(q.minCoeff(), 0.0);
    EXPECT_NEAR(cert.min_eig_P, p.minCoeff(), 1e-9 * p.cwiseAbs().maxCoeff());
    EXPECT_NEAR(cert.min_eig_Q, q.minCoeff(), 1e-9 * q.cwiseAbs().maxCoeff());
    EXPECT_LT(max_real_eig(sys.A()), 0.0);
  }
}

TEST(Observer, GainIsStabilizingAndDeterministic) {
  const NetworkModel m = unit_path(3, 3);
  const ClosedLoopSystem sys = assemble_closed_loop(m);
  const Eigen::VectorXd K1 = design_observer(sys, Agent(2));
  const Eigen::VectorXd K2 = design_observer(sys, Agent(2));
  EXPECT_EQ(K1, K2);
  EXPECT_LT(max_real_eig(sys.A() - K1 * sys.output_row(Agent(2))), 0.0);
}

TEST(Observer, RandomModelsAllDetectors) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const NetworkModel m = testing::random_model(rng);
    const ClosedLoopSystem sys = assemble_closed_loop(m);
    for (int d = 1; d <= m.agent_count(); ++d) {
      const Eigen::VectorXd K = design_observer(sys, Agent(d));
      EXPECT_LT(max_real_eig(sys.A() - K * sys.output_row(Agent(d))), 0.0);
    }
  }
}

TEST(Augmented, ZeroGainKeepsHurwitz) {
  const NetworkModel m = unit_path(3, 3);
  const ClosedLoopSystem sys = assemble_closed_loop(m);
  const AugmentedPlant p = build_augmented(sys, Agent(1), Agent(2), Eigen::VectorXd::Zero(9));
  EXPECT_EQ(p.observer_error_block(), sys.A());
  EXPECT_LT(max_real_eig(p.A_d), 0.0);
}

TEST(Augmented, InputLayout) {
  const NetworkModel m = unit_path(2, 2);
  const ClosedLoopSystem sys = assemble_closed_loop(m);
  const AugmentedPlant p = build_augmented(sys, Agent(1), Agent(1));
  const int n = 2;
  Eigen::VectorXd expected = Eigen::VectorXd::Zero(12);
  expected[n + 0] = 1;          // plant velocity of agent 1
  expected[3 * n + n + 0] = 1;  // observer-error velocity of agent 1
  EXPECT_EQ(p.E_bar, expected);
  EXPECT_EQ(p.C_rho.head(6), sys.output_row(Agent(2)));
  EXPECT_TRUE(p.C_rho.tail(6).isZero());
  EXPECT_TRUE(p.C_det.head(6).isZero());
  EXPECT_EQ(p.C_det.tail(6), sys.output_row(Agent(1)));
}

TEST(Augmented, ProtectedAgentForbidden) {
  const ClosedLoopSystem sys = assemble_closed_loop(unit_path(3, 3));
  for (auto [a, d] : {std::pair{3, 1}, std::pair{1, 3}}) {
    try {
      build_augmented(sys, Agent(a), Agent(d));
      ADD_FAILURE();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kForbiddenAgent);
    }
  }
}

TEST(Augmented, PerformanceTransferIgnoresObserver) {
  std::mt19937_64 rng(31);
  testing::RandomModelOptions opt;
  opt.min_agents = 3;
  const NetworkModel m = testing::random_model(rng, opt);
  const ClosedLoopSystem sys = assemble_closed_loop(m);
  const auto others = m.agents_except_rho();
  const AugmentedPlant p = build_augmented(sys, others.front(), others.back());
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int k = 0; k < 20; ++k) {
    const std::complex<double> s(std::abs(u(rng)), u(rng));
    const auto augmented = testing::dense_transfer(p.A_d, p.E_bar, p.C_rho, s);
    const auto plain = testing::dense_transfer(sys.A(), sys.input_column(others.front()),
                                               sys.output_row(m.rho()), s);
    EXPECT_LT(std::abs(augmented - plain), 1e-10 * std::max(1.0, std::abs(plain)));
  }
}

TEST(Augmented, SpectrumIsUnionOfBlocks) {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 10; ++trial) {
    const NetworkModel m = testing::random_model(rng);
    const ClosedLoopSystem sys = assemble_closed_loop(m);
    const auto others = m.agents_except_rho();
    if (others.empty()) continue;
    const AugmentedPlant p = build_augmented(sys, others.front(), others.front());
    std::vector<std::complex<double>> joint, split;
    for (auto z : Eigen::VectorXcd(p.A_d.eigenvalues())) joint.push_back(z);
    for (auto z : Eigen::VectorXcd(p.plant_block().eigenvalues())) split.push_back(z);
    for (auto z : Eigen::VectorXcd(p.observer_error_block().eigenvalues())) split.push_back(z);
    ASSERT_EQ(joint.size(), split.size());
    for (auto z : joint) {
      double nearest = std::numeric_limits<double>::infinity();
      for (auto w : split) nearest = std::min(nearest, std::abs(z - w));
      EXPECT_LT(nearest, 1e-8 * std::max(1.0, std::abs(z)));
    }
  }
}

}  // namespace
}  // namespace detplace
