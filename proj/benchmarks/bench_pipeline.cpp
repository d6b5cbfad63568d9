#include <random>

#include <benchmark/benchmark.h>

#include "detplace/game.hpp"
#include "detplace/impact.hpp"
#include "detplace/scenario.hpp"
#include "detplace/structure.hpp"

namespace {

using namespace detplace;

// Path 1..n protected at n; the attack sits at 1 and the detector at n - 1.
NetworkModel path_model(int n) {
  NetworkConfig c;
  c.agents.assign(n, AgentParameters{1.0, 1.5, 1.2, 0.8});
  for (int i = 1; i < n; ++i) c.edges.push_back({Agent(i), Agent(i + 1), -1.0});
  c.kappa_d = 1.0;
  c.tau = 0.5;
  c.rho = Agent(n);
  c.delta_sq = 1.0;
  return build_network(c);
}

AugmentedPlant path_plant(int n) {
  const ClosedLoopSystem sys = assemble_closed_loop(path_model(n));
  return build_augmented(sys, Agent(1), Agent(n - 1));
}

void BM_ImpactSdp(benchmark::State& state) {
  const AugmentedPlant p = path_plant(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(impact_sdp(p, 1.0).gamma_star);
}
BENCHMARK(BM_ImpactSdp)->Arg(3)->Arg(5)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_FrequencyOracle(benchmark::State& state) {
  const AugmentedPlant p = path_plant(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(impact_frequency_oracle(p, 1.0).gamma);
}
BENCHMARK(BM_FrequencyOracle)->Arg(3)->Arg(5)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_FiniteZeros(benchmark::State& state) {
  const AugmentedPlant p = path_plant(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(finite_zeros(p).zeros.size());
}
BENCHMARK(BM_FiniteZeros)->Arg(3)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_MixedEquilibrium(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  const Eigen::MatrixXd g =
      Eigen::MatrixXd::NullaryExpr(state.range(0), state.range(1), [&] { return u(rng); });
  const PayoffMatrix pm = PayoffMatrix::from_values(g);
  for (auto _ : state) benchmark::DoNotOptimize(place_detector(pm).value);
}
BENCHMARK(BM_MixedEquilibrium)->Args({2, 2})->Args({15, 6})->Args({40, 12});

void BM_Simulation(benchmark::State& state) {
  const AugmentedPlant p = path_plant(static_cast<int>(state.range(0)));
  SimulationOptions opt;
  opt.horizon = 20.0;
  opt.step = std::min(1e-3, max_step(p));
  const auto input = [](double t) { return std::sin(0.7 * t); };
  for (auto _ : state) benchmark::DoNotOptimize(simulate(p, input, 1.0, opt).final_energy_eta);
}
BENCHMARK(BM_Simulation)->Arg(3)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
