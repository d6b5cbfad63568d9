// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "detplace/dynamics.hpp"
#include "detplace/game.hpp"
#include "detplace/impact.hpp"
#include "detplace/scenario.hpp"
#include "detplace/structure.hpp"
#include "oracles.hpp"

namespace {

using namespace detplace;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  // Records a violation; keeps the first few messages.
  void violate(const std::string& what) {
    pass = false;
    if (++violations <= 5) detail << "\n    " << what;
  }
  int violations = 0;
};

double rel_diff(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string fmt(const Eigen::VectorXd& v) {
  std::string s = "[";
  for (int i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
  return s + "]";
}

NetworkModel fourteen_bus() {
  return import_power_case(std::filesystem::path(DETPLACE_DATA_DIR) / "ieee14.case");
}

// Network on the given edge list with random positive parameters.
NetworkModel graph_model(std::mt19937_64& rng, int n, const std::vector<std::pair<int, int>>& edges,
                         int rho) {
  std::uniform_real_distribution<double> param(0.5, 2.0);
  NetworkConfig c;
  for (int i = 0; i < n; ++i) c.agents.push_back({param(rng), param(rng), param(rng), param(rng)});
  for (auto [i, j] : edges) c.edges.push_back({Agent::from_index(i), Agent::from_index(j), -param(rng)});
  c.kappa_d = param(rng);
  c.tau = param(rng);
  c.delta_sq = 1.0;
  c.rho = Agent::from_index(rho);
  return build_network(c);
}

// ---------------------------------------------------------------------------

void oracle_equivalence(Outcome& out) {
  std::mt19937_64 rng(1001);
  int pairs = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const NetworkModel m = testing::random_model(rng);
    const ClosedLoopSystem sys = assemble_closed_loop(m);
    for (Agent d : m.agents_except_rho()) {
      for (Agent a : m.agents_except_rho()) {
        const AugmentedPlant p = build_augmented(sys, a, d);
        if (feasibility_report(p).verdict != Verdict::kFeasible) continue;
        ++pairs;
        const ImpactResult sdp = impact_sdp(p, m.delta_sq());
        if (!sdp.finite()) {
          out.violate("model " + std::to_string(trial) + ": SDP status " + to_string(sdp.status));
          continue;
        }
        const OracleResult o = impact_frequency_oracle(p, m.delta_sq());
        const double diff = rel_diff(sdp.gamma_star, o.gamma);
        worst = std::max(worst, diff);
        if (diff > 1e-3) {
          out.violate("model " + std::to_string(trial) + " pair (" + std::to_string(a.id()) + ", " +
                      std::to_string(d.id()) + "): sdp " + fmt(sdp.gamma_star) + " oracle " +
                      fmt(o.gamma));
        }
      }
    }
  }
  out.detail << pairs << " feasible pairs, worst relative gap " << fmt(worst);
}

// The 14-bus payoff matrix is shared with the homogeneity check.
struct CaseStudy {
  NetworkModel model = fourteen_bus();
  ClosedLoopSystem sys = assemble_closed_loop(model);
  DetectionSet detection = detection_set(sys, model);
  PayoffMatrix pm = payoff_matrix(model, sys, detection);
};

const CaseStudy& case_study() {
  static const CaseStudy cs;
  return cs;
}

void case_study_structure(Outcome& out) {
  const CaseStudy& cs = case_study();
  const std::vector<Agent> expected{Agent(6), Agent(13)};
  if (cs.detection.members != expected) out.violate("detection set differs from {6, 13}");
  if (!cs.pm.all_finite()) {
    out.violate("payoff matrix has non-finite entries");
    return;
  }
  const Eigen::VectorXd alpha = cs.pm.alpha();
  const Eigen::VectorXd beta = cs.pm.beta();
  if (check_pure_equilibrium(cs.pm)) out.violate("pure equilibrium found");
  if (alpha.minCoeff() == beta.maxCoeff()) out.violate("min alpha equals max beta");

  const GameSolution sol = place_detector(cs.pm);
  if (sol.kind != GameKind::kMixed) out.violate("equilibrium is not mixed");
  std::set<int> defense;
  std::set<int> attack;
  for (int j = 0; j < cs.pm.cols(); ++j) {
    if (sol.defense_strategy[j] > 1e-9) defense.insert(cs.pm.detectors[j].id());
  }
  for (int i = 0; i < cs.pm.rows(); ++i) {
    if (sol.attack_strategy[i] > 1e-9) attack.insert(cs.pm.attacks[i].id());
  }
  const std::set<int> support{6, 13};
  if (defense != support) out.violate("defender support differs from {6, 13}");
  if (attack != support) out.violate("attacker support differs from {6, 13}");
  if (sol.value < beta.maxCoeff() - 1e-9 || sol.value > alpha.minCoeff() + 1e-9) {
    out.violate("value " + fmt(sol.value) + " outside [max beta, min alpha]");
  }
  if (!(sol.lp_gap <= 1e-8)) out.violate("LP primal/dual gap " + fmt(sol.lp_gap));

  // Published figures depend on an observer gain and bus data that are not
  // given; report the comparison without binding on it.
  const Eigen::Vector2d ref_alpha(4.7449, 4.3917);
  const double ref_value = 3.3757;
  const bool replicated = alpha.size() == 2 && rel_diff(alpha[0], ref_alpha[0]) <= 0.05 &&
                          rel_diff(alpha[1], ref_alpha[1]) <= 0.05 &&
                          rel_diff(sol.value, ref_value) <= 0.05;
  out.detail << "D = {6, 13}, alpha " << fmt(alpha) << ", max beta " << fmt(beta.maxCoeff())
             << ", value " << fmt(sol.value) << ", defender " << fmt(sol.defense_strategy)
             << ", lp gap " << fmt(sol.lp_gap) << "\n    reference alpha " << fmt(Eigen::VectorXd(ref_alpha))
             << ", value " << fmt(ref_value) << ": "
             << (replicated ? "reproduced within 5%" : "not reproduced (observer gain dependent)");
}

void stability_certificate(Outcome& out) {
  std::mt19937_64 rng(1003);
  testing::RandomModelOptions opt;
  opt.max_agents = 10;
  double worst_abscissa = -std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 100; ++trial) {
    const NetworkModel m = testing::random_model(rng, opt);
    const ClosedLoopSystem sys = assemble_closed_loop(m);
    try {
      const StabilityCertificate cert = certify_stability(sys, m);
      const double abscissa = sys.A().eigenvalues().real().maxCoeff();
      worst_abscissa = std::max(worst_abscissa, abscissa);
      if (!(abscissa < 0.0)) out.violate("model " + std::to_string(trial) + " not Hurwitz");
      if (!(cert.min_eig_P > 0.0 && cert.min_eig_Q > 0.0)) {
        out.violate("model " + std::to_string(trial) + " certificate not positive definite");
      }
    } catch (const Error& e) {
      out.violate("model " + std::to_string(trial) + ": " + e.what());
    }
  }
  out.detail << "100 models, largest spectral abscissa " << fmt(worst_abscissa);
}

void positivity_and_real_zeros(Outcome& out) {
  std::mt19937_64 rng(1007);
  std::uniform_real_distribution<double> log_lambda(-3.0, 1.0);
  int channels = 0;
  double smallest_entry = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 200; ++trial) {
    const NetworkModel m = testing::random_model(rng);
    for (int k = 0; k < 50; ++k) {
      const double lambda = std::pow(10.0, log_lambda(rng));
      const Eigen::MatrixXd inv = q_lambda(m, lambda).real().inverse();
      smallest_entry = std::min(smallest_entry, inv.minCoeff());
      if (!(inv.minCoeff() > 0.0)) {
        out.violate("model " + std::to_string(trial) + ": Q^-1 entry " + fmt(inv.minCoeff()) +
                    " at lambda " + fmt(lambda));
      }
    }
    const ClosedLoopSystem sys = assemble_closed_loop(m);
    for (Agent d : m.agents_except_rho()) {
      for (Agent a : m.agents_except_rho()) {
        ++channels;
        const ZeroReport zr = finite_zeros(build_augmented(sys, a, d));
        for (const InvariantZero& z : zr.zeros) {
          const bool real_positive = z.value.real() > 0.0 &&
                                     std::abs(z.value.imag()) <= 1e-9 * std::max(1.0, std::abs(z.value));
          if (real_positive && z.residual < 1e-6) {
            out.violate("model " + std::to_string(trial) + ": zero at " + fmt(z.value.real()));
          }
        }
      }
    }
  }
  out.detail << "10000 samples, smallest entry " << fmt(smallest_entry) << "; " << channels
             << " detector channels without positive real zeros";
}

// Degrees by Markov parameters against breadth-first hop distances, and the
// detection rule evaluated three ways, for every choice of protected agent.
void check_graph(std::mt19937_64& rng, int n, const std::vector<std::pair<int, int>>& edges,
                 Outcome& out) {
  const Eigen::MatrixXi hops = testing::bfs_distances(n, edges);
  const NetworkModel base = graph_model(rng, n, edges, 0);
  const ClosedLoopSystem sys = assemble_closed_loop(base);
  const RelativeDegreeTable table = relative_degree_table(sys);
  if (table.r != (2 * (hops.array() + 1)).matrix()) {
    out.violate("n = " + std::to_string(n) + ": relative degrees differ from 2 (hops + 1)");
    return;
  }
  for (int rho = 0; rho < n; ++rho) {
    NetworkConfig c;
    for (const auto& p : base.agents()) c.agents.push_back(p);
    c.edges = base.edges();
    c.kappa_d = base.kappa_d();
    c.tau = base.tau();
    c.delta_sq = 1.0;
    c.rho = Agent::from_index(rho);
    const NetworkModel m = build_network(c);
    std::vector<Agent> expected;
    for (int d = 0; d < n; ++d) {
      if (d == rho) continue;
      bool ok = true;
      for (int a = 0; a < n && ok; ++a) {
        if (a != rho) ok = hops(d, a) <= hops(rho, a);
      }
      if (ok) expected.push_back(Agent::from_index(d));
    }
    if (detection_candidates_by_distance(m) != expected ||
        detection_candidates_by_markov(sys, m) != expected) {
      out.violate("n = " + std::to_string(n) + ", rho " + std::to_string(rho + 1) +
                  ": candidate sets disagree");
    }
  }
}

void distance_vs_markov(Outcome& out) {
  std::mt19937_64 rng(1009);
  long graphs = 0;
  for (int n = 2; n <= 6; ++n) {
    for (const auto& edges : testing::connected_graphs(n)) {
      check_graph(rng, n, edges, out);
      ++graphs;
    }
  }
  long sampled = 0;
  for (int n : {7, 8}) {
    std::uniform_real_distribution<double> density(0.2, 0.7);
    for (int k = 0; k < 500;) {
      const auto edges = testing::random_graph(rng, n, density(rng));
      if (!testing::bfs_connected(n, edges)) continue;
      check_graph(rng, n, edges, out);
      ++k;
      ++sampled;
    }
  }
  out.detail << graphs << " connected graphs with N <= 6, " << sampled << " random with N in {7, 8}";
}

void game_solver(Outcome& out) {
  std::mt19937_64 rng(1013);
  std::uniform_real_distribution<double> entry(0.0, 10.0);
  std::uniform_int_distribution<int> rows(1, 15);
  std::uniform_int_distribution<int> cols(1, 6);
  int two_column = 0;
  double worst_grid = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const int c = trial % 2 == 0 ? 2 : cols(rng);
    const Eigen::MatrixXd g = Eigen::MatrixXd::NullaryExpr(rows(rng), c, [&] { return entry(rng); });
    const PayoffMatrix pm = PayoffMatrix::from_values(g);
    const GameSolution sol = place_detector(pm);
    if (sol.value < pm.beta().maxCoeff() - 1e-12 || sol.value > pm.alpha().minCoeff() + 1e-12) {
      out.violate("weak duality broken on matrix " + std::to_string(trial));
    }
    // The strategies certify the value: each side's best response meets it.
    const double row_best = (g * sol.defense_strategy).maxCoeff();
    const double col_best = (g.transpose() * sol.attack_strategy).minCoeff();
    if (std::abs(row_best - sol.value) > 1e-8 || std::abs(col_best - sol.value) > 1e-8) {
      out.violate("strategies do not certify the value on matrix " + std::to_string(trial));
    }
    if (c == 2) {
      ++two_column;
      const double grid = testing::grid_game_value_two_columns(g, 1e-4);
      worst_grid = std::max(worst_grid, std::abs(grid - sol.value));
      if (std::abs(grid - sol.value) > 1e-3) {
        out.violate("grid value " + fmt(grid) + " vs " + fmt(sol.value));
      }
    }
  }

  Eigen::MatrixXd g(2, 2);
  g << 4, 1, 2, 3;
  const GameSolution sol = place_detector(PayoffMatrix::from_values(g));
  if (sol.kind != GameKind::kMixed || std::abs(sol.value - 2.5) > 1e-9 ||
      std::abs(sol.defense_strategy[0] - 0.5) > 1e-9 || std::abs(sol.defense_strategy[1] - 0.5) > 1e-9) {
    out.violate("[[4,1],[2,3]] gave value " + fmt(sol.value) + ", q " + fmt(sol.defense_strategy));
  }
  out.detail << "500 matrices (" << two_column << " two-column, worst grid gap " << fmt(worst_grid)
             << "); 2x2 example value " << fmt(sol.value) << ", q " << fmt(sol.defense_strategy);
}

void simulation_consistency(Outcome& out) {
  std::mt19937_64 rng(1019);
  std::uniform_real_distribution<double> freq(0.02, 10.0);
  std::uniform_real_distribution<double> phase(0.0, 6.283185307179586);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int plants = 0;
  int probes = 0;
  int crossed = 0;
  double worst_worst_case = 0.0;
  double worst_excess = -std::numeric_limits<double>::infinity();
  for (int trial = 0; plants < 8 && trial < 200; ++trial) {
    const NetworkModel m = testing::random_model(rng);
    const ClosedLoopSystem sys = assemble_closed_loop(m);
    const auto others = m.agents_except_rho();
    std::uniform_int_distribution<std::size_t> pick(0, others.size() - 1);
    const AugmentedPlant p = build_augmented(sys, others[pick(rng)], others[pick(rng)]);
    if (feasibility_report(p).verdict != Verdict::kFeasible) continue;
    const ImpactResult r = evaluate_impact(p, m.delta_sq());
    if (!r.finite() || !std::isfinite(r.worst_frequency)) continue;
    ++plants;
    const double bound = r.gamma_star / m.delta_sq();
    SimulationOptions opt;
    opt.horizon = 200.0;
    opt.step = std::min(1e-3, max_step(p));
    opt.record_stride = 1000;

    const AttackSignal worst = synthesize_stealthy_attack(p, r, m.delta_sq(), 0.99);
    const SimulationRun run = simulate(p, worst, m.delta_sq(), opt);
    const double gap = std::abs(run.energy_ratio() - bound) / bound;
    worst_worst_case = std::max(worst_worst_case, gap);
    if (gap > 0.10) {
      out.violate("plant " + std::to_string(plants) + ": ratio " + fmt(run.energy_ratio()) +
                  " vs bound " + fmt(bound));
    }
    // At 1% headroom the start-up transient can push the finite-horizon
    // residual energy just past the threshold; counted, not binding.
    if (run.detected) ++crossed;

    // Random sums of sinusoids, switched off at a random time.
    for (int k = 0; k < 6; ++k, ++probes) {
      const double w1 = freq(rng), w2 = freq(rng), p1 = phase(rng), p2 = phase(rng);
      const double mix = unit(rng);
      const double stop = 20.0 + 180.0 * unit(rng);
      const auto input = [=](double t) {
        return t < stop ? mix * std::sin(w1 * t + p1) + (1.0 - mix) * std::sin(w2 * t + p2) : 0.0;
      };
      const SimulationRun probe = simulate(p, input, m.delta_sq(), opt);
      const double excess = probe.energy_ratio() / bound - 1.0;
      worst_excess = std::max(worst_excess, excess);
      if (excess > 0.02) {
        out.violate("plant " + std::to_string(plants) + ": probe ratio " + fmt(probe.energy_ratio()) +
                    " exceeds bound " + fmt(bound));
      }
    }
  }
  if (plants < 8) out.violate("only " + std::to_string(plants) + " plants with a finite worst frequency");
  out.detail << plants << " plants, worst-case gap " << fmt(worst_worst_case) << ", " << probes
             << " probes, largest ratio/bound - 1 " << fmt(worst_excess) << "; "
             << crossed << " worst-case runs ended above the threshold by transient";
}

void check_scaling(const NetworkModel& m, const ClosedLoopSystem& sys, const DetectionSet& ds,
                   const PayoffMatrix& base, const std::string& label, Outcome& out,
                   double& worst_gamma, double& worst_strategy) {
  const NetworkModel scaled_model = m.with_delta_sq(4.0 * m.delta_sq());
  const PayoffMatrix scaled = payoff_matrix(scaled_model, sys, ds);
  for (int i = 0; i < base.rows(); ++i) {
    for (int j = 0; j < base.cols(); ++j) {
      const double g0 = base.gamma(i, j);
      const double g1 = scaled.gamma(i, j);
      if (!std::isfinite(g0) || !std::isfinite(g1)) {
        if (std::isfinite(g0) != std::isfinite(g1)) out.violate(label + ": finiteness changed");
        continue;
      }
      const double d = rel_diff(g1, 4.0 * g0);
      worst_gamma = std::max(worst_gamma, d);
      if (d > 1e-6) out.violate(label + ": gamma " + fmt(g0) + " scaled to " + fmt(g1));
    }
  }
  if (!base.all_finite() || !scaled.all_finite()) return;
  const GameSolution s0 = place_detector(base);
  const GameSolution s1 = place_detector(scaled);
  const double dp = (s0.attack_strategy - s1.attack_strategy).cwiseAbs().maxCoeff();
  const double dq = (s0.defense_strategy - s1.defense_strategy).cwiseAbs().maxCoeff();
  worst_strategy = std::max({worst_strategy, dp, dq});
  if (dp > 1e-6 || dq > 1e-6) out.violate(label + ": strategies moved by " + fmt(std::max(dp, dq)));
  if (rel_diff(s1.value, 4.0 * s0.value) > 1e-6) out.violate(label + ": value not scaled");
}

void homogeneity(Outcome& out) {
  double worst_gamma = 0.0;
  double worst_strategy = 0.0;
  std::mt19937_64 rng(1021);
  testing::RandomModelOptions opt;
  opt.min_agents = 3;
  opt.max_agents = 5;
  int models = 0;
  for (int trial = 0; models < 4 && trial < 100; ++trial) {
    const NetworkModel m = testing::random_model(rng, opt);
    const ClosedLoopSystem sys = assemble_closed_loop(m);
    if (detection_candidates_by_distance(m).empty()) continue;
    const DetectionSet ds = detection_set(sys, m);
    ++models;
    const PayoffMatrix base = payoff_matrix(m, sys, ds);
    check_scaling(m, sys, ds, base, "random model " + std::to_string(models), out, worst_gamma,
                  worst_strategy);
  }
  const CaseStudy& cs = case_study();
  check_scaling(cs.model, cs.sys, cs.detection, cs.pm, "14-bus", out, worst_gamma, worst_strategy);
  out.detail << models << " random models and the 14-bus case; worst gamma deviation "
             << fmt(worst_gamma) << ", worst strategy shift " << fmt(worst_strategy);
}

}  // namespace

// Optional arguments select criteria by number.
int main(int argc, char** argv) {
  struct Criterion {
    const char* name;
    std::function<void(Outcome&)> run;
  };
  const std::vector<Criterion> criteria{
      {"oracle equivalence", oracle_equivalence},
      {"case-study structure", case_study_structure},
      {"stability certificate", stability_certificate},
      {"Q inverse positivity and real zeros", positivity_and_real_zeros},
      {"distance rule vs Markov degrees", distance_vs_markov},
      {"game solver", game_solver},
      {"simulation consistency", simulation_consistency},
      {"threshold homogeneity", homogeneity},
  };
  std::set<std::size_t> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::stoul(argv[i]));
  int failed = 0;
  int ran = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    if (!selected.empty() && !selected.count(k + 1)) continue;
    ++ran;
    Outcome out;
    const auto start = std::chrono::steady_clock::now();
    try {
      criteria[k].run(out);
    } catch (const std::exception& e) {
      out.violate(std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!out.pass) ++failed;
    std::cout << (out.pass ? "PASS" : "FAIL") << " [" << k + 1 << "] " << criteria[k].name << " ("
              << fmt(secs) << " s): " << out.detail.str() << std::endl;
  }
  std::cout << ran - failed << "/" << ran << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
