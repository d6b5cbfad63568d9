#include "detplace/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "json.hpp"

namespace detplace {
namespace {

using nlohmann::ordered_json;

ordered_json number(double v) {
  if (!std::isfinite(v)) return format_number(v);
  return std::stod(format_number(v));
}

ordered_json distribution(const std::vector<Agent>& agents, const Eigen::VectorXd& p) {
  ordered_json out = ordered_json::array();
  for (std::size_t i = 0; i < agents.size(); ++i) {
    out.push_back({{"agent", agents[i].id()}, {"probability", number(p[static_cast<int>(i)])}});
  }
  return out;
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void write_payoff_csv(std::ostream& os, const PayoffMatrix& pm) {
  os << "attack";
  for (Agent d : pm.detectors) os << ',' << d.id();
  os << '\n';
  for (int i = 0; i < pm.rows(); ++i) {
    os << pm.attacks[i].id();
    for (int j = 0; j < pm.cols(); ++j) os << ',' << format_number(pm.gamma(i, j));
    os << '\n';
  }
}

void write_payoff_report(std::ostream& os, const PayoffMatrix& pm, double delta_sq) {
  ordered_json doc;
  doc["delta_sq"] = number(delta_sq);
  doc["attacks"] = ordered_json::array();
  for (Agent a : pm.attacks) doc["attacks"].push_back(a.id());
  doc["detectors"] = ordered_json::array();
  for (Agent d : pm.detectors) doc["detectors"].push_back(d.id());
  ordered_json entries = ordered_json::array();
  for (const ImpactResult& e : pm.entries) {
    ordered_json j;
    j["attack"] = e.attack.id();
    j["detector"] = e.detector.id();
    j["status"] = to_string(e.status);
    j["gamma_star"] = number(e.gamma_star);
    j["oracle_gamma"] = number(e.oracle_gamma);
    j["worst_frequency"] = number(e.worst_frequency);
    j["agreement"] = e.agreement;
    if (!e.message.empty()) j["message"] = e.message;
    entries.push_back(std::move(j));
  }
  doc["entries"] = std::move(entries);
  os << doc.dump(2) << '\n';
}

void write_game_report(std::ostream& os, const PayoffMatrix& pm, const GameSolution& sol) {
  ordered_json doc;
  doc["kind"] = to_string(sol.kind);
  doc["value"] = number(sol.value);
  if (sol.pure) {
    doc["pure"] = {{"attack", sol.pure->first.id()}, {"detector", sol.pure->second.id()}};
  }
  doc["attack_strategy"] = distribution(pm.attacks, sol.attack_strategy);
  doc["defense_strategy"] = distribution(pm.detectors, sol.defense_strategy);
  const Eigen::VectorXd alpha = pm.alpha();
  const Eigen::VectorXd beta = pm.beta();
  doc["alpha"] = ordered_json::array();
  for (double v : alpha) doc["alpha"].push_back(number(v));
  doc["beta"] = ordered_json::array();
  for (double v : beta) doc["beta"].push_back(number(v));
  doc["lp_gap"] = number(sol.lp_gap);
  os << doc.dump(2) << '\n';
}

void write_relative_degree_csv(std::ostream& os, const RelativeDegreeTable& table) {
  os << "output";
  for (int a = 0; a < table.r.cols(); ++a) os << ',' << a + 1;
  os << '\n';
  for (int i = 0; i < table.r.rows(); ++i) {
    os << i + 1;
    for (int a = 0; a < table.r.cols(); ++a) os << ',' << table.r(i, a);
    os << '\n';
  }
}

void write_detection_set_csv(std::ostream& os, const NetworkModel& model,
                             const DetectionSet& detection) {
  os << "agent,member,reason\n";
  for (Agent d : model.agents_except_rho()) {
    std::string reason;
    for (const auto& [agent, why] : detection.rejected) {
      if (agent == d) reason = why;
    }
    const bool member = detection.contains(d);
    if (!member && reason.empty()) reason = "relative degree";
    os << d.id() << ',' << (member ? 1 : 0) << ',' << reason << '\n';
  }
}

void write_trajectory_csv(std::ostream& os, const SimulationRun& run) {
  os << "t,y_rho,eta_d,E_y,E_eta,zeta\n";
  for (std::size_t k = 0; k < run.t.size(); ++k) {
    os << format_number(run.t[k]) << ',' << format_number(run.y_rho[k]) << ','
       << format_number(run.eta[k]) << ',' << format_number(run.energy_y[k]) << ','
       << format_number(run.energy_eta[k]) << ',' << format_number(run.zeta[k]) << '\n';
  }
}

void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& m) {
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      if (j > 0) os << ',';
      os << format_number(m(i, j));
    }
    os << '\n';
  }
}

std::string placement_summary(const NetworkModel& model, const DetectionSet& detection,
                              const PayoffMatrix& pm, const GameSolution& sol) {
  std::ostringstream os;
  os << "agents: " << model.agent_count() << ", performance agent: " << model.rho()
     << ", delta_sq: " << format_number(model.delta_sq()) << '\n';
  os << "detection set: {";
  for (std::size_t k = 0; k < detection.members.size(); ++k) {
    os << (k ? ", " : "") << detection.members[k];
  }
  os << "}\n";
  const Eigen::VectorXd alpha = pm.alpha();
  const Eigen::VectorXd beta = pm.beta();
  os << "min alpha: " << format_number(alpha.minCoeff())
     << ", max beta: " << format_number(beta.maxCoeff()) << '\n';
  if (sol.kind == GameKind::kPure) {
    os << "placement: pure, detector at agent " << sol.pure->second << " (worst attack at agent "
       << sol.pure->first << ")\n";
  } else {
    os << "placement: mixed\n";
    os << "  detector distribution:";
    for (int j = 0; j < pm.cols(); ++j) {
      if (sol.defense_strategy[j] > 1e-9) {
        os << ' ' << pm.detectors[j] << '=' << format_number(sol.defense_strategy[j]);
      }
    }
    os << "\n  attack distribution:";
    for (int i = 0; i < pm.rows(); ++i) {
      if (sol.attack_strategy[i] > 1e-9) {
        os << ' ' << pm.attacks[i] << '=' << format_number(sol.attack_strategy[i]);
      }
    }
    os << '\n';
  }
  os << "game value: " << format_number(sol.value) << '\n';
  return os.str();
}

}  // namespace detplace
