#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include "detplace/dynamics.hpp"
#include "detplace/game.hpp"
#include "detplace/impact.hpp"
#include "detplace/report.hpp"
#include "detplace/scenario.hpp"
#include "detplace/structure.hpp"

namespace detplace::cli {
namespace {

// Input problems are the caller's to fix; everything later is a computation
// failure.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::ofstream open_output(const RunConfig& config, const std::string& name) {
  std::filesystem::create_directories(config.out_dir);
  const std::filesystem::path path = config.out_dir / name;
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  return os;
}

template <typename Writer>
void write_file(const RunConfig& config, const std::string& name, Writer&& writer) {
  std::ofstream os = open_output(config, name);
  writer(os);
  if (!os) throw Error(ErrorCode::kIo, "write failed for " + name);
}

NetworkModel load_or_usage(const RunConfig& config) {
  try {
    return load_model(config);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

Agent checked_agent(const NetworkModel& model, std::optional<int> id, const char* flag) {
  if (!id) throw UsageError(std::string(flag) + " is required");
  const Agent a(*id);
  if (!model.contains(a)) throw UsageError(std::string(flag) + ": no agent " + std::to_string(*id));
  if (a == model.rho()) {
    throw UsageError(std::string(flag) + ": agent " + std::to_string(*id) +
                     " is the performance agent");
  }
  return a;
}

template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace

NetworkModel load_model(const RunConfig& config) {
  if (config.case_path.has_value() == config.config_path.has_value()) {
    throw Error(ErrorCode::kInvalidArgument, "give exactly one of --case and --config");
  }
  const std::filesystem::path& path = config.case_path ? *config.case_path : *config.config_path;
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  NetworkConfig parsed = config.case_path ? parse_power_case(in) : parse_network_config(in);
  parsed = apply_overrides(std::move(parsed), config.overrides);
  if (!parsed.rho) {
    throw Error(ErrorCode::kMissingParameter, "no performance agent: set rho in the file or --rho");
  }
  if (!parsed.delta_sq) {
    throw Error(ErrorCode::kMissingParameter,
                "no detection threshold: set delta_sq in the file or --delta-sq");
  }
  return build_network(parsed);
}

int cmd_analyze(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const NetworkModel model = load_or_usage(config);
    const ClosedLoopSystem sys = assemble_closed_loop(model);
    const StabilityCertificate cert = certify_stability(sys, model);
    out << "stability certificate: sigma " << format_number(cert.sigma) << ", spectral abscissa "
        << format_number(cert.spectral_abscissa) << '\n';

    const DetectionSet detection = detection_set(sys, model);
    write_file(config, "detection_set.csv",
               [&](std::ostream& os) { write_detection_set_csv(os, model, detection); });
    for (const auto& [agent, reason] : detection.unverified) {
      err << "warning: detector " << agent << ": " << reason << '\n';
    }

    const PayoffMatrix pm = payoff_matrix(model, sys, detection, {}, config.threads);
    write_file(config, "payoff.csv", [&](std::ostream& os) { write_payoff_csv(os, pm); });
    write_file(config, "payoff.json",
               [&](std::ostream& os) { write_payoff_report(os, pm, model.delta_sq()); });

    int disagreements = 0;
    for (const ImpactResult& r : pm.entries) {
      if (!r.finite()) {
        err << "entry (" << r.attack << ", " << r.detector << "): " << to_string(r.status)
            << (r.message.empty() ? "" : " (" + r.message + ")") << '\n';
      } else if (!r.agreement) {
        ++disagreements;
      }
    }
    if (!pm.all_finite()) {
      err << "payoff matrix has non-finite entries; no equilibrium computed\n";
      return static_cast<int>(kExitFailure);
    }
    if (disagreements > 0) {
      err << "warning: " << disagreements
          << " entries differ from the frequency-domain check by more than 1e-3\n";
    }

    const GameSolution sol = place_detector(pm);
    write_file(config, "game.json", [&](std::ostream& os) { write_game_report(os, pm, sol); });
    const std::string summary = placement_summary(model, detection, pm, sol);
    write_file(config, "summary.txt", [&](std::ostream& os) { os << summary; });
    out << summary;
    return static_cast<int>(kExitOk);
  });
}

int cmd_simulate(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const NetworkModel model = load_or_usage(config);
    const Agent attack = checked_agent(model, config.attack, "--attack");
    const Agent detector = checked_agent(model, config.detector, "--detector");
    if (!(config.margin >= 0.0)) throw UsageError("--margin must be nonnegative");
    if (!(config.horizon > 0.0)) throw UsageError("--horizon must be positive");
    if (config.step && !(*config.step > 0.0)) throw UsageError("--step must be positive");

    const ClosedLoopSystem sys = assemble_closed_loop(model);
    certify_stability(sys, model);
    const AugmentedPlant plant = build_augmented(sys, attack, detector);
    const ImpactResult impact = evaluate_impact(plant, model.delta_sq());
    out << "pair (" << attack << ", " << detector << "): " << to_string(impact.status);
    if (!impact.finite()) {
      out << (impact.message.empty() ? "" : " (" + impact.message + ")")
          << "; refusing to simulate\n";
      return static_cast<int>(kExitFailure);
    }
    out << ", impact " << format_number(impact.gamma_star) << ", frequency check "
        << format_number(impact.oracle_gamma) << ", worst frequency "
        << format_number(impact.worst_frequency) << '\n';

    const AttackSignal signal =
        synthesize_stealthy_attack(plant, impact, model.delta_sq(), config.margin);
    SimulationOptions options;
    options.horizon = config.horizon;
    options.step = config.step.value_or(std::min(1e-3, max_step(plant)));
    const SimulationRun run = simulate(plant, signal, model.delta_sq(), options);
    write_file(config, "trajectory.csv", [&](std::ostream& os) { write_trajectory_csv(os, run); });

    out << "attack: amplitude " << format_number(signal.amplitude) << ", frequency "
        << format_number(signal.frequency) << '\n';
    out << "energy at t = " << format_number(run.horizon) << ": performance "
        << format_number(run.final_energy_y) << ", residual " << format_number(run.final_energy_eta)
        << " (threshold " << format_number(model.delta_sq()) << ")\n";
    out << (run.detected ? "alarm: residual energy crossed the threshold\n"
                         : "stealthy: residual energy stayed below the threshold\n");
    return static_cast<int>(kExitOk);
  });
}

int cmd_structure(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const NetworkModel model = load_or_usage(config);
    const ClosedLoopSystem sys = assemble_closed_loop(model);
    const RelativeDegreeTable table = relative_degree_table(sys);
    write_file(config, "relative_degree.csv",
               [&](std::ostream& os) { write_relative_degree_csv(os, table); });
    const DetectionSet detection = detection_set(sys, model);
    write_file(config, "detection_set.csv",
               [&](std::ostream& os) { write_detection_set_csv(os, model, detection); });
    out << "detection set: {";
    for (std::size_t k = 0; k < detection.members.size(); ++k) {
      out << (k ? ", " : "") << detection.members[k];
    }
    out << "}\n";
    for (const auto& [agent, reason] : detection.rejected) {
      out << "  rejected " << agent << ": " << reason << '\n';
    }
    for (const auto& [agent, reason] : detection.unverified) {
      out << "  unverified " << agent << ": " << reason << '\n';
    }
    return static_cast<int>(kExitOk);
  });
}

int cmd_dump(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const NetworkModel model = load_or_usage(config);
    const ClosedLoopSystem sys = assemble_closed_loop(model);
    const int n = model.agent_count();
    Eigen::MatrixXd inputs(sys.state_dim(), n);
    Eigen::MatrixXd outputs(n, sys.state_dim());
    for (int k = 0; k < n; ++k) {
      inputs.col(k) = sys.input_column(Agent::from_index(k));
      outputs.row(k) = sys.output_row(Agent::from_index(k));
    }
    const auto dump = [&](const std::string& name, const Eigen::MatrixXd& m) {
      write_file(config, name, [&](std::ostream& os) { write_matrix_csv(os, m); });
      out << "wrote " << (config.out_dir / name).string() << '\n';
    };
    dump("A.csv", sys.A());
    dump("E.csv", inputs);
    dump("C.csv", outputs);

    if (config.attack.has_value() != config.detector.has_value()) {
      throw UsageError("--attack and --detector go together");
    }
    if (config.attack) {
      const Agent attack = checked_agent(model, config.attack, "--attack");
      const Agent detector = checked_agent(model, config.detector, "--detector");
      const AugmentedPlant plant = build_augmented(sys, attack, detector);
      dump("A_d.csv", plant.A_d);
      dump("K_d.csv", plant.K_d);
      dump("E_bar.csv", plant.E_bar);
      dump("C_rho_bar.csv", plant.C_rho);
      dump("C_d_bar.csv", plant.C_det);
    }
    return static_cast<int>(kExitOk);
  });
}

}  // namespace detplace::cli
