#include <iostream>

#include "CLI11.hpp"
#include "cli.hpp"

namespace {

using detplace::cli::RunConfig;

void add_model_options(CLI::App& cmd, RunConfig& config, std::string& case_path,
                       std::string& config_path, int& rho) {
  auto* case_opt = cmd.add_option("--case", case_path, "Power case file ([buses]/[branches])")
                       ->check(CLI::ExistingFile);
  auto* config_opt =
      cmd.add_option("--config", config_path, "Network config file ([agents]/[edges])")
          ->check(CLI::ExistingFile);
  case_opt->excludes(config_opt);
  cmd.add_option("--rho", rho, "Performance agent")->check(CLI::PositiveNumber);
  cmd.add_option("--delta-sq", config.overrides.delta_sq, "Detection threshold")
      ->check(CLI::PositiveNumber);
  cmd.add_option("--theta", config.overrides.theta, "Proportional gain for every agent")
      ->check(CLI::PositiveNumber);
  cmd.add_option("--phi", config.overrides.phi, "Virtual-input gain for every agent")
      ->check(CLI::PositiveNumber);
  cmd.add_option("--kappa-d", config.overrides.kappa_d, "Filter gain")
      ->check(CLI::PositiveNumber);
  cmd.add_option("--tau", config.overrides.tau, "Filter time constant")
      ->check(CLI::PositiveNumber);
  cmd.add_option("--out", config.out_dir, "Output directory")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Detector placement against stealthy attacks on networked agents"};
  app.require_subcommand(1);

  RunConfig config;
  std::string case_path;
  std::string config_path;
  int rho = 0;

  auto* analyze = app.add_subcommand("analyze", "Detection set, payoff matrix and placement");
  add_model_options(*analyze, config, case_path, config_path, rho);
  analyze->add_option("--threads", config.threads, "Worker threads (0: all cores)");

  auto* simulate = app.add_subcommand("simulate", "Simulate the worst stealthy attack on a pair");
  add_model_options(*simulate, config, case_path, config_path, rho);
  simulate->add_option("--attack", config.attack, "Attacked agent")->required();
  simulate->add_option("--detector", config.detector, "Detector agent")->required();
  simulate->add_option("--margin", config.margin, "Residual energy as a fraction of the threshold")
      ->capture_default_str();
  simulate->add_option("--horizon", config.horizon, "Simulated time")->capture_default_str();
  simulate->add_option("--step", config.step, "Integration step");

  auto* structure = app.add_subcommand("structure", "Relative degrees and detection set");
  add_model_options(*structure, config, case_path, config_path, rho);

  auto* dump = app.add_subcommand("dump", "Write system matrices as CSV");
  add_model_options(*dump, config, case_path, config_path, rho);
  dump->add_option("--attack", config.attack, "Attacked agent for the augmented plant");
  dump->add_option("--detector", config.detector, "Detector agent for the augmented plant");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return detplace::cli::kExitUsage;
  }

  if (!case_path.empty()) config.case_path = case_path;
  if (!config_path.empty()) config.config_path = config_path;
  if (!config.case_path && !config.config_path) {
    std::cerr << "usage error: one of --case or --config is required\n";
    return detplace::cli::kExitUsage;
  }
  if (rho > 0) config.overrides.rho = detplace::Agent(rho);

  if (analyze->parsed()) return detplace::cli::cmd_analyze(config, std::cout, std::cerr);
  if (simulate->parsed()) return detplace::cli::cmd_simulate(config, std::cout, std::cerr);
  if (dump->parsed()) return detplace::cli::cmd_dump(config, std::cout, std::cerr);
  return detplace::cli::cmd_structure(config, std::cout, std::cerr);
}
