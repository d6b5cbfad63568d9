#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "detplace/netmodel.hpp"

namespace detplace::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitUsage = 2,
};

struct RunConfig {
  /// Exactly one of the two inputs is set.
  std::optional<std::filesystem::path> case_path;
  std::optional<std::filesystem::path> config_path;
  ControlOverrides overrides;
  std::filesystem::path out_dir = ".";
  unsigned threads = 0;

  // simulate
  std::optional<int> attack;
  std::optional<int> detector;
  double margin = 0.95;
  double horizon = 200.0;
  /// Defaults to min(1e-3, 0.1 / ||A_d||_2).
  std::optional<double> step;
};

/// Builds the model described by the config. Throws Error; a missing
/// protected agent or threshold surfaces as kMissingParameter.
NetworkModel load_model(const RunConfig& config);

/// Full placement pipeline. Writes payoff.csv, payoff.json, game.json,
/// detection_set.csv and summary.txt into out_dir.
int cmd_analyze(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Worst-case stealthy attack on one (attack, detector) pair. Writes
/// trajectory.csv into out_dir.
int cmd_simulate(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Relative degrees and detection set only. Writes relative_degree.csv and
/// detection_set.csv into out_dir.
int cmd_structure(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Writes A.csv, E.csv (columns E_a) and C.csv (rows C_i); with both
/// --attack and --detector also A_d.csv, K_d.csv, E_bar.csv, C_rho_bar.csv
/// and C_d_bar.csv.
int cmd_dump(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace detplace::cli
