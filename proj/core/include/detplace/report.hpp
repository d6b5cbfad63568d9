#pragma once

#include <ostream>
#include <string>

#include <Eigen/Dense>

#include "detplace/game.hpp"
#include "detplace/impact.hpp"
#include "detplace/scenario.hpp"
#include "detplace/structure.hpp"

namespace detplace {

/// Six significant digits; "inf", "-inf" and "nan" for non-finite values.
std::string format_number(double v);

/// Rows are attack agents, columns detection agents.
void write_payoff_csv(std::ostream& os, const PayoffMatrix& pm);
/// Per-entry status, both impact values, worst frequency and agreement (JSON).
void write_payoff_report(std::ostream& os, const PayoffMatrix& pm, double delta_sq);
/// Kind, value and both strategies as agent -> probability (JSON).
void write_game_report(std::ostream& os, const PayoffMatrix& pm, const GameSolution& sol);
/// r(i, a) with rows i (outputs) and columns a (inputs).
void write_relative_degree_csv(std::ostream& os, const RelativeDegreeTable& table);
/// agent,member,reason
void write_detection_set_csv(std::ostream& os, const NetworkModel& model,
                             const DetectionSet& detection);
/// t,y_rho,eta_d,E_y,E_eta,zeta
void write_trajectory_csv(std::ostream& os, const SimulationRun& run);
void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& m);

/// Plain-text summary of an analysis run.
std::string placement_summary(const NetworkModel& model, const DetectionSet& detection,
                              const PayoffMatrix& pm, const GameSolution& sol);

}  // namespace detplace
