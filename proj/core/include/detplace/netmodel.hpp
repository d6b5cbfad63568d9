#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "detplace/types.hpp"

namespace detplace {

struct AgentParameters {
  double inertia = 0.0;  // m_i
  double damping = 0.0;  // h_i
  double theta = 0.0;    // proportional gain
  double phi = 0.0;      // virtual-input gain

  bool operator==(const AgentParameters&) const = default;
};

/// Undirected edge with the signed coupling weight (ell < 0).
struct Edge {
  Agent i;
  Agent j;
  double ell = 0.0;

  bool operator==(const Edge&) const = default;
};

/// Unvalidated network description, as read from a config or case file.
struct NetworkConfig {
  std::vector<AgentParameters> agents;  // agents[k] describes Agent(k + 1)
  std::vector<Edge> edges;
  std::optional<double> kappa_d;
  std::optional<double> tau;
  std::optional<Agent> rho;
  std::optional<double> delta_sq;
};

/// Overrides applied on top of whatever a file provides.
struct ControlOverrides {
  std::optional<double> theta;
  std::optional<double> phi;
  std::optional<double> kappa_d;
  std::optional<double> tau;
  std::optional<Agent> rho;
  std::optional<double> delta_sq;
};

/// Validated, immutable network of second-order agents.
class NetworkModel {
 public:
  int agent_count() const { return static_cast<int>(params_.size()); }
  /// Edges with i < j, sorted lexicographically.
  const std::vector<Edge>& edges() const { return edges_; }
  const AgentParameters& agent(Agent a) const { return params_.at(a.index()); }
  const std::vector<AgentParameters>& agents() const { return params_; }

  Eigen::VectorXd inertia() const;
  Eigen::VectorXd damping() const;
  Eigen::VectorXd theta() const;
  Eigen::VectorXd phi() const;

  double kappa_d() const { return kappa_d_; }
  double tau() const { return tau_; }
  Agent rho() const { return rho_; }
  double delta_sq() const { return delta_sq_; }

  bool contains(Agent a) const { return a.id() >= 1 && a.id() <= agent_count(); }
  /// V \ {rho}, ascending.
  std::vector<Agent> agents_except_rho() const;
  std::vector<Agent> neighbours(Agent a) const;

  /// Copy with a different threshold; everything else unchanged.
  NetworkModel with_delta_sq(double delta_sq) const;

  bool operator==(const NetworkModel&) const = default;

 private:
  friend NetworkModel build_network(const NetworkConfig& config);

  std::vector<AgentParameters> params_;
  std::vector<Edge> edges_;
  double kappa_d_ = 0.0;
  double tau_ = 0.0;
  Agent rho_;
  double delta_sq_ = 0.0;
};

/// Validates a config and builds the model.
///
/// Throws Error with kBadIndex, kNonPositiveParameter, kAsymmetricEdge,
/// kMissingParameter or kDisconnectedGraph.
NetworkModel build_network(const NetworkConfig& config);

struct LaplacianView {
  Eigen::MatrixXd L;       // degree - adjacency, adjacency a_ij = -ell_ij
  Eigen::VectorXd degree;  // Delta_i
};

LaplacianView laplacian(const NetworkModel& model);

/// Second-smallest Laplacian eigenvalue of the weighted graph (0 for N = 1).
double algebraic_connectivity(const Eigen::MatrixXd& L);

/// True when the second-smallest eigenvalue exceeds 1e-9 * N.
bool is_connected(const Eigen::MatrixXd& L);

/// Hop distances on the unweighted topology; -1 marks unreachable pairs.
Eigen::MatrixXi hop_distances(const NetworkModel& model);

// Text formats. Both share a key/value header ("key = value") followed by
// "[section]" tables; '#' starts a comment.
//
//   network config:  [agents] id m h theta phi    [edges] i j ell
//   power case:      [buses]  id m h [theta phi]  [branches] from to susceptance

NetworkConfig parse_network_config(std::istream& in);
NetworkConfig parse_power_case(std::istream& in);

NetworkConfig apply_overrides(NetworkConfig config, const ControlOverrides& overrides);

NetworkModel load_network_config(const std::filesystem::path& path,
                                 const ControlOverrides& overrides = {});
NetworkModel import_power_case(std::istream& in, const ControlOverrides& overrides = {});
NetworkModel import_power_case(const std::filesystem::path& path,
                               const ControlOverrides& overrides = {});

std::string export_power_case(const NetworkModel& model);
std::string export_network_config(const NetworkModel& model);

}  // namespace detplace
