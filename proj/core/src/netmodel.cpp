#include "detplace/netmodel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <queue>
#include <sstream>

namespace detplace {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct ParsedTables {
  std::map<std::string, std::string> header;
  std::map<std::string, std::vector<std::vector<std::string>>> sections;
  std::map<std::string, std::vector<int>> line_numbers;
};

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

ParsedTables tokenize(std::istream& in) {
  ParsedTables out;
  std::string current;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": unterminated section");
      }
      current = lower(trim(line.substr(1, line.size() - 2)));
      out.sections[current];
      continue;
    }
    if (current.empty() || current == "parameters") {
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw Error(ErrorCode::kParse,
                    "line " + std::to_string(line_no) + ": expected 'key = value'");
      }
      out.header[lower(trim(line.substr(0, eq)))] = trim(line.substr(eq + 1));
      continue;
    }
    std::istringstream fields(line);
    std::vector<std::string> row;
    for (std::string f; fields >> f;) row.push_back(f);
    out.sections[current].push_back(std::move(row));
    out.line_numbers[current].push_back(line_no);
  }
  return out;
}

double to_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kParse, "cannot parse " + what + " '" + s + "'");
  }
}

int to_int(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kParse, "cannot parse " + what + " '" + s + "'");
  }
}

std::optional<double> header_double(const ParsedTables& t, const std::string& key) {
  if (auto it = t.header.find(key); it != t.header.end()) return to_double(it->second, key);
  return std::nullopt;
}

void read_common_header(const ParsedTables& t, NetworkConfig& config) {
  config.kappa_d = header_double(t, "kappa_d");
  config.tau = header_double(t, "tau");
  config.delta_sq = header_double(t, "delta_sq");
  if (auto it = t.header.find("rho"); it != t.header.end()) {
    config.rho = Agent(to_int(it->second, "rho"));
  }
  for (const auto& [key, value] : t.header) {
    static const char* known[] = {"kappa_d", "tau", "delta_sq", "rho", "theta", "phi"};
    if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
      throw Error(ErrorCode::kParse, "unknown parameter '" + key + "'");
    }
  }
}

const std::vector<std::vector<std::string>>& section(const ParsedTables& t,
                                                     const std::string& name) {
  static const std::vector<std::vector<std::string>> empty;
  auto it = t.sections.find(name);
  return it == t.sections.end() ? empty : it->second;
}

// Places per-agent rows (first column is the one-based id) into a dense vector.
std::vector<AgentParameters> place_agents(const std::vector<std::pair<int, AgentParameters>>& rows) {
  const int n = static_cast<int>(rows.size());
  std::vector<AgentParameters> agents(rows.size());
  std::vector<bool> seen(rows.size(), false);
  for (const auto& [id, p] : rows) {
    if (id < 1 || id > n) {
      throw Error(ErrorCode::kBadIndex,
                  "agent id " + std::to_string(id) + " outside 1.." + std::to_string(n));
    }
    if (seen[id - 1]) throw Error(ErrorCode::kBadIndex, "duplicate agent id " + std::to_string(id));
    seen[id - 1] = true;
    agents[id - 1] = p;
  }
  return agents;
}

void require_positive(double v, const std::string& what) {
  if (std::isnan(v)) throw Error(ErrorCode::kMissingParameter, what + " is not set");
  if (!(v > 0.0) || !std::isfinite(v)) {
    std::ostringstream os;
    os << what << " must be positive and finite, got " << v;
    throw Error(ErrorCode::kNonPositiveParameter, os.str());
  }
}

std::string fmt_exact(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

Eigen::VectorXd NetworkModel::inertia() const {
  Eigen::VectorXd v(agent_count());
  for (int k = 0; k < agent_count(); ++k) v[k] = params_[k].inertia;
  return v;
}

Eigen::VectorXd NetworkModel::damping() const {
  Eigen::VectorXd v(agent_count());
  for (int k = 0; k < agent_count(); ++k) v[k] = params_[k].damping;
  return v;
}

Eigen::VectorXd NetworkModel::theta() const {
  Eigen::VectorXd v(agent_count());
  for (int k = 0; k < agent_count(); ++k) v[k] = params_[k].theta;
  return v;
}

Eigen::VectorXd NetworkModel::phi() const {
  Eigen::VectorXd v(agent_count());
  for (int k = 0; k < agent_count(); ++k) v[k] = params_[k].phi;
  return v;
}

std::vector<Agent> NetworkModel::agents_except_rho() const {
  std::vector<Agent> out;
  for (int k = 1; k <= agent_count(); ++k) {
    if (k != rho_.id()) out.emplace_back(k);
  }
  return out;
}

std::vector<Agent> NetworkModel::neighbours(Agent a) const {
  std::vector<Agent> out;
  for (const Edge& e : edges_) {
    if (e.i == a) out.push_back(e.j);
    if (e.j == a) out.push_back(e.i);
  }
  std::sort(out.begin(), out.end());
  return out;
}

NetworkModel NetworkModel::with_delta_sq(double delta_sq) const {
  require_positive(delta_sq, "delta_sq");
  NetworkModel copy = *this;
  copy.delta_sq_ = delta_sq;
  return copy;
}

NetworkModel build_network(const NetworkConfig& config) {
  const int n = static_cast<int>(config.agents.size());
  if (n < 1) throw Error(ErrorCode::kBadIndex, "network has no agents");

  for (int k = 0; k < n; ++k) {
    const auto& p = config.agents[k];
    const std::string who = "agent " + std::to_string(k + 1);
    require_positive(p.inertia, who + " inertia m");
    require_positive(p.damping, who + " damping h");
    require_positive(p.theta, who + " theta");
    require_positive(p.phi, who + " phi");
  }
  require_positive(config.kappa_d.value_or(kNaN), "kappa_d");
  require_positive(config.tau.value_or(kNaN), "tau");
  require_positive(config.delta_sq.value_or(kNaN), "delta_sq");
  if (!config.rho) throw Error(ErrorCode::kMissingParameter, "performance agent rho is not set");
  if (config.rho->id() < 1 || config.rho->id() > n) {
    throw Error(ErrorCode::kBadIndex, "rho = " + std::to_string(config.rho->id()) +
                                          " outside 1.." + std::to_string(n));
  }

  std::map<std::pair<int, int>, double> weights;
  for (const Edge& e : config.edges) {
    if (e.i.id() < 1 || e.i.id() > n || e.j.id() < 1 || e.j.id() > n) {
      throw Error(ErrorCode::kBadIndex, "edge (" + std::to_string(e.i.id()) + ", " +
                                            std::to_string(e.j.id()) + ") references unknown agent");
    }
    if (e.i == e.j) {
      throw Error(ErrorCode::kBadIndex, "self-loop at agent " + std::to_string(e.i.id()));
    }
    if (!(e.ell < 0.0) || !std::isfinite(e.ell)) {
      std::ostringstream os;
      os << "edge (" << e.i << ", " << e.j << ") weight must be negative, got " << e.ell;
      throw Error(ErrorCode::kNonPositiveParameter, os.str());
    }
    const std::pair<int, int> key{std::min(e.i.id(), e.j.id()), std::max(e.i.id(), e.j.id())};
    auto [it, inserted] = weights.emplace(key, e.ell);
    if (!inserted && it->second != e.ell) {
      std::ostringstream os;
      os << "edge (" << key.first << ", " << key.second << ") listed with weights " << it->second
         << " and " << e.ell;
      throw Error(ErrorCode::kAsymmetricEdge, os.str());
    }
  }

  NetworkModel model;
  model.params_ = config.agents;
  for (const auto& [key, ell] : weights) {
    model.edges_.push_back(Edge{Agent(key.first), Agent(key.second), ell});
  }
  model.kappa_d_ = *config.kappa_d;
  model.tau_ = *config.tau;
  model.rho_ = *config.rho;
  model.delta_sq_ = *config.delta_sq;

  const LaplacianView lap = laplacian(model);
  if (!is_connected(lap.L)) {
    std::ostringstream os;
    os << "graph is not connected (second-smallest Laplacian eigenvalue "
       << algebraic_connectivity(lap.L) << ")";
    throw Error(ErrorCode::kDisconnectedGraph, os.str());
  }
  return model;
}

LaplacianView laplacian(const NetworkModel& model) {
  const int n = model.agent_count();
  LaplacianView view{Eigen::MatrixXd::Zero(n, n), Eigen::VectorXd::Zero(n)};
  for (const Edge& e : model.edges()) {
    const double a = -e.ell;
    const int i = e.i.index();
    const int j = e.j.index();
    view.L(i, j) -= a;
    view.L(j, i) -= a;
    view.degree[i] += a;
    view.degree[j] += a;
  }
  view.L.diagonal() += view.degree;
  return view;
}

double algebraic_connectivity(const Eigen::MatrixXd& L) {
  if (L.rows() < 2) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(L, Eigen::EigenvaluesOnly);
  return eig.eigenvalues()[1];
}

bool is_connected(const Eigen::MatrixXd& L) {
  if (L.rows() < 2) return true;
  return algebraic_connectivity(L) > 1e-9 * static_cast<double>(L.rows());
}

Eigen::MatrixXi hop_distances(const NetworkModel& model) {
  const int n = model.agent_count();
  std::vector<std::vector<int>> adj(n);
  for (const Edge& e : model.edges()) {
    adj[e.i.index()].push_back(e.j.index());
    adj[e.j.index()].push_back(e.i.index());
  }
  Eigen::MatrixXi dist = Eigen::MatrixXi::Constant(n, n, -1);
  for (int s = 0; s < n; ++s) {
    std::queue<int> q;
    dist(s, s) = 0;
    q.push(s);
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int v : adj[u]) {
        if (dist(s, v) < 0) {
          dist(s, v) = dist(s, u) + 1;
          q.push(v);
        }
      }
    }
  }
  return dist;
}

NetworkConfig parse_network_config(std::istream& in) {
  const ParsedTables t = tokenize(in);
  NetworkConfig config;
  read_common_header(t, config);
  const double theta = header_double(t, "theta").value_or(kNaN);
  const double phi = header_double(t, "phi").value_or(kNaN);

  std::vector<std::pair<int, AgentParameters>> rows;
  for (const auto& row : section(t, "agents")) {
    if (row.size() < 3 || row.size() == 4) {
      throw Error(ErrorCode::kMissingColumn, "agents row needs 'id m h theta phi'");
    }
    AgentParameters p{to_double(row[1], "m"), to_double(row[2], "h"), theta, phi};
    if (row.size() >= 5) {
      p.theta = to_double(row[3], "theta");
      p.phi = to_double(row[4], "phi");
    }
    rows.emplace_back(to_int(row[0], "agent id"), p);
  }
  if (rows.empty()) throw Error(ErrorCode::kMissingColumn, "missing [agents] table");
  config.agents = place_agents(rows);

  for (const auto& row : section(t, "edges")) {
    if (row.size() < 3) throw Error(ErrorCode::kMissingColumn, "edges row needs 'i j ell'");
    config.edges.push_back(Edge{Agent(to_int(row[0], "edge endpoint")),
                                Agent(to_int(row[1], "edge endpoint")), to_double(row[2], "ell")});
  }
  return config;
}

NetworkConfig parse_power_case(std::istream& in) {
  const ParsedTables t = tokenize(in);
  NetworkConfig config;
  read_common_header(t, config);
  const double theta = header_double(t, "theta").value_or(kNaN);
  const double phi = header_double(t, "phi").value_or(kNaN);

  std::vector<std::pair<int, AgentParameters>> rows;
  for (const auto& row : section(t, "buses")) {
    if (row.size() < 3 || row.size() == 4) {
      throw Error(ErrorCode::kMissingColumn, "buses row needs 'id m h' (optionally 'theta phi')");
    }
    AgentParameters p{to_double(row[1], "m"), to_double(row[2], "h"), theta, phi};
    if (row.size() >= 5) {
      p.theta = to_double(row[3], "theta");
      p.phi = to_double(row[4], "phi");
    }
    rows.emplace_back(to_int(row[0], "bus id"), p);
  }
  if (rows.empty()) throw Error(ErrorCode::kMissingColumn, "missing [buses] table");
  config.agents = place_agents(rows);

  for (const auto& row : section(t, "branches")) {
    if (row.size() < 3) {
      throw Error(ErrorCode::kMissingColumn, "branches row needs 'from to susceptance'");
    }
    const double b = to_double(row[2], "susceptance");
    if (!(b > 0.0) || !std::isfinite(b)) {
      throw Error(ErrorCode::kNonPositiveSusceptance,
                  "branch " + row[0] + "-" + row[1] + " has susceptance " + row[2]);
    }
    // Linearized line flow: ell_ij = -susceptance.
    config.edges.push_back(Edge{Agent(to_int(row[0], "branch endpoint")),
                                Agent(to_int(row[1], "branch endpoint")), -b});
  }
  return config;
}

NetworkConfig apply_overrides(NetworkConfig config, const ControlOverrides& o) {
  for (auto& p : config.agents) {
    if (o.theta) p.theta = *o.theta;
    if (o.phi) p.phi = *o.phi;
  }
  if (o.kappa_d) config.kappa_d = o.kappa_d;
  if (o.tau) config.tau = o.tau;
  if (o.rho) config.rho = o.rho;
  if (o.delta_sq) config.delta_sq = o.delta_sq;
  return config;
}

NetworkModel load_network_config(const std::filesystem::path& path,
                                 const ControlOverrides& overrides) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return build_network(apply_overrides(parse_network_config(in), overrides));
}

NetworkModel import_power_case(std::istream& in, const ControlOverrides& overrides) {
  return build_network(apply_overrides(parse_power_case(in), overrides));
}

NetworkModel import_power_case(const std::filesystem::path& path,
                               const ControlOverrides& overrides) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return import_power_case(in, overrides);
}

namespace {

void write_header(std::ostream& os, const NetworkModel& model, bool uniform_gains) {
  if (uniform_gains) {
    os << "theta = " << fmt_exact(model.agents().front().theta) << '\n';
    os << "phi = " << fmt_exact(model.agents().front().phi) << '\n';
  }
  os << "kappa_d = " << fmt_exact(model.kappa_d()) << '\n';
  os << "tau = " << fmt_exact(model.tau()) << '\n';
  os << "rho = " << model.rho().id() << '\n';
  os << "delta_sq = " << fmt_exact(model.delta_sq()) << '\n';
}

bool has_uniform_gains(const NetworkModel& model) {
  const auto& a = model.agents();
  return std::all_of(a.begin(), a.end(), [&](const AgentParameters& p) {
    return p.theta == a.front().theta && p.phi == a.front().phi;
  });
}

}  // namespace

std::string export_power_case(const NetworkModel& model) {
  std::ostringstream os;
  const bool uniform = has_uniform_gains(model);
  os << "# power case: " << model.agent_count() << " buses, " << model.edges().size()
     << " branches\n";
  write_header(os, model, uniform);
  os << "\n[buses]\n# id m h" << (uniform ? "" : " theta phi") << '\n';
  for (int k = 0; k < model.agent_count(); ++k) {
    const auto& p = model.agents()[k];
    os << k + 1 << ' ' << fmt_exact(p.inertia) << ' ' << fmt_exact(p.damping);
    if (!uniform) os << ' ' << fmt_exact(p.theta) << ' ' << fmt_exact(p.phi);
    os << '\n';
  }
  os << "\n[branches]\n# from to susceptance\n";
  for (const Edge& e : model.edges()) {
    os << e.i.id() << ' ' << e.j.id() << ' ' << fmt_exact(-e.ell) << '\n';
  }
  return os.str();
}

std::string export_network_config(const NetworkModel& model) {
  std::ostringstream os;
  write_header(os, model, false);
  os << "\n[agents]\n# id m h theta phi\n";
  for (int k = 0; k < model.agent_count(); ++k) {
    const auto& p = model.agents()[k];
    os << k + 1 << ' ' << fmt_exact(p.inertia) << ' ' << fmt_exact(p.damping) << ' '
       << fmt_exact(p.theta) << ' ' << fmt_exact(p.phi) << '\n';
  }
  os << "\n[edges]\n# i j ell\n";
  for (const Edge& e : model.edges()) {
    os << e.i.id() << ' ' << e.j.id() << ' ' << fmt_exact(e.ell) << '\n';
  }
  return os.str();
}

}  // namespace detplace
