#include "detplace/structure.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "detplace/linalg.hpp"

namespace detplace {
namespace {

using Complex = std::complex<double>;

constexpr double kMarkovZeroTol = 1e-9;
constexpr double kSharedZeroTol = 1e-6;
constexpr double kSharedZeroDistance = 1e-6;

// A zero of one channel counts as a zero of the other when the other's
// pencil nearly drops rank there and the other has a computed zero nearby.
bool is_shared_zero(const SisoSystem& other, const ZeroReport& other_zeros, Complex z) {
  if (pencil_residual(other, z) >= kSharedZeroTol) return false;
  const double radius = kSharedZeroDistance * std::max(1.0, std::abs(z));
  return std::any_of(other_zeros.zeros.begin(), other_zeros.zeros.end(),
                     [&](const InvariantZero& w) { return std::abs(w.value - z) <= radius; });
}

Eigen::MatrixXcd pencil_at(const SisoSystem& sys, Complex lambda) {
  const Eigen::Index n = sys.A.rows();
  Eigen::MatrixXcd P(n + 1, n + 1);
  P.topLeftCorner(n, n) = -sys.A.cast<Complex>();
  P.topLeftCorner(n, n).diagonal().array() += lambda;
  P.topRightCorner(n, 1) = -sys.B.cast<Complex>();
  P.bottomLeftCorner(1, n) = sys.C.cast<Complex>();
  P(n, n) = sys.D;
  return P;
}

ZeroKind classify(Complex z) {
  const double scale = std::max(1.0, std::abs(z));
  if (z.real() < -1e-10 * scale) return ZeroKind::kStable;
  if (std::abs(z.imag()) <= 1e-8 * scale) return ZeroKind::kPositiveRealUnstable;
  return ZeroKind::kComplexUnstable;
}

int relative_degree_impl(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                         const Eigen::RowVectorXd& c, int max_k) {
  const double c_norm = c.norm();
  Eigen::VectorXd v = b;
  for (int k = 1; k <= max_k; ++k) {
    if (std::abs(c.dot(v)) > kMarkovZeroTol * c_norm * v.norm()) return k;
    v = A * v;
  }
  throw Error(ErrorCode::kDegreeOverflow,
              "no nonzero Markov parameter up to order " + std::to_string(max_k));
}

}  // namespace

SisoSystem detector_channel(const AugmentedPlant& plant) {
  return {plant.A_d, plant.E_bar, plant.C_det, 0.0};
}

SisoSystem performance_channel(const AugmentedPlant& plant) {
  return {plant.A_d, plant.E_bar, plant.C_rho, 0.0};
}

SisoSystem measurement_channel(const ClosedLoopSystem& sys, Agent a, Agent d) {
  return {sys.A(), sys.input_column(a), sys.output_row(d), 0.0};
}

SisoSystem residual_generator(const ClosedLoopSystem& sys, Agent d, const Eigen::VectorXd& K_d) {
  const Eigen::RowVectorXd Cd = sys.output_row(d);
  return {sys.A() - K_d * Cd, K_d, -Cd, 1.0};
}

std::vector<InvariantZero> ZeroReport::unstable() const {
  std::vector<InvariantZero> out;
  std::copy_if(zeros.begin(), zeros.end(), std::back_inserter(out),
               [](const InvariantZero& z) { return z.kind != ZeroKind::kStable; });
  return out;
}

bool ZeroReport::has_positive_real_unstable() const {
  return std::any_of(zeros.begin(), zeros.end(), [](const InvariantZero& z) {
    return z.kind == ZeroKind::kPositiveRealUnstable;
  });
}

bool ZeroReport::has_complex_unstable() const {
  return std::any_of(zeros.begin(), zeros.end(), [](const InvariantZero& z) {
    return z.kind == ZeroKind::kComplexUnstable;
  });
}

double pencil_residual(const SisoSystem& sys, Complex lambda) {
  const Eigen::MatrixXcd P = pencil_at(sys, lambda);
  // sigma_max by power iteration on P^H P.
  Eigen::VectorXcd x = Eigen::VectorXcd::Ones(P.cols()).normalized();
  double sigma_max = 0.0;
  for (int it = 0; it < 30; ++it) {
    Eigen::VectorXcd y = P.adjoint() * (P * x);
    const double nrm = y.norm();
    if (nrm == 0.0) return 0.0;
    const double next = std::sqrt(nrm);
    x = y / nrm;
    if (std::abs(next - sigma_max) <= 1e-6 * next) {
      sigma_max = next;
      break;
    }
    sigma_max = next;
  }
  // sigma_min by inverse iteration on P^H P.
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(P);
  Eigen::VectorXcd z = Eigen::VectorXcd::Ones(P.cols()).normalized();
  double sigma_min = sigma_max;
  for (int it = 0; it < 20; ++it) {
    const Eigen::VectorXcd w = lu.solve(lu.adjoint().solve(z));
    const double nrm = w.norm();
    if (!std::isfinite(nrm) || nrm == 0.0) return 0.0;
    const double next = 1.0 / std::sqrt(nrm);
    z = w / nrm;
    if (std::abs(next - sigma_min) <= 1e-8 * std::max(next, 1e-300)) {
      sigma_min = next;
      break;
    }
    sigma_min = next;
  }
  return sigma_min / sigma_max;
}

ZeroReport finite_zeros(const SisoSystem& sys) {
  // The finite eigenvalues of the Rosenbrock pencil are the eigenvalues of
  // the zero dynamics: A - B (C A^{r-1} B)^{-1} C A^r restricted to the
  // kernel of [C; C A; ...; C A^{r-1}]. Deflating the infinite part this way
  // avoids QZ on a pencil with a large infinite eigenvalue cluster.
  const Eigen::Index n = sys.A.rows();
  Eigen::MatrixXd closed;
  Eigen::MatrixXd basis;
  if (sys.D != 0.0) {
    closed = sys.A - sys.B * sys.C / sys.D;
    basis = Eigen::MatrixXd::Identity(n, n);
  } else {
    int r = 0;
    try {
      r = relative_degree(sys);
    } catch (const Error& e) {
      throw Error(ErrorCode::kPencilFailure, std::string("transfer function vanishes: ") + e.what());
    }
    Eigen::MatrixXd rows(r, n);
    Eigen::RowVectorXd w = sys.C;
    for (int k = 0; k < r; ++k) {
      w /= w.norm();
      rows.row(k) = w;
      if (k + 1 < r) w = w * sys.A;
    }
    const double lead = w.dot(sys.B);
    closed = sys.A - sys.B * (w * sys.A) / lead;
    basis = linalg::orthogonal_complement(rows.transpose());
  }

  ZeroReport report;
  if (basis.cols() == 0) return report;
  const Eigen::MatrixXd reduced = basis.transpose() * closed * basis;
  Eigen::EigenSolver<Eigen::MatrixXd> es(reduced, false);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::kPencilFailure, "eigenvalue iteration did not converge");
  }
  for (const Complex z : es.eigenvalues()) {
    report.zeros.push_back(InvariantZero{z, classify(z), pencil_residual(sys, z)});
  }
  std::sort(report.zeros.begin(), report.zeros.end(),
            [](const InvariantZero& a, const InvariantZero& b) {
              if (a.value.real() != b.value.real()) return a.value.real() < b.value.real();
              return a.value.imag() < b.value.imag();
            });
  return report;
}

ZeroReport finite_zeros(const AugmentedPlant& plant) {
  return finite_zeros(detector_channel(plant));
}

int relative_degree(const ClosedLoopSystem& sys, Agent i, Agent a) {
  return relative_degree_impl(sys.A(), sys.input_column(a), sys.output_row(i),
                              2 * sys.state_dim());
}

int relative_degree(const SisoSystem& sys) {
  return relative_degree_impl(sys.A, sys.B, sys.C, 2 * static_cast<int>(sys.A.rows()));
}

RelativeDegreeTable relative_degree_table(const ClosedLoopSystem& sys) {
  const int n = sys.agent_count();
  RelativeDegreeTable table{Eigen::MatrixXi::Zero(n, n)};
  // Markov parameters for all outputs at once, one input column at a time.
  const Eigen::MatrixXd& A = sys.A();
  for (int a = 0; a < n; ++a) {
    Eigen::VectorXd v = sys.input_column(Agent::from_index(a));
    int assigned = 0;
    for (int k = 1; k <= 2 * sys.state_dim() && assigned < n; ++k) {
      const double scale = v.norm();
      for (int i = 0; i < n; ++i) {
        if (table.r(i, a) == 0 && std::abs(v[i]) > kMarkovZeroTol * scale) {
          table.r(i, a) = k;
          ++assigned;
        }
      }
      v = A * v;
    }
    if (assigned < n) {
      throw Error(ErrorCode::kDegreeOverflow,
                  "relative degree overflow for input agent " + std::to_string(a + 1));
    }
  }
  return table;
}

bool DetectionSet::contains(Agent d) const {
  return std::binary_search(members.begin(), members.end(), d);
}

std::vector<Agent> detection_candidates_by_distance(const NetworkModel& model) {
  const Eigen::MatrixXi dist = hop_distances(model);
  const int rho = model.rho().index();
  std::vector<Agent> out;
  for (Agent d : model.agents_except_rho()) {
    bool ok = true;
    for (Agent a : model.agents_except_rho()) {
      if (dist(d.index(), a.index()) > dist(rho, a.index())) {
        ok = false;
        break;
      }
    }
    if (ok) out.push_back(d);
  }
  return out;
}

std::vector<Agent> detection_candidates_by_markov(const ClosedLoopSystem& sys,
                                                  const NetworkModel& model) {
  const RelativeDegreeTable r = relative_degree_table(sys);
  std::vector<Agent> by_markov;
  for (Agent d : model.agents_except_rho()) {
    bool ok = true;
    for (Agent a : model.agents_except_rho()) {
      if (r.at(d, a) > r.at(model.rho(), a)) {
        ok = false;
        break;
      }
    }
    if (ok) by_markov.push_back(d);
  }
  return by_markov;
}

DetectionSet detection_set(const ClosedLoopSystem& sys, const NetworkModel& model) {
  const std::vector<Agent> by_distance = detection_candidates_by_distance(model);

  const std::vector<Agent> by_markov = detection_candidates_by_markov(sys, model);
  if (by_distance != by_markov) {
    std::ostringstream os;
    os << "hop-distance rule gives {";
    for (Agent d : by_distance) os << ' ' << d;
    os << " } but Markov parameters give {";
    for (Agent d : by_markov) os << ' ' << d;
    os << " }";
    throw Error(ErrorCode::kMethodDisagreement, os.str());
  }

  // Finite-zero screen on Sigma_m = (A, E_a, C_d): unstable zeros must be
  // shared with (A, E_a, C_rho).
  const std::vector<Agent> attacks = model.agents_except_rho();
  std::vector<SisoSystem> protected_out;
  std::vector<ZeroReport> protected_zeros;
  for (Agent a : attacks) {
    protected_out.push_back(measurement_channel(sys, a, model.rho()));
    protected_zeros.push_back(finite_zeros(protected_out.back()));
  }

  DetectionSet result;
  for (Agent d : by_markov) {
    std::string reason;
    std::string note;
    for (std::size_t k = 0; k < attacks.size(); ++k) {
      const Agent a = attacks[k];
      const SisoSystem measured = measurement_channel(sys, a, d);
      for (const InvariantZero& z : finite_zeros(measured).unstable()) {
        if (is_shared_zero(protected_out[k], protected_zeros[k], z.value)) continue;
        std::ostringstream os;
        os << "unstable zero " << z.value << " for attack at " << a;
        if (z.kind == ZeroKind::kPositiveRealUnstable) {
          reason = os.str();
          break;
        }
        if (note.empty()) note = os.str();
      }
      if (!reason.empty()) break;
    }
    if (!reason.empty()) {
      result.rejected.emplace_back(d, reason);
      continue;
    }
    result.members.push_back(d);
    if (!note.empty()) result.unverified.emplace_back(d, note);
  }
  if (result.members.empty()) {
    throw Error(ErrorCode::kEmptyDetectionSet,
                "no agent satisfies the relative-degree condition for every attack location");
  }
  return result;
}

Eigen::MatrixXcd q_lambda(const NetworkModel& model, Complex lambda) {
  const Complex denom = model.tau() * lambda + 1.0;
  if (std::abs(denom) <= 1e-12 * std::max(1.0, std::abs(model.tau() * lambda))) {
    throw Error(ErrorCode::kPoleAtFilter, "lambda = -1/tau");
  }
  const int n = model.agent_count();
  Eigen::MatrixXcd Q = laplacian(model).L.cast<Complex>();
  const Complex filter = lambda * model.kappa_d() / denom;
  for (int i = 0; i < n; ++i) {
    const auto& p = model.agents()[i];
    Q(i, i) += p.theta + lambda * lambda * p.inertia + lambda * p.damping + filter * p.phi;
  }
  return Q;
}

RhpEntryScreen rhp_entry_screen(const NetworkModel& model, double tol) {
  RhpEntryScreen screen;
  screen.min_relative_entry = std::numeric_limits<double>::infinity();
  const double reals[] = {0.0, 0.01, 0.1, 1.0, 10.0};
  std::vector<double> imags{0.0};
  for (int k = 0; k <= 60; ++k) imags.push_back(std::pow(10.0, -3.0 + 6.0 * k / 60.0));
  for (double re : reals) {
    for (double im : imags) {
      const Complex lambda(re, im);
      const Eigen::MatrixXcd inv = q_lambda(model, lambda).inverse();
      const double big = inv.cwiseAbs().maxCoeff();
      const double small = inv.cwiseAbs().minCoeff();
      const double rel = big > 0.0 ? small / big : 0.0;
      ++screen.samples;
      if (rel < screen.min_relative_entry) {
        screen.min_relative_entry = rel;
        screen.worst_lambda = lambda;
      }
    }
  }
  screen.passed = screen.min_relative_entry > tol;
  return screen;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::kFeasible: return "Feasible";
    case Verdict::kInfeasibleRelDegree: return "InfeasibleRelDegree";
    case Verdict::kInfeasibleUnstableZero: return "InfeasibleUnstableZero";
    case Verdict::kUnverifiedComplexZeros: return "UnverifiedComplexZeros";
  }
  return "Unknown";
}

FeasibilityReport feasibility_report(const AugmentedPlant& plant) {
  FeasibilityReport report;
  const SisoSystem det = detector_channel(plant);
  const SisoSystem perf = performance_channel(plant);
  report.r_detector = relative_degree(det);
  report.r_rho = relative_degree(perf);
  if (report.r_detector > report.r_rho) {
    report.verdict = Verdict::kInfeasibleRelDegree;
    return report;
  }
  report.detector_zeros = finite_zeros(det);
  const std::vector<InvariantZero> unstable = report.detector_zeros.unstable();
  if (unstable.empty()) return report;
  const ZeroReport perf_zeros = finite_zeros(perf);
  bool complex_pending = false;
  for (const InvariantZero& z : unstable) {
    if (is_shared_zero(perf, perf_zeros, z.value)) continue;
    if (z.kind == ZeroKind::kPositiveRealUnstable) {
      report.verdict = Verdict::kInfeasibleUnstableZero;
      return report;
    }
    complex_pending = true;
  }
  report.verdict = complex_pending ? Verdict::kUnverifiedComplexZeros : Verdict::kFeasible;
  return report;
}

Verdict feasibility_verdict(const NetworkModel& model, const ClosedLoopSystem& sys, Agent a,
                            Agent d) {
  if (!model.contains(a) || !model.contains(d)) {
    throw Error(ErrorCode::kBadIndex, "agent outside the network");
  }
  return feasibility_report(build_augmented(sys, a, d)).verdict;
}

}  // namespace detplace
