#include "detplace/impact.hpp"

#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include "detplace/linalg.hpp"

namespace detplace {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kAgreementTol = 1e-3;
constexpr double kOverflowGuard = 1e12;
constexpr int kGridPoints = 2000;
constexpr double kGridLow = -4.0;
constexpr double kGridHigh = 4.0;
constexpr double kGoldenWidth = 1e-10;

MatrixXd orthonormal_columns(const MatrixXd& K) {
  Eigen::HouseholderQR<MatrixXd> qr(K);
  return qr.householderQ() * MatrixXd::Identity(K.rows(), K.cols());
}

ImpactResult unbounded(const AugmentedPlant& plant, std::string why) {
  ImpactResult r;
  r.attack = plant.attack;
  r.detector = plant.detector;
  r.status = ImpactStatus::kUnbounded;
  r.message = std::move(why);
  return r;
}

}  // namespace

std::string to_string(ImpactStatus s) {
  switch (s) {
    case ImpactStatus::kOptimal: return "Optimal";
    case ImpactStatus::kInfeasible: return "Infeasible";
    case ImpactStatus::kUnbounded: return "Unbounded";
    case ImpactStatus::kNumericalTrouble: return "NumericalTrouble";
  }
  return "Unknown";
}

ImpactResult impact_sdp(const AugmentedPlant& plant, double delta_sq,
                        const ImpactOptions& options) {
  if (!(delta_sq > 0.0) || !std::isfinite(delta_sq)) {
    throw Error(ErrorCode::kNonPositiveParameter, "delta_sq must be positive");
  }
  const FeasibilityReport feas = feasibility_report(plant);
  if (feas.verdict == Verdict::kInfeasibleRelDegree) {
    std::ostringstream os;
    os << "relative degree " << feas.r_detector << " at the detector exceeds " << feas.r_rho
       << " at the performance output";
    return unbounded(plant, os.str());
  }
  if (feas.verdict == Verdict::kInfeasibleUnstableZero) {
    return unbounded(plant, "unshared unstable real zero in the detector channel");
  }
  if (feas.verdict == Verdict::kUnverifiedComplexZeros) {
    // A matched growing input makes the ratio diverge; the SDP can only
    // approach this as a weakly infeasible problem.
    return unbounded(plant, "unshared unstable complex zeros in the detector channel");
  }

  const MatrixXd& Ad = plant.A_d;
  const int n = plant.state_dim();
  const int rd = feas.r_detector;

  // Krylov directions that F must annihilate.
  MatrixXd krylov(n, rd);
  krylov.col(0) = plant.E_bar;
  for (int j = 1; j < rd; ++j) krylov.col(j) = Ad * krylov.col(j - 1);
  for (int j = 0; j < rd; ++j) krylov.col(j).normalize();
  const MatrixXd kernel_f = orthonormal_columns(krylov);
  const MatrixXd U = linalg::orthogonal_complement(kernel_f);
  const MatrixXd W = rd > 1 ? linalg::orthogonal_complement(kernel_f.leftCols(rd - 1))
                            : MatrixXd::Identity(n, n);
  const int m = static_cast<int>(U.cols());
  const int nw = static_cast<int>(W.cols());
  // Variables: t = gamma / delta_sq, then G(k, l) for k <= l. The conic
  // problem does not depend on delta_sq, so gamma is exactly homogeneous.
  const int num_g = m * (m + 1) / 2;
  sdp::Problem prob;
  prob.num_vars = 1 + num_g;
  prob.b = VectorXd::Zero(prob.num_vars);
  prob.b[0] = 1.0;

  sdp::Block lmi;
  lmi.dim = nw;
  lmi.pool.resize(nw, 2 * m + 2);
  lmi.pool.leftCols(m) = W.transpose() * Ad.transpose() * U;
  lmi.pool.middleCols(m, m) = W.transpose() * U;
  lmi.pool.col(2 * m) = W.transpose() * plant.C_det.transpose();
  lmi.pool.col(2 * m + 1) = W.transpose() * plant.C_rho.transpose();
  lmi.a.resize(prob.num_vars);
  lmi.a[0].push_back({2 * m, 2 * m, 1.0});
  lmi.c.push_back({2 * m + 1, 2 * m + 1, 1.0});

  sdp::Block gram;
  gram.dim = m;
  gram.pool = MatrixXd::Identity(m, m);
  gram.a.resize(prob.num_vars);

  sdp::Block gamma_cone;
  gamma_cone.dim = 1;
  gamma_cone.pool = MatrixXd::Ones(1, 1);
  gamma_cone.a.resize(prob.num_vars);
  gamma_cone.a[0].push_back({0, 0, 1.0});

  std::vector<std::pair<int, int>> g_index;
  g_index.reserve(num_g);
  for (int k = 0; k < m; ++k) {
    for (int l = k; l < m; ++l) {
      const int var = 1 + static_cast<int>(g_index.size());
      g_index.emplace_back(k, l);
      if (k == l) {
        lmi.a[var].push_back({k, m + k, -2.0});
        gram.a[var].push_back({k, k, 1.0});
      } else {
        lmi.a[var].push_back({k, m + l, -2.0});
        lmi.a[var].push_back({l, m + k, -2.0});
        gram.a[var].push_back({k, l, 2.0});
      }
    }
  }
  prob.blocks = {std::move(lmi), std::move(gram), std::move(gamma_cone)};

  const sdp::Solution sol = sdp::solve(prob, options.solver);

  ImpactResult result;
  result.attack = plant.attack;
  result.detector = plant.detector;
  result.solver_iterations = sol.iterations;
  if (sol.status != sdp::Status::kOptimal && sol.status != sdp::Status::kNearOptimal) {
    result.status = ImpactStatus::kNumericalTrouble;
    result.message = std::string("conic solver: ") + sdp::to_string(sol.status);
    return result;
  }

  MatrixXd G(m, m);
  for (int idx = 0; idx < num_g; ++idx) {
    const auto [k, l] = g_index[idx];
    G(k, l) = G(l, k) = sol.y[1 + idx];
  }
  const double ratio = std::max(0.0, sol.y[0]);
  const double gamma = delta_sq * ratio;
  const MatrixXd F = U * G * U.transpose();

  // Full LMI residual.
  const MatrixXd lyap = Ad.transpose() * F + F * Ad;
  const MatrixXd out_rho = plant.C_rho.transpose() * plant.C_rho;
  const MatrixXd out_det = plant.C_det.transpose() * plant.C_det;
  MatrixXd R = MatrixXd::Zero(n + 1, n + 1);
  R.topLeftCorner(n, n) = lyap + out_rho - ratio * out_det;
  R.topRightCorner(n, 1) = F * plant.E_bar;
  R.bottomLeftCorner(1, n) = (F * plant.E_bar).transpose();
  const double scale = lyap.norm() + out_rho.norm() + ratio * out_det.norm();
  const double r_max = linalg::max_eigenvalue(0.5 * (R + R.transpose()));
  const double f_min = linalg::min_eigenvalue(0.5 * (F + F.transpose()));
  result.lmi_residual = std::max(r_max, -f_min) / std::max(1.0, scale);
  if (result.lmi_residual > options.residual_tol) {
    result.status = ImpactStatus::kNumericalTrouble;
    std::ostringstream os;
    os << "LMI residual " << result.lmi_residual << " above tolerance";
    result.message = os.str();
    return result;
  }
  result.status = ImpactStatus::kOptimal;
  result.gamma_star = gamma;
  result.certificate = 0.5 * (F + F.transpose());
  return result;
}

OracleResult impact_frequency_oracle(const AugmentedPlant& plant, double delta_sq) {
  const SisoSystem det = detector_channel(plant);
  const SisoSystem perf = performance_channel(plant);
  const int r_det = relative_degree(det);
  int r_perf = 0;
  try {
    r_perf = relative_degree(perf);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kDegreeOverflow) throw;
    r_perf = std::numeric_limits<int>::max();  // G_rho identically zero
  }
  if (r_det > r_perf) {
    throw Error(ErrorCode::kUnboundedRatio, "high-frequency ratio grows without bound");
  }
  double limit = 0.0;
  if (r_det == r_perf) {
    const double m_det = linalg::markov_parameter(plant.A_d, plant.E_bar, plant.C_det, r_det - 1);
    const double m_perf =
        linalg::markov_parameter(plant.A_d, plant.E_bar, plant.C_rho, r_perf - 1);
    limit = (m_perf / m_det) * (m_perf / m_det);
  }

  // Direct evaluation loses all accuracy once |G(jw)| drops below rounding
  // level relative to the resolvent. Above the crossover each channel is
  // evaluated as s^-(r-1) C (sI - A)^-1 A^(r-1) E, which drops the vanishing
  // leading Markov terms analytically.
  Eigen::VectorXd shifted_det = plant.E_bar;
  for (int k = 1; k < r_det; ++k) shifted_det = plant.A_d * shifted_det;
  Eigen::VectorXd shifted_perf = shifted_det;
  for (int k = r_det; k < std::min(r_perf, 2 * plant.state_dim()); ++k) {
    shifted_perf = plant.A_d * shifted_perf;
  }
  const linalg::Resolvent direct(plant.A_d, plant.E_bar);
  const linalg::Resolvent high_det(plant.A_d, shifted_det);
  const linalg::Resolvent high_perf(plant.A_d, shifted_perf);
  const Eigen::VectorXd eig_abs = plant.A_d.eigenvalues().cwiseAbs();
  const double crossover = std::sqrt(eig_abs.minCoeff() * eig_abs.maxCoeff());
  const bool perf_zero = r_perf == std::numeric_limits<int>::max();

  auto ratio = [&](double omega) {
    const linalg::Complex s(0.0, omega);
    double gd = 0.0;
    double gr = 0.0;
    if (omega < crossover) {
      gd = std::norm(direct.transfer(plant.C_det, s));
      gr = perf_zero ? 0.0 : std::norm(direct.transfer(plant.C_rho, s));
    } else {
      // |s|^-2(r_perf - r_det) is applied to the ratio, not to each factor.
      gd = std::norm(high_det.transfer(plant.C_det, s));
      gr = perf_zero ? 0.0
                     : std::norm(high_perf.transfer(plant.C_rho, s)) *
                           std::pow(omega, -2.0 * (r_perf - r_det));
    }
    if (!(gd > 0.0) || gr > kOverflowGuard * gd) {
      std::ostringstream os;
      os << "residual transfer vanishes relative to the performance transfer at w = " << omega;
      throw Error(ErrorCode::kUnboundedRatio, os.str());
    }
    return gr / gd;
  };

  // Grid over w = 0 and log-spaced points; index 0 is DC.
  std::vector<double> omegas(kGridPoints + 1);
  omegas[0] = 0.0;
  for (int k = 0; k < kGridPoints; ++k) {
    omegas[k + 1] = std::pow(10.0, kGridLow + (kGridHigh - kGridLow) * k / (kGridPoints - 1));
  }
  int best = 0;
  double best_val = -1.0;
  for (int k = 0; k <= kGridPoints; ++k) {
    const double v = ratio(omegas[k]);
    if (v > best_val) {
      best_val = v;
      best = k;
    }
  }

  // Golden-section refinement on the bracket around the best grid point,
  // in log10(w) for interior points and in w next to DC.
  const bool near_dc = best <= 1;
  auto to_omega = [&](double t) { return near_dc ? t : std::pow(10.0, t); };
  double lo = near_dc ? 0.0 : std::log10(omegas[best - 1]);
  double hi = near_dc ? omegas[2] : std::log10(omegas[std::min(best + 1, kGridPoints)]);
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - phi * (hi - lo);
  double x2 = lo + phi * (hi - lo);
  double f1 = ratio(to_omega(x1));
  double f2 = ratio(to_omega(x2));
  while (hi - lo > kGoldenWidth) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = ratio(to_omega(x2));
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = ratio(to_omega(x1));
    }
  }
  double omega_star = omegas[best];
  if (f1 > best_val) {
    best_val = f1;
    omega_star = to_omega(x1);
  }
  if (f2 > best_val) {
    best_val = f2;
    omega_star = to_omega(x2);
  }
  if (limit > best_val) {
    best_val = limit;
    omega_star = std::numeric_limits<double>::infinity();
  }
  return {delta_sq * best_val, omega_star};
}

ImpactResult evaluate_impact(const AugmentedPlant& plant, double delta_sq,
                             const ImpactOptions& options) {
  ImpactResult result = impact_sdp(plant, delta_sq, options);
  try {
    const OracleResult oracle = impact_frequency_oracle(plant, delta_sq);
    result.oracle_ok = true;
    result.oracle_gamma = oracle.gamma;
    result.worst_frequency = oracle.omega_star;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kUnboundedRatio) throw;
    result.oracle_ok = false;
    result.worst_frequency = std::numeric_limits<double>::infinity();
  }
  if (result.finite() && result.oracle_ok) {
    result.agreement = std::abs(result.gamma_star - result.oracle_gamma) <=
                       kAgreementTol * std::max(result.gamma_star, delta_sq);
  } else {
    result.agreement = !result.finite() && !result.oracle_ok;
  }
  return result;
}

PayoffMatrix PayoffMatrix::from_values(const Eigen::MatrixXd& values) {
  PayoffMatrix pm;
  for (int i = 0; i < values.rows(); ++i) pm.attacks.push_back(Agent::from_index(i));
  for (int j = 0; j < values.cols(); ++j) pm.detectors.push_back(Agent::from_index(j));
  pm.gamma = values;
  return pm;
}

Eigen::VectorXd PayoffMatrix::alpha() const { return gamma.colwise().maxCoeff().transpose(); }

Eigen::VectorXd PayoffMatrix::beta() const { return gamma.rowwise().minCoeff(); }

bool PayoffMatrix::all_finite() const { return gamma.allFinite(); }

PayoffMatrix payoff_matrix(const NetworkModel& model, const ClosedLoopSystem& sys,
                           const DetectionSet& detection, const ImpactOptions& options,
                           unsigned threads) {
  if (detection.members.empty()) {
    throw Error(ErrorCode::kEmptyDetectionSet, "no detector candidates");
  }
  PayoffMatrix pm;
  pm.attacks = model.agents_except_rho();
  pm.detectors = detection.members;
  const int rows = static_cast<int>(pm.attacks.size());
  const int cols = static_cast<int>(pm.detectors.size());
  pm.gamma = MatrixXd::Constant(rows, cols, std::numeric_limits<double>::infinity());
  pm.entries.resize(static_cast<std::size_t>(rows) * cols);

  // One observer per detector, designed up front.
  std::vector<VectorXd> gains(cols);
  std::vector<std::string> gain_errors(cols);
  for (int j = 0; j < cols; ++j) {
    try {
      gains[j] = design_observer(sys, pm.detectors[j]);
    } catch (const Error& e) {
      gain_errors[j] = e.what();
    }
  }

  const int total = rows * cols;
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int idx = next++; idx < total; idx = next++) {
      const int i = idx / cols;
      const int j = idx % cols;
      ImpactResult& out = pm.entries[idx];
      out.attack = pm.attacks[i];
      out.detector = pm.detectors[j];
      if (!gain_errors[j].empty()) {
        out.status = ImpactStatus::kNumericalTrouble;
        out.message = gain_errors[j];
        continue;
      }
      try {
        const AugmentedPlant plant = build_augmented(sys, out.attack, out.detector, gains[j]);
        out = evaluate_impact(plant, model.delta_sq(), options);
      } catch (const std::exception& e) {
        out.status = ImpactStatus::kNumericalTrouble;
        out.message = e.what();
      }
    }
  };
  unsigned n_threads = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(std::max(1, total)));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  for (int idx = 0; idx < total; ++idx) {
    if (pm.entries[idx].finite()) pm.gamma(idx / cols, idx % cols) = pm.entries[idx].gamma_star;
  }
  return pm;
}

}  // namespace detplace
