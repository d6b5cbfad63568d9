#include "detplace/scenario.hpp"

#include <cmath>
#include <sstream>

#include "detplace/linalg.hpp"

namespace detplace {
namespace {

constexpr double kDcFrequency = 1e-3;
constexpr double kStepFactor = 0.1;

void check_options(const Eigen::MatrixXd* A, const SimulationOptions& options) {
  if (!(options.horizon > 0.0) || !(options.step > 0.0) || options.record_stride < 1) {
    throw Error(ErrorCode::kInvalidArgument, "horizon, step and stride must be positive");
  }
  if (A == nullptr) return;
  const double limit = kStepFactor / A->operatorNorm();
  if (options.step > limit) {
    std::ostringstream os;
    os << "step " << options.step << " exceeds " << limit;
    throw Error(ErrorCode::kStepTooLarge, os.str());
  }
}

// RK4 on x' = A x + b u(t); calls observe(k, t, x, u) at every step.
template <typename Observe>
Eigen::VectorXd integrate(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                          const std::function<double(double)>& input,
                          const SimulationOptions& options, Observe&& observe) {
  const auto steps = static_cast<long>(std::llround(options.horizon / options.step));
  const double h = options.step;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(A.rows());
  for (long k = 0; k <= steps; ++k) {
    const double t = k * h;
    const double u0 = input(t);
    observe(k, t, x, u0);
    if (k == steps) break;
    const double u_half = input(t + 0.5 * h);
    const double u1 = input(t + h);
    const Eigen::VectorXd k1 = A * x + b * u0;
    const Eigen::VectorXd k2 = A * (x + 0.5 * h * k1) + b * u_half;
    const Eigen::VectorXd k3 = A * (x + 0.5 * h * k2) + b * u_half;
    const Eigen::VectorXd k4 = A * (x + h * k3) + b * u1;
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return x;
}

}  // namespace

double max_step(const AugmentedPlant& plant) { return kStepFactor / plant.A_d.operatorNorm(); }

double AttackSignal::operator()(double t) const {
  return frequency == 0.0 ? amplitude : amplitude * std::sin(frequency * t);
}

AttackSignal synthesize_stealthy_attack(const AugmentedPlant& plant, const ImpactResult& impact,
                                        double delta_sq, double margin) {
  if (!impact.finite()) {
    throw Error(ErrorCode::kInvalidArgument,
                "impact is " + to_string(impact.status) + "; no stealthy attack to synthesize");
  }
  if (!(margin >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "margin must be nonnegative");
  const double omega = impact.worst_frequency;
  if (std::isinf(omega)) {
    throw Error(ErrorCode::kInfiniteWorstFrequency,
                "worst case is approached only as the frequency grows without bound");
  }
  if (std::isnan(omega)) {
    throw Error(ErrorCode::kInvalidArgument, "impact carries no worst-case frequency");
  }
  AttackSignal signal;
  signal.agent = plant.attack;
  const linalg::Resolvent res(plant.A_d, plant.E_bar);
  if (omega < kDcFrequency) {
    const double gain = std::abs(res.transfer(plant.C_det, 0.0));
    signal.frequency = 0.0;
    signal.amplitude = std::sqrt(margin * delta_sq) / gain;
  } else {
    const double gain = std::abs(res.transfer(plant.C_det, linalg::Complex(0.0, omega)));
    signal.frequency = omega;
    signal.amplitude = std::sqrt(2.0 * margin * delta_sq) / gain;
  }
  return signal;
}

double SimulationRun::energy_ratio() const {
  if (final_energy_eta == 0.0) return 0.0;
  return final_energy_y / final_energy_eta;
}

SimulationRun simulate(const AugmentedPlant& plant, const std::function<double(double)>& input,
                       double delta_sq, const SimulationOptions& options) {
  check_options(&plant.A_d, options);
  SimulationRun run;
  run.horizon = options.horizon;
  run.step = options.step;
  run.delta_sq = delta_sq;

  double int_y = 0.0;
  double int_eta = 0.0;
  double prev_y2 = 0.0;
  double prev_eta2 = 0.0;
  run.final_state = integrate(
      plant.A_d, plant.E_bar, input, options,
      [&](long k, double t, const Eigen::VectorXd& z, double u) {
        const double y = plant.C_rho.dot(z);
        const double eta = plant.C_det.dot(z);
        if (k > 0) {
          int_y += 0.5 * options.step * (prev_y2 + y * y);
          int_eta += 0.5 * options.step * (prev_eta2 + eta * eta);
        }
        prev_y2 = y * y;
        prev_eta2 = eta * eta;
        const double e_y = t > 0.0 ? int_y / t : 0.0;
        const double e_eta = t > 0.0 ? int_eta / t : 0.0;
        if (k % options.record_stride == 0) {
          run.t.push_back(t);
          run.zeta.push_back(u);
          run.y_rho.push_back(y);
          run.eta.push_back(eta);
          run.energy_y.push_back(e_y);
          run.energy_eta.push_back(e_eta);
        }
        run.final_energy_y = e_y;
        run.final_energy_eta = e_eta;
      });
  run.detected = run.final_energy_eta > delta_sq;
  return run;
}

std::vector<double> simulate_residual_componentwise(const ClosedLoopSystem& sys, Agent attack,
                                                    Agent detector, const Eigen::VectorXd& K_d,
                                                    const std::function<double(double)>& input,
                                                    const SimulationOptions& options) {
  // Joint state [x; x_hat]:
  //   x'     = A x + E_a zeta
  //   x_hat' = A x_hat + K_d (C_d x - C_d x_hat)
  const int n = sys.state_dim();
  const Eigen::RowVectorXd Cd = sys.output_row(detector);
  Eigen::MatrixXd joint = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  joint.topLeftCorner(n, n) = sys.A();
  joint.bottomLeftCorner(n, n) = K_d * Cd;
  joint.bottomRightCorner(n, n) = sys.A() - K_d * Cd;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(2 * n);
  b.head(n) = sys.input_column(attack);
  check_options(nullptr, options);

  std::vector<double> eta;
  integrate(joint, b, input, options,
            [&](long k, double, const Eigen::VectorXd& z, double) {
              if (k % options.record_stride == 0) {
                eta.push_back(Cd.dot(z.head(n)) - Cd.dot(z.tail(n)));
              }
            });
  return eta;
}

}  // namespace detplace
