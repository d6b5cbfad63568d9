#include "detplace/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace detplace::sdp {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd sym(const MatrixXd& m) { return 0.5 * (m + m.transpose()); }

void add_term(MatrixXd& Z, const Term& t, double weight) {
  const double w = 0.5 * weight * t.coef;
  Z(t.u, t.v) += w;
  Z(t.v, t.u) += w;
}

// <A_i, X> for every variable, given G = P^T X P.
void accumulate_op(const Block& block, const MatrixXd& G, VectorXd& out) {
  for (std::size_t i = 0; i < block.a.size(); ++i) {
    for (const Term& t : block.a[i]) out[i] += t.coef * G(t.u, t.v);
  }
}

double term_inner(const std::vector<Term>& lhs, const std::vector<Term>& rhs, const MatrixXd& G) {
  // <sum sym(u v^T), sum sym(u' v'^T)> with G the Gram matrix of the pool.
  double s = 0.0;
  for (const Term& t : lhs) {
    for (const Term& r : rhs) {
      s += t.coef * r.coef * 0.5 * (G(t.u, r.u) * G(t.v, r.v) + G(t.u, r.v) * G(t.v, r.u));
    }
  }
  return s;
}

// Largest alpha with M + alpha D >= 0, or +inf.
double max_step(const Eigen::LLT<MatrixXd>& chol, const MatrixXd& D) {
  const auto L = chol.matrixL();
  MatrixXd tmp = L.solve(D);
  tmp = L.solve(tmp.transpose()).transpose();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym(tmp), Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues()[0];
  return lmin < 0.0 ? -1.0 / lmin : std::numeric_limits<double>::infinity();
}

struct Workspace {
  std::vector<MatrixXd> S_inv;
  std::vector<MatrixXd> GX;
  std::vector<MatrixXd> GY;
};

class Solver {
 public:
  Solver(const Problem& p, const Settings& s) : prob_(p), set_(s) {
    nb_ = static_cast<int>(p.blocks.size());
    total_dim_ = 0;
    for (const Block& b : p.blocks) total_dim_ += b.dim;
    vars_in_block_.resize(nb_);
    for (int k = 0; k < nb_; ++k) {
      for (int i = 0; i < p.num_vars; ++i) {
        if (!p.blocks[k].a[i].empty()) vars_in_block_[k].push_back(i);
      }
    }
  }

  Solution run();

 private:
  MatrixXd adjoint(int k, const VectorXd& y, bool with_c) const {
    const Block& b = prob_.blocks[k];
    MatrixXd Z = MatrixXd::Zero(b.pool.cols(), b.pool.cols());
    for (int i : vars_in_block_[k]) {
      if (y[i] == 0.0) continue;
      for (const Term& t : b.a[i]) add_term(Z, t, y[i]);
    }
    if (with_c) {
      for (const Term& t : b.c) add_term(Z, t, -1.0);
    }
    return b.pool * Z * b.pool.transpose();
  }

  VectorXd op(const std::vector<MatrixXd>& X) const {
    VectorXd out = VectorXd::Zero(prob_.num_vars);
    for (int k = 0; k < nb_; ++k) {
      const Block& b = prob_.blocks[k];
      accumulate_op(b, b.pool.transpose() * X[k] * b.pool, out);
    }
    return out;
  }

  double objective_c(const std::vector<MatrixXd>& X) const {
    double s = 0.0;
    for (int k = 0; k < nb_; ++k) {
      const Block& b = prob_.blocks[k];
      const MatrixXd G = b.pool.transpose() * X[k] * b.pool;
      for (const Term& t : b.c) s += t.coef * G(t.u, t.v);
    }
    return s;
  }

  MatrixXd schur(const Workspace& ws) const;

  const Problem& prob_;
  const Settings& set_;
  int nb_ = 0;
  int total_dim_ = 0;
  std::vector<std::vector<int>> vars_in_block_;
};

MatrixXd Solver::schur(const Workspace& ws) const {
  const int m = prob_.num_vars;
  MatrixXd M = MatrixXd::Zero(m, m);
  for (int k = 0; k < nb_; ++k) {
    const Block& b = prob_.blocks[k];
    const MatrixXd& X = ws.GX[k];
    const MatrixXd& Y = ws.GY[k];
    const std::vector<int>& vars = vars_in_block_[k];
    for (std::size_t ii = 0; ii < vars.size(); ++ii) {
      const int i = vars[ii];
      for (std::size_t jj = ii; jj < vars.size(); ++jj) {
        const int j = vars[jj];
        double s = 0.0;
        for (const Term& t : b.a[i]) {
          const int u = t.u;
          const int v = t.v;
          for (const Term& r : b.a[j]) {
            const int u2 = r.u;
            const int v2 = r.v;
            s += t.coef * r.coef *
                 (X(v, u2) * Y(v2, u) + X(v, v2) * Y(u2, u) + X(u, u2) * Y(v2, v) +
                  X(u, v2) * Y(u2, v));
          }
        }
        M(i, j) += 0.25 * s;
      }
    }
  }
  M.triangularView<Eigen::StrictlyLower>() = M.transpose();
  return M;
}

Solution Solver::run() {
  const int m = prob_.num_vars;
  Solution sol;

  // Initial point scaled to the data.
  double xi = std::max(10.0, std::sqrt(static_cast<double>(total_dim_)));
  double eta = xi;
  double c_norm = 0.0;
  for (const Block& b : prob_.blocks) {
    const MatrixXd gram = b.pool.transpose() * b.pool;
    for (std::size_t i = 0; i < b.a.size(); ++i) {
      if (b.a[i].empty()) continue;
      const double an = std::sqrt(std::max(0.0, term_inner(b.a[i], b.a[i], gram)));
      xi = std::max(xi, (1.0 + std::abs(prob_.b[static_cast<Eigen::Index>(i)])) / (1.0 + an));
      eta = std::max(eta, an);
    }
    const double cn = std::sqrt(std::max(0.0, term_inner(b.c, b.c, gram)));
    c_norm += cn * cn;
    eta = std::max(eta, cn);
  }
  c_norm = std::sqrt(c_norm);
  const double b_norm = prob_.b.norm();

  std::vector<MatrixXd> X(nb_), S(nb_);
  for (int k = 0; k < nb_; ++k) {
    const int n = prob_.blocks[k].dim;
    X[k] = xi * MatrixXd::Identity(n, n);
    S[k] = eta * MatrixXd::Identity(n, n);
  }
  VectorXd y = VectorXd::Zero(m);

  Workspace ws;
  ws.S_inv.resize(nb_);
  ws.GX.resize(nb_);
  ws.GY.resize(nb_);

  auto near_optimal = [&](const Solution& s) {
    return s.relative_gap <= set_.near_gap_tol && s.primal_residual <= set_.near_primal_tol &&
           s.dual_residual <= set_.near_dual_tol;
  };
  double best_gap = std::numeric_limits<double>::infinity();
  int stalled = 0;

  // Late iterations can lose feasibility once the Schur system needs
  // regularization; keep the best iterate that already met the near tolerances.
  struct Snapshot {
    double merit = std::numeric_limits<double>::infinity();
    Solution metrics;
    VectorXd y;
    std::vector<MatrixXd> X, S;
  } best;
  auto merit = [&](const Solution& s) {
    return std::max({s.relative_gap / set_.near_gap_tol, s.primal_residual / set_.near_primal_tol,
                     s.dual_residual / set_.near_dual_tol});
  };

  sol.status = Status::kMaxIterations;
  for (int iter = 0; iter <= set_.max_iterations; ++iter) {
    sol.iterations = iter;
    // Residuals.
    const VectorXd rp = prob_.b - op(X);
    std::vector<MatrixXd> Rd(nb_);
    double rd_norm2 = 0.0;
    double xs = 0.0;
    for (int k = 0; k < nb_; ++k) {
      Rd[k] = adjoint(k, y, true) - S[k];
      rd_norm2 += Rd[k].squaredNorm();
      xs += (X[k].cwiseProduct(S[k])).sum();
    }
    const double mu = xs / total_dim_;
    const double pobj = objective_c(X);
    const double dobj = prob_.b.dot(y);
    sol.primal_objective = pobj;
    sol.dual_objective = dobj;
    sol.primal_residual = rp.norm() / (1.0 + b_norm);
    sol.dual_residual = std::sqrt(rd_norm2) / (1.0 + c_norm);
    const double denom = 1.0 + std::abs(pobj) + std::abs(dobj);
    sol.relative_gap = std::max(std::abs(dobj - pobj), xs) / denom;
    if (set_.log != nullptr) {
      *set_.log << "iter " << iter << " pobj " << pobj << " dobj " << dobj << " gap "
                << sol.relative_gap << " pres " << sol.primal_residual << " dres "
                << sol.dual_residual << " mu " << mu << '\n';
    }
    if (sol.relative_gap <= set_.gap_tol && sol.primal_residual <= set_.feas_tol &&
        sol.dual_residual <= set_.feas_tol) {
      sol.status = Status::kOptimal;
      break;
    }
    if (near_optimal(sol) && merit(sol) < best.merit) {
      best.merit = merit(sol);
      best.metrics = sol;
      best.y = y;
      best.X = X;
      best.S = S;
    }
    if (sol.relative_gap < 0.9 * best_gap) {
      best_gap = sol.relative_gap;
      stalled = 0;
    } else if (++stalled >= set_.stall_iterations && near_optimal(sol)) {
      sol.status = Status::kNearOptimal;
      break;
    }
    if (iter == set_.max_iterations) break;

    std::vector<Eigen::LLT<MatrixXd>> chol_x(nb_), chol_s(nb_);
    bool ok = true;
    for (int k = 0; k < nb_; ++k) {
      const Block& b = prob_.blocks[k];
      chol_s[k].compute(S[k]);
      chol_x[k].compute(X[k]);
      if (chol_s[k].info() != Eigen::Success || chol_x[k].info() != Eigen::Success) {
        if (set_.log != nullptr) *set_.log << "factorization of block " << k << " failed\n";
        ok = false;
        break;
      }
      ws.S_inv[k] = chol_s[k].solve(MatrixXd::Identity(b.dim, b.dim));
      ws.S_inv[k] = sym(ws.S_inv[k]);
      ws.GX[k] = b.pool.transpose() * X[k] * b.pool;
      ws.GY[k] = b.pool.transpose() * ws.S_inv[k] * b.pool;
    }
    if (!ok) {
      sol.status = Status::kNumericalError;
      break;
    }

    const MatrixXd M = schur(ws);
    Eigen::LLT<MatrixXd> chol_m(M);
    bool regularized = false;
    const double diag_scale = std::max(1.0, M.diagonal().maxCoeff());
    for (double reg = 1e-14; chol_m.info() != Eigen::Success && reg <= 1e-6; reg *= 100.0) {
      MatrixXd shifted = M;
      shifted.diagonal().array() += reg * diag_scale;
      chol_m.compute(shifted);
      regularized = true;
    }
    if (chol_m.info() != Eigen::Success) {
      if (set_.log != nullptr) *set_.log << "Schur complement not positive definite\n";
      sol.status = Status::kNumericalError;
      break;
    }

    // Shared part of the right-hand side: -b - A(X Rd S^-1).
    std::vector<MatrixXd> XRS(nb_);
    for (int k = 0; k < nb_; ++k) XRS[k] = sym(X[k] * Rd[k] * ws.S_inv[k]);
    const VectorXd rhs_base = -prob_.b - op(XRS);

    auto direction = [&](const std::vector<MatrixXd>& T, VectorXd& dy, std::vector<MatrixXd>& dX,
                         std::vector<MatrixXd>& dS) {
      std::vector<MatrixXd> TS(nb_);
      for (int k = 0; k < nb_; ++k) TS[k] = sym(T[k] * ws.S_inv[k]);
      const VectorXd rhs = rhs_base + op(TS);
      dy = chol_m.solve(rhs);
      if (regularized) {
        for (int pass = 0; pass < 3; ++pass) dy += chol_m.solve(rhs - M * dy);
      }
      dX.resize(nb_);
      dS.resize(nb_);
      for (int k = 0; k < nb_; ++k) {
        dS[k] = adjoint(k, dy, false) + Rd[k];
        dX[k] = TS[k] - X[k] - sym(X[k] * dS[k] * ws.S_inv[k]);
      }
    };
    auto step_lengths = [&](const std::vector<MatrixXd>& dX, const std::vector<MatrixXd>& dS) {
      double ap = std::numeric_limits<double>::infinity();
      double ad = ap;
      for (int k = 0; k < nb_; ++k) {
        ap = std::min(ap, max_step(chol_x[k], dX[k]));
        ad = std::min(ad, max_step(chol_s[k], dS[k]));
      }
      return std::pair<double, double>(ap, ad);
    };

    // Predictor.
    std::vector<MatrixXd> T(nb_);
    for (int k = 0; k < nb_; ++k) T[k] = MatrixXd::Zero(prob_.blocks[k].dim, prob_.blocks[k].dim);
    VectorXd dy;
    std::vector<MatrixXd> dX, dS;
    direction(T, dy, dX, dS);
    auto [ap, ad] = step_lengths(dX, dS);
    ap = std::min(1.0, ap);
    ad = std::min(1.0, ad);
    double xs_aff = 0.0;
    for (int k = 0; k < nb_; ++k) {
      xs_aff += ((X[k] + ap * dX[k]).cwiseProduct(S[k] + ad * dS[k])).sum();
    }
    const double mu_aff = xs_aff / total_dim_;
    const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 0.0, 1.0);

    // Corrector.
    for (int k = 0; k < nb_; ++k) {
      T[k] = sigma * mu * MatrixXd::Identity(prob_.blocks[k].dim, prob_.blocks[k].dim) -
             dX[k] * dS[k];
    }
    direction(T, dy, dX, dS);
    auto [ap2, ad2] = step_lengths(dX, dS);
    ap2 = std::min(1.0, set_.step_fraction * ap2);
    ad2 = std::min(1.0, set_.step_fraction * ad2);
    for (int k = 0; k < nb_; ++k) {
      X[k] = sym(X[k] + ap2 * dX[k]);
      S[k] = sym(S[k] + ad2 * dS[k]);
    }
    y += ad2 * dy;
  }

  if (sol.status != Status::kOptimal && std::isfinite(best.merit) &&
      (!near_optimal(sol) || best.merit < merit(sol))) {
    const int iterations = sol.iterations;
    sol = best.metrics;
    sol.iterations = iterations;
    y = std::move(best.y);
    X = std::move(best.X);
    S = std::move(best.S);
    sol.status = Status::kNearOptimal;
  } else if (sol.status != Status::kOptimal && near_optimal(sol)) {
    sol.status = Status::kNearOptimal;
  }
  sol.y = y;
  sol.X = std::move(X);
  sol.S = std::move(S);
  return sol;
}

}  // namespace

const char* to_string(Status s) {
  switch (s) {
    case Status::kOptimal: return "Optimal";
    case Status::kNearOptimal: return "NearOptimal";
    case Status::kMaxIterations: return "MaxIterations";
    case Status::kNumericalError: return "NumericalError";
  }
  return "Unknown";
}

Eigen::MatrixXd dual_slack(const Block& block, const Eigen::VectorXd& y) {
  MatrixXd Z = MatrixXd::Zero(block.pool.cols(), block.pool.cols());
  for (std::size_t i = 0; i < block.a.size(); ++i) {
    for (const Term& t : block.a[i]) add_term(Z, t, y[static_cast<Eigen::Index>(i)]);
  }
  for (const Term& t : block.c) add_term(Z, t, -1.0);
  return block.pool * Z * block.pool.transpose();
}

Solution solve(const Problem& problem, const Settings& settings) {
  return Solver(problem, settings).run();
}

}  // namespace detplace::sdp
