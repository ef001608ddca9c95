#include "ftc/observer.hpp"

#include "ftc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace ftc {

namespace {

Eigen::MatrixXd sym(const Eigen::MatrixXd& X) {
  return 0.5 * (X + X.transpose());
}

double min_eig_sym(const Eigen::MatrixXd& X) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym(X),
                                                        Eigen::EigenvaluesOnly)
      .eigenvalues()
      .minCoeff();
}

double max_eig_sym(const Eigen::MatrixXd& X) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym(X),
                                                        Eigen::EigenvaluesOnly)
      .eigenvalues()
      .maxCoeff();
}

void require_shape(const Eigen::MatrixXd& X, Eigen::Index rows,
                   Eigen::Index cols, const char* name) {
  if (X.rows() != rows || X.cols() != cols) {
    throw DimensionError(std::string(name) + " must be " +
                         std::to_string(rows) + "x" + std::to_string(cols) +
                         ", got " + std::to_string(X.rows()) + "x" +
                         std::to_string(X.cols()));
  }
}

void require_spd(const Eigen::MatrixXd& X, const char* name) {
  if (!X.allFinite() || (X - X.transpose()).cwiseAbs().maxCoeff() >
                            1e-9 * (1.0 + X.cwiseAbs().maxCoeff())) {
    throw ValidationError(std::string(name) + " must be symmetric");
  }
  if (Eigen::LLT<Eigen::MatrixXd>(X).info() != Eigen::Success) {
    throw ValidationError(std::string(name) + " must be positive definite");
  }
}

}  // namespace

bool negated_is_hurwitz(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols() || A.size() == 0) return false;
  const Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
  return (es.eigenvalues().real().array() > 0.0).all();
}

int observability_rank(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C,
                       double rel_tol) {
  const auto N = A.rows();
  const double scale = std::max(A.operatorNorm(), 1.0);
  const Eigen::MatrixXd As = A / scale;
  Eigen::MatrixXd O(C.rows() * N, N);
  Eigen::MatrixXd row = C;
  for (Eigen::Index k = 0; k < N; ++k) {
    O.middleRows(k * C.rows(), C.rows()) = row;
    row = row * As;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(O);
  const auto& sv = svd.singularValues();
  const double tol = rel_tol * sv(0);
  return static_cast<int>((sv.array() > tol).count());
}

AugmentedSystem build_augmented(int n, int m, const Eigen::MatrixXd& A_v,
                                const Eigen::MatrixXd& E) {
  if (n <= 0 || m <= 0) throw DimensionError("n and m must be positive");
  require_shape(A_v, n, n, "A_v");
  require_shape(E, n, m, "E");
  if (!negated_is_hurwitz(A_v)) {
    throw ValidationError("-A_v is not Hurwitz");
  }

  AugmentedSystem aug;
  aug.n = n;
  aug.m = m;
  aug.A_v = A_v;
  aug.E = E;

  aug.A_a.setZero(3 * n, 3 * n);
  aug.A_a.block(0, n, n, n).setIdentity();
  aug.A_a.block(2 * n, 0, n, n) = A_v;  // A_v C picks q
  aug.A_a.block(2 * n, 2 * n, n, n) = -A_v;

  aug.E_a.setZero(3 * n, m);
  aug.E_a.bottomRows(n) = A_v * E;

  aug.C_a.setZero(n, 3 * n);
  aug.C_a.rightCols(n).setIdentity();

  if (observability_rank(aug.A_a, aug.C_a) != 3 * n) {
    throw ValidationError("(A_a, C_a) is not observable");
  }
  return aug;
}

ObserverGains::ObserverGains(const AugmentedSystem& aug,
                             ObserverGainParams params)
    : p_(std::move(params)) {
  const int n = aug.n, m = aug.m;
  require_shape(p_.L, 3 * n, n, "L");
  require_shape(p_.P, 3 * n, 3 * n, "P");
  require_shape(p_.Gamma, m, m, "Gamma");
  require_shape(p_.gamma, m, m, "gamma");
  require_shape(p_.Upsilon, n, n, "Upsilon");
  require_spd(p_.P, "P");
  require_spd(p_.Gamma, "Gamma");
  require_spd(p_.gamma, "gamma");
  require_spd(p_.Upsilon, "Upsilon");
  if (!(p_.rho1 > 0.0) || !(p_.rho2 > 0.0)) {
    throw ValidationError("rho1 and rho2 must be > 0");
  }
  if (!(p_.kappa >= 0.0) || !(p_.c1 > 0.0) || !(p_.c2 > 0.0)) {
    throw ValidationError("kappa must be >= 0, c1 and c2 > 0");
  }
  if (!p_.L.allFinite()) throw ValidationError("L must be finite");

  Lambda_ = p_.P.llt().solve(aug.C_a.transpose());
  lambda_residual_ =
      (p_.P * Lambda_ - aug.C_a.transpose()).cwiseAbs().maxCoeff();
}

ObserverState ObserverState::zero(int n, int m) {
  return {Eigen::VectorXd::Zero(3 * n), Eigen::VectorXd::Zero(m), 0.0,
          Eigen::VectorXd::Zero(n)};
}

Eigen::VectorXd ObserverState::xhat_v() const {
  const auto n = x_v.size();
  return xhat_a.tail(n);
}

Eigen::VectorXd virtual_filter_rhs(const Eigen::VectorXd& x_v,
                                   const Eigen::VectorXd& y_f,
                                   const Eigen::MatrixXd& A_v) {
  return A_v * (y_f - x_v);
}

Eigen::VectorXd upsilon(const Eigen::VectorXd& ytilde, double betahat,
                        const ObserverGains& gains) {
  const double n2 = ytilde.squaredNorm();
  const double rho1 = gains.rho1();
  Eigen::VectorXd v = gains.Upsilon() * ytilde;
  if (std::sqrt(n2) >= gains.params().sing_eps) {
    const double th = std::tanh(n2 / rho1);
    v += betahat * (th * th / n2) * ytilde;
  } else {
    v += betahat * (n2 / (rho1 * rho1)) * ytilde;
  }
  return v;
}

FaultEstimate fault_estimate(const ObserverState& state,
                             const AugmentedSystem& aug,
                             const ObserverGains& gains) {
  FaultEstimate est;
  const Eigen::VectorXd xv_hat = state.xhat_v();
  est.dhat = state.pihat + gains.Gamma() * aug.E.transpose() * xv_hat;
  est.fhat = gains.gamma() * est.dhat;
  est.ytilde = state.x_v - xv_hat;
  return est;
}

Eigen::VectorXd innovation_rate(const ObserverState& state,
                                const Eigen::VectorXd& y_f,
                                const AugmentedSystem& aug,
                                const ObserverGains& gains) {
  const FaultEstimate est = fault_estimate(state, aug, gains);
  const Eigen::VectorXd v = upsilon(est.ytilde, state.betahat, gains);
  const Eigen::VectorXd xv_dot = virtual_filter_rhs(state.x_v, y_f, aug.A_v);
  // The output row of H_a is zero, so no model evaluation is needed.
  const Eigen::VectorXd xvhat_dot =
      aug.C_a * (aug.A_a * state.xhat_a + aug.E_a * est.fhat +
                 gains.L() * est.ytilde + gains.Lambda() * v);
  return xv_dot - xvhat_dot;
}

ObserverDerivative observer_rhs(const ObserverState& state,
                                const Eigen::VectorXd& y_f,
                                const Eigen::VectorXd& u,
                                const AugmentedSystem& aug,
                                const ObserverGains& gains,
                                const ManipulatorModel& model) {
  const int n = aug.n;
  if (state.xhat_a.size() != 3 * n || state.x_v.size() != n ||
      state.pihat.size() != aug.m || y_f.size() != n || u.size() != n) {
    throw DimensionError("observer_rhs: inconsistent dimensions");
  }
  if (!state.xhat_a.allFinite() || !state.pihat.allFinite() ||
      !std::isfinite(state.betahat) || !state.x_v.allFinite()) {
    throw NumericalError("observer_rhs: non-finite observer state");
  }

  const FaultEstimate est = fault_estimate(state, aug, gains);
  const Eigen::VectorXd v = upsilon(est.ytilde, state.betahat, gains);

  Eigen::VectorXd H_a = Eigen::VectorXd::Zero(3 * n);
  const JointState xhat{state.xhat_a.head(n), state.xhat_a.segment(n, n)};
  H_a.segment(n, n) = forward_dynamics(model, xhat, u);

  const Eigen::VectorXd model_part =
      aug.A_a * state.xhat_a + H_a + aug.E_a * est.fhat;

  ObserverDerivative d;
  d.xhat_a = model_part + gains.L() * est.ytilde + gains.Lambda() * v;
  d.pihat = -gains.Gamma() * aug.E.transpose() * (aug.C_a * model_part);
  const double th = std::tanh(est.ytilde.squaredNorm() / gains.rho1());
  d.betahat = 2.0 * th * th - gains.rho2() * state.betahat;
  d.x_v = virtual_filter_rhs(state.x_v, y_f, aug.A_v);
  return d;
}

GainConditionReport validate_gain_conditions(const AugmentedSystem& aug,
                                             const ObserverGains& gains) {
  const int N = 3 * aug.n;
  const int m = aug.m;
  const auto& p = gains.params();
  const Eigen::MatrixXd& P = gains.P();
  const Eigen::MatrixXd& E = aug.E;
  const Eigen::MatrixXd I_N = Eigen::MatrixXd::Identity(N, N);
  const Eigen::MatrixXd I_m = Eigen::MatrixXd::Identity(m, m);

  const Eigen::MatrixXd eps1 = aug.C_a.transpose() * E *
                               p.Gamma.transpose() * p.gamma.transpose() *
                               aug.E_a.transpose();
  const Eigen::MatrixXd eps2 = p.gamma.transpose() * aug.E_a.transpose();
  const Eigen::MatrixXd eps3 = E.transpose() * aug.C_a * aug.A_a;
  const Eigen::MatrixXd eps4 = E.transpose() * aug.C_a * aug.E_a * p.gamma *
                               p.Gamma * E.transpose() * aug.C_a;
  const Eigen::MatrixXd eps5 = E.transpose() * aug.C_a;

  const Eigen::MatrixXd Acl = aug.A_a - p.L * aug.C_a;

  GainConditionReport r;
  r.Q1 = -sym(Acl.transpose() * P + P * Acl + P * P +
              4.0 * p.kappa * p.kappa * I_N + 3.0 * eps1 * eps1.transpose() +
              (0.5 * p.c1 + 0.5 * p.c2) * I_N);
  r.Q2 = -sym(-E.transpose() * aug.C_a * aug.E_a +
              3.0 * eps2 * eps2.transpose() + 0.5 * I_m +
              (0.5 / p.c1) * eps3 * eps3.transpose() +
              (0.5 / p.c2) * eps4 * eps4.transpose() +
              0.25 * eps5 * eps5.transpose());
  r.q1_min_eig = min_eig_sym(r.Q1);
  r.q2_min_eig = min_eig_sym(r.Q2);
  r.q1_positive = r.q1_min_eig > 0.0;
  r.q2_positive = r.q2_min_eig > 0.0;
  r.rho2_positive = p.rho2 > 0.0;
  r.lambda_residual = gains.lambda_residual();
  return r;
}

double ultimate_bound(double V1_0, double alpha, double delta,
                      const Eigen::MatrixXd& P) {
  if (!(alpha > 0.0) || !(delta >= 0.0) || !(V1_0 >= 0.0)) {
    throw ValidationError("ultimate_bound: need alpha > 0, delta >= 0, V1 >= 0");
  }
  require_spd(P, "P");
  return std::sqrt(std::max(V1_0, delta / alpha) / min_eig_sym(P));
}

double bound_delta(double ytilde_norm, double beta, double rho1, double rho2) {
  const double base = 0.5 * rho2 * beta * beta;
  return ytilde_norm >= 0.8814 * rho1 ? base : base + beta;
}

double decay_rate_alpha(const GainConditionReport& report,
                        const ObserverGains& gains) {
  const double pmax = max_eig_sym(gains.P());
  const double ginv = max_eig_sym(gains.Gamma().inverse());
  return std::min({report.q1_min_eig / pmax, 2.0 * report.q2_min_eig / ginv,
                   gains.rho2()});
}

double lyapunov_v1(const Eigen::VectorXd& xtilde_a,
                   const Eigen::VectorXd& pitilde, double betatilde,
                   const ObserverGains& gains) {
  return xtilde_a.dot(gains.P() * xtilde_a) +
         0.5 * pitilde.dot(gains.Gamma().llt().solve(pitilde)) +
         0.5 * betatilde * betatilde;
}

double estimate_lipschitz(const ManipulatorModel& model, double q_max,
                          double qd_max, double u_max, int samples,
                          unsigned seed) {
  const int n = model.dof();
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const double h = 1e-6;

  auto H = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
    return forward_dynamics(model, {x.head(n), x.tail(n)}, u);
  };

  double kappa = 0.0;
  Eigen::MatrixXd J(n, 2 * n);  // the first block row of dH/dx is zero
  for (int s = 0; s < samples; ++s) {
    Eigen::VectorXd x(2 * n), u(n);
    for (int i = 0; i < n; ++i) {
      x(i) = q_max * unit(rng);
      x(n + i) = qd_max * unit(rng);
      u(i) = u_max * unit(rng);
    }
    for (int j = 0; j < 2 * n; ++j) {
      Eigen::VectorXd xp = x, xm = x;
      xp(j) += h;
      xm(j) -= h;
      J.col(j) = (H(xp, u) - H(xm, u)) / (2.0 * h);
    }
    kappa = std::max(kappa, J.operatorNorm());
  }
  return kappa;
}

}  // namespace ftc
