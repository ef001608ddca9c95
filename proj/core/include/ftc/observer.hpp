#pragma once

#include "ftc/manipulator.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace ftc {

/// Plant (q, qd) augmented with the virtual-actuator filter state x_v:
///
///   A_a = [ A        0   ]   E_a = [ 0     ]   C_a = [ 0  I_n ]
///         [ A_v C   -A_v ]         [ A_v E ]
///
/// with A = [0 I; 0 0] and C = [I 0]. The filter converts the sensor fault
/// E f into an input-channel fault of the 3n-state system.
struct AugmentedSystem {
  int n = 0;
  int m = 0;
  Eigen::MatrixXd A_a;
  Eigen::MatrixXd E_a;
  Eigen::MatrixXd C_a;
  Eigen::MatrixXd A_v;
  Eigen::MatrixXd E;
};

/// Throws ValidationError if -A_v is not Hurwitz or (A_a, C_a) is not
/// observable, DimensionError on inconsistent shapes.
AugmentedSystem build_augmented(int n, int m, const Eigen::MatrixXd& A_v,
                                const Eigen::MatrixXd& E);

/// Rank of the observability matrix of (A/s, C) with s = ||A||_2. The scaling
/// leaves the rank unchanged and keeps the Krylov rows comparable in size.
int observability_rank(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C,
                       double rel_tol = 1e-10);

/// True when every eigenvalue of -A has negative real part.
bool negated_is_hurwitz(const Eigen::MatrixXd& A);

struct ObserverGainParams {
  Eigen::MatrixXd L;        // 3n x n
  Eigen::MatrixXd P;        // 3n x 3n, SPD
  Eigen::MatrixXd Gamma;    // m x m, SPD
  Eigen::MatrixXd gamma;    // m x m, SPD
  Eigen::MatrixXd Upsilon;  // n x n, SPD
  double rho1 = 1.0;
  double rho2 = 1.0;
  double kappa = 0.0;  // Lipschitz constant of H; analysis only
  double c1 = 1.0;     // analysis constants for the Q1/Q2 report
  double c2 = 1.0;
  double sing_eps = 1e-8;
};

/// Validated observer gains with the coupling Lambda = P^-1 C_a^T.
class ObserverGains {
 public:
  ObserverGains(const AugmentedSystem& aug, ObserverGainParams params);

  const ObserverGainParams& params() const { return p_; }
  const Eigen::MatrixXd& L() const { return p_.L; }
  const Eigen::MatrixXd& P() const { return p_.P; }
  const Eigen::MatrixXd& Gamma() const { return p_.Gamma; }
  const Eigen::MatrixXd& gamma() const { return p_.gamma; }
  const Eigen::MatrixXd& Upsilon() const { return p_.Upsilon; }
  const Eigen::MatrixXd& Lambda() const { return Lambda_; }
  double rho1() const { return p_.rho1; }
  double rho2() const { return p_.rho2; }

  /// ||P Lambda - C_a^T||_max.
  double lambda_residual() const { return lambda_residual_; }

 private:
  ObserverGainParams p_;
  Eigen::MatrixXd Lambda_;
  double lambda_residual_ = 0.0;
};

struct ObserverState {
  Eigen::VectorXd xhat_a;  // (qhat, qdhat, xvhat), 3n
  Eigen::VectorXd pihat;   // m
  double betahat = 0.0;
  Eigen::VectorXd x_v;  // plant-side filter state, n

  static ObserverState zero(int n, int m);
  Eigen::VectorXd xhat_v() const;
};

struct FaultEstimate {
  Eigen::VectorXd dhat;      // m
  Eigen::VectorXd fhat;      // gamma * dhat
  Eigen::VectorXd ytilde;    // x_v - xhat_v
};

struct ObserverDerivative {
  Eigen::VectorXd xhat_a;
  Eigen::VectorXd pihat;
  double betahat = 0.0;
  Eigen::VectorXd x_v;
};

/// xv_dot = -A_v x_v + A_v y_f
Eigen::VectorXd virtual_filter_rhs(const Eigen::VectorXd& x_v,
                                   const Eigen::VectorXd& y_f,
                                   const Eigen::MatrixXd& A_v);

/// The robust term Upsilon ytilde + betahat ytilde tanh^2(|ytilde|^2/rho1)
/// / |ytilde|^2. Below gains.sing_eps the second term is replaced by its
/// leading series betahat ytilde |ytilde|^2 / rho1^2.
Eigen::VectorXd upsilon(const Eigen::VectorXd& ytilde, double betahat,
                        const ObserverGains& gains);

FaultEstimate fault_estimate(const ObserverState& state,
                             const AugmentedSystem& aug,
                             const ObserverGains& gains);

/// Rate of the output error ytilde = x_v - xhat_v. Independent of the
/// control input, so the controller can use it before u is formed.
Eigen::VectorXd innovation_rate(const ObserverState& state,
                                const Eigen::VectorXd& y_f,
                                const AugmentedSystem& aug,
                                const ObserverGains& gains);

/// Time derivatives of the observer estimate, both adaptation laws and the
/// plant-side filter.
ObserverDerivative observer_rhs(const ObserverState& state,
                                const Eigen::VectorXd& y_f,
                                const Eigen::VectorXd& u,
                                const AugmentedSystem& aug,
                                const ObserverGains& gains,
                                const ManipulatorModel& model);

struct GainConditionReport {
  Eigen::MatrixXd Q1;  // symmetrized, 3n x 3n
  Eigen::MatrixXd Q2;  // symmetrized, m x m
  double q1_min_eig = 0.0;
  double q2_min_eig = 0.0;
  bool q1_positive = false;
  bool q2_positive = false;
  bool rho2_positive = false;
  double lambda_residual = 0.0;
  bool pass() const { return q1_positive && q2_positive && rho2_positive; }
};

/// Assembles the two matrices whose positivity yields ultimate boundedness
/// of the estimation error and reports their smallest eigenvalues.
GainConditionReport validate_gain_conditions(const AugmentedSystem& aug,
                                             const ObserverGains& gains);

/// sqrt(max(V1_0, delta/alpha) / lambda_min(P)); throws ValidationError
/// for a non-SPD P or alpha <= 0.
double ultimate_bound(double V1_0, double alpha, double delta,
                      const Eigen::MatrixXd& P);

/// Additive constant of V1dot <= -alpha V1 + delta. Branches on
/// |ytilde| against 0.8814 rho1 as printed for the estimate.
double bound_delta(double ytilde_norm, double beta, double rho1, double rho2);

/// min(lmin(Q1)/lmax(P), 2 lmin(Q2)/lmax(Gamma^-1), rho2)
double decay_rate_alpha(const GainConditionReport& report,
                        const ObserverGains& gains);

/// V1 = xt' P xt + 0.5 pt' Gamma^-1 pt + 0.5 bt^2
double lyapunov_v1(const Eigen::VectorXd& xtilde_a,
                   const Eigen::VectorXd& pitilde, double betatilde,
                   const ObserverGains& gains);

/// Estimate of the Lipschitz constant of H(x, u) in x: the largest spectral
/// norm of a central-difference Jacobian over `samples` uniform draws of
/// x = (q, qd) in the box |q_i| <= q_max, |qd_i| <= qd_max and
/// |u_i| <= u_max.
double estimate_lipschitz(const ManipulatorModel& model, double q_max,
                          double qd_max, double u_max, int samples,
                          unsigned seed = 7);

}  // namespace ftc
