#pragma once

#include <Eigen/Dense>

#include <vector>

namespace ftc {

/// mu(t) = (mu0 - mu_inf) exp(-l t) + mu_inf
struct FunnelParams {
  double mu0 = 1.0;
  double mu_inf = 0.1;
  double l = 1.0;

  void validate() const;
};

struct FunnelValue {
  double mu = 0.0;
  double dmu = 0.0;
  double ddmu = 0.0;
};

FunnelValue mu(double t, const FunnelParams& p);

/// Per-joint funnel values at t; `joints` holds one FunnelParams per joint.
struct FunnelSample {
  Eigen::VectorXd mu, dmu, ddmu;
};
FunnelSample funnel_at(double t, const std::vector<FunnelParams>& joints);

/// Normalized error, transformed error and the diagonal factors of
///   zdot  = r (edot - s e)
///   zddot = R + r eddot
/// Diagonal matrices are stored as their diagonals.
struct TransformState {
  Eigen::VectorXd omega;
  Eigen::VectorXd z;
  Eigen::VectorXd zdot;
  Eigen::VectorXd r, rdot;
  Eigen::VectorXd s, sdot;
  Eigen::VectorXd R;
};

/// Clamp margin applied to omega before atanh.
inline constexpr double kOmegaClamp = 1e-9;

/// z = atanh(e / mu) elementwise. Throws FunnelViolation (tagged with t) when
/// any |e_i| >= mu_i.
Eigen::VectorXd transform_z(const Eigen::VectorXd& e, const Eigen::VectorXd& mu,
                            double t = 0.0);

TransformState transform_derivatives(const Eigen::VectorXd& e,
                                     const Eigen::VectorXd& edot,
                                     const FunnelSample& funnel,
                                     double t = 0.0);

}  // namespace ftc
