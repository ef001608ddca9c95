#pragma once

#include "ftc/manipulator.hpp"
#include "ftc/observer.hpp"
#include "ftc/ppf.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace ftc {

/// sgn(x) |x|^ratio, the real odd root for odd-over-odd ratios.
double signed_pow(double x, double ratio);

/// Parameters of
///   g(x) = (lambda_under sgn(x)|x|^p* + lambda_bar sgn(x)|x|^(p_bar/q_bar))
///          / (a + (1 - a) exp(-b |x|^c))
/// where p* = 1 inside the unit interval and p_under/q_under outside it.
struct GFuncParams {
  double lambda_under = 1.0;
  double lambda_bar = 2.0;
  double a = 0.7;
  double b = 1.0;
  int c = 2;
  int p_under = 25, q_under = 23;
  int p_bar = 23, q_bar = 25;

  /// Human-readable problems; empty when the set is admissible.
  std::vector<std::string> problems() const;
  void validate() const;  // throws ValidationError listing problems()
};

/// Reaching-law gains k1 s + c1 s^(p/q) + c1_bar s^(p_bar/q_bar).
struct SurfaceGains {
  double k1 = 10.0;
  double c1 = 10.0;
  double c1_bar = 10.0;
  int p = 25, q = 23;
  int p_bar = 23, q_bar = 25;

  std::vector<std::string> problems() const;
  void validate() const;
};

/// Integral of g(z) since t = 0; eta = z + integral.
struct ControllerState {
  Eigen::VectorXd integral;

  static ControllerState zero(int n) {
    return {Eigen::VectorXd::Zero(n)};
  }
  Eigen::VectorXd eta(const Eigen::VectorXd& z) const { return z + integral; }
};

double p_star(double x, const GFuncParams& p);
double g_func(double x, const GFuncParams& p);
Eigen::VectorXd g_vec(const Eigen::VectorXd& x, const GFuncParams& p);

/// Default magnitude below which the |x|^(p_bar/q_bar - 1) factor of g_dot
/// is frozen at its value at the threshold.
inline constexpr double kGDotGuard = 1e-6;

/// d/dt g(x(t)) given xdot, with p* piecewise constant.
double g_dot(double x, double xdot, const GFuncParams& p,
             double guard = kGDotGuard);

/// sigma = zdot + g(z) + g(eta), eta = z + integral
Eigen::VectorXd sliding_surface(const Eigen::VectorXd& z,
                                const Eigen::VectorXd& zdot,
                                const ControllerState& state,
                                const GFuncParams& p);

/// First-order comparison surface zdot + g(z).
Eigen::VectorXd baseline_first_order(const Eigen::VectorXd& z,
                                     const Eigen::VectorXd& zdot,
                                     const GFuncParams& p);

enum class SurfaceKind { SecondOrder, FirstOrder };

/// Surface value and the g_dot feed-forward that cancels its drift.
struct SurfaceSignals {
  Eigen::VectorXd sigma;
  Eigen::VectorXd eta;          // empty for the first-order surface
  Eigen::VectorXd eta_dot;      // zdot + g(z)
  Eigen::VectorXd feedforward;  // g_dot(z) [+ g_dot(eta)]
  Eigen::VectorXd g_z;          // integrand of the controller state
};

SurfaceSignals evaluate_surface(SurfaceKind kind, const TransformState& ts,
                                const ControllerState& state,
                                const GFuncParams& p,
                                double guard = kGDotGuard);

/// Block rows (q, qd) of the observer gain L and the coupling Lambda.
struct ObserverCoupling {
  Eigen::MatrixXd L1, L2, Lambda1, Lambda2;

  static ObserverCoupling from(const ObserverGains& gains, int n);
};

/// Estimate-side quantities the control law consumes.
struct ControlContext {
  Eigen::VectorXd qhat, qdhat;
  Eigen::VectorXd ytilde, ytilde_dot;
  Eigen::VectorXd ups, ups_dot;
  Eigen::VectorXd yd_ddot;
};

/// Reaching law k1 s + c1 sgn(s)|s|^(p/q) + c1_bar sgn(s)|s|^(p_bar/q_bar).
Eigen::VectorXd reaching_law(const Eigen::VectorXd& sigma,
                             const SurfaceGains& k);

/// u = D qdhat + G - M (L2 yt + L1 yt_dot + Lam2 ups + Lam1 ups_dot - yd_ddot)
///       - M r^-1 (R + feedforward + reaching_law(sigma)),
/// with M, D, G evaluated at the estimate. Throws NumericalError on
/// non-finite input or output.
Eigen::VectorXd control_law(const ControlContext& ctx, const TransformState& ts,
                            const SurfaceSignals& surface,
                            const SurfaceGains& gains,
                            const ObserverCoupling& coupling,
                            const ManipulatorModel& model);

/// Time derivative of upsilon() along (ytilde, ytilde_dot, betahat,
/// betahat_dot), with the same small-norm series branch.
Eigen::VectorXd upsilon_dot(const Eigen::VectorXd& ytilde,
                            const Eigen::VectorXd& ytilde_dot, double betahat,
                            double betahat_dot, const ObserverGains& gains);

/// Initial-condition independent bound on the time for xdot = -g(x) to
/// reach the origin:
///   q_under / (lambda_under (p_under - q_under))
///     + q_bar / (q_bar - p_bar) * ln(1 + lambda_under / lambda_bar) /
///     lambda_under
double settling_time_bound(const GFuncParams& p);

/// Bound on the time for sigma to reach zero under the reaching law, from
/// V2dot <= -alpha V2^beta - alpha_bar V2^beta_bar (the k1 term only helps).
double sigma_settling_bound(const SurfaceGains& k, int n);

}  // namespace ftc
