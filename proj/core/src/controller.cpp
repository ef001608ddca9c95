#include "ftc/controller.hpp"

#include "ftc/errors.hpp"

#include <cmath>
#include <sstream>

namespace ftc {

double signed_pow(double x, double ratio) {
  if (x == 0.0) return 0.0;
  return std::copysign(std::pow(std::abs(x), ratio), x);
}

namespace {

bool odd(int k) { return k > 0 && (k % 2) == 1; }

std::string join(const std::vector<std::string>& xs) {
  std::ostringstream os;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) os << "; ";
    os << xs[i];
  }
  return os.str();
}

}  // namespace

std::vector<std::string> GFuncParams::problems() const {
  std::vector<std::string> out;
  if (!(lambda_under > 0.0)) out.emplace_back("lambda_under must be > 0");
  if (!(lambda_bar > 0.0)) out.emplace_back("lambda_bar must be > 0");
  if (!(a > 0.0 && a < 1.0)) out.emplace_back("a must lie in (0, 1)");
  if (!(b > 0.0)) out.emplace_back("b must be > 0");
  if (c <= 0 || c % 2 != 0) out.emplace_back("c must be a positive even integer");
  if (!odd(p_under) || !odd(q_under) || !odd(p_bar) || !odd(q_bar)) {
    out.emplace_back("p_under, q_under, p_bar, q_bar must be positive odd integers");
  }
  if (!(p_under > q_under)) out.emplace_back("p_under must exceed q_under");
  if (!(p_bar < q_bar)) out.emplace_back("p_bar must be less than q_bar");
  return out;
}

void GFuncParams::validate() const {
  if (auto ps = problems(); !ps.empty()) {
    throw ValidationError("g-function parameters: " + join(ps));
  }
}

std::vector<std::string> SurfaceGains::problems() const {
  std::vector<std::string> out;
  if (!(k1 > 0.0) || !(c1 > 0.0) || !(c1_bar > 0.0)) {
    out.emplace_back("k1, c1, c1_bar must be > 0");
  }
  if (!odd(p) || !odd(q) || !odd(p_bar) || !odd(q_bar)) {
    out.emplace_back("p, q, p_bar, q_bar must be positive odd integers");
  }
  if (!(p > q)) out.emplace_back("p must exceed q");
  if (!(p_bar < q_bar)) out.emplace_back("p_bar must be less than q_bar");
  return out;
}

void SurfaceGains::validate() const {
  if (auto ps = problems(); !ps.empty()) {
    throw ValidationError("surface gains: " + join(ps));
  }
}

double p_star(double x, const GFuncParams& p) {
  const double ratio = static_cast<double>(p.p_under) / p.q_under;
  const double ax = std::abs(x);
  if (ax < 1.0) return 1.0;
  if (ax > 1.0) return ratio;
  return 0.5 + 0.5 * ratio;
}

namespace {

double phi(double ax, const GFuncParams& p) {
  return p.a + (1.0 - p.a) * std::exp(-p.b * std::pow(ax, p.c));
}

}  // namespace

double g_func(double x, const GFuncParams& p) {
  const double ax = std::abs(x);
  const double r = static_cast<double>(p.p_bar) / p.q_bar;
  const double num =
      p.lambda_under * signed_pow(x, p_star(x, p)) + p.lambda_bar * signed_pow(x, r);
  return num / phi(ax, p);
}

Eigen::VectorXd g_vec(const Eigen::VectorXd& x, const GFuncParams& p) {
  return x.unaryExpr([&p](double v) { return g_func(v, p); });
}

double g_dot(double x, double xdot, const GFuncParams& p, double guard) {
  const double ax = std::abs(x);
  const double r = static_cast<double>(p.p_bar) / p.q_bar;
  const double ps = p_star(x, p);
  const double ex = std::exp(-p.b * std::pow(ax, p.c));
  const double ph = p.a + (1.0 - p.a) * ex;

  const double num =
      p.lambda_under * signed_pow(x, ps) + p.lambda_bar * signed_pow(x, r);
  const double phidot = -(1.0 - p.a) * p.b * p.c *
                        signed_pow(x, static_cast<double>(p.c - 1)) * xdot * ex;
  const double ax_g = std::max(ax, guard);
  const double slope = p.lambda_under * ps * std::pow(ax, ps - 1.0) +
                       p.lambda_bar * r * std::pow(ax_g, r - 1.0);
  return -phidot / (ph * ph) * num + slope * xdot / ph;
}

Eigen::VectorXd sliding_surface(const Eigen::VectorXd& z,
                                const Eigen::VectorXd& zdot,
                                const ControllerState& state,
                                const GFuncParams& p) {
  return zdot + g_vec(z, p) + g_vec(state.eta(z), p);
}

Eigen::VectorXd baseline_first_order(const Eigen::VectorXd& z,
                                     const Eigen::VectorXd& zdot,
                                     const GFuncParams& p) {
  return zdot + g_vec(z, p);
}

SurfaceSignals evaluate_surface(SurfaceKind kind, const TransformState& ts,
                                const ControllerState& state,
                                const GFuncParams& p, double guard) {
  const auto n = ts.z.size();
  SurfaceSignals s;
  s.g_z = g_vec(ts.z, p);
  s.eta_dot = ts.zdot + s.g_z;
  s.feedforward.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    s.feedforward(i) = g_dot(ts.z(i), ts.zdot(i), p, guard);
  }
  if (kind == SurfaceKind::FirstOrder) {
    s.sigma = s.eta_dot;
    return s;
  }
  s.eta = state.eta(ts.z);
  s.sigma = s.eta_dot + g_vec(s.eta, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    s.feedforward(i) += g_dot(s.eta(i), s.eta_dot(i), p, guard);
  }
  return s;
}

ObserverCoupling ObserverCoupling::from(const ObserverGains& gains, int n) {
  return {gains.L().topRows(n), gains.L().middleRows(n, n),
          gains.Lambda().topRows(n), gains.Lambda().middleRows(n, n)};
}

Eigen::VectorXd reaching_law(const Eigen::VectorXd& sigma,
                             const SurfaceGains& k) {
  const double r1 = static_cast<double>(k.p) / k.q;
  const double r2 = static_cast<double>(k.p_bar) / k.q_bar;
  return sigma.unaryExpr([&](double s) {
    return k.k1 * s + k.c1 * signed_pow(s, r1) + k.c1_bar * signed_pow(s, r2);
  });
}

Eigen::VectorXd control_law(const ControlContext& ctx, const TransformState& ts,
                            const SurfaceSignals& surface,
                            const SurfaceGains& gains,
                            const ObserverCoupling& cp,
                            const ManipulatorModel& model) {
  const DynamicsTerms t = dynamics_terms(model, {ctx.qhat, ctx.qdhat});

  const Eigen::VectorXd observer_terms =
      cp.L2 * ctx.ytilde + cp.L1 * ctx.ytilde_dot + cp.Lambda2 * ctx.ups +
      cp.Lambda1 * ctx.ups_dot - ctx.yd_ddot;
  const Eigen::VectorXd shaped =
      (ts.R + surface.feedforward + reaching_law(surface.sigma, gains))
          .cwiseQuotient(ts.r);

  Eigen::VectorXd u =
      t.D * ctx.qdhat + t.G - t.M * observer_terms - t.M * shaped;
  if (!u.allFinite()) {
    std::ostringstream os;
    os << "control law produced a non-finite torque (";
    if (!observer_terms.allFinite()) os << "observer channel";
    else if (!shaped.allFinite()) os << "surface channel";
    else os << "model terms";
    os << ")";
    throw NumericalError(os.str());
  }
  return u;
}

Eigen::VectorXd upsilon_dot(const Eigen::VectorXd& yt,
                            const Eigen::VectorXd& ytd, double betahat,
                            double betahat_dot, const ObserverGains& gains) {
  const double rho1 = gains.rho1();
  const double n2 = yt.squaredNorm();
  const double n2dot = 2.0 * yt.dot(ytd);
  Eigen::VectorXd out = gains.Upsilon() * ytd;

  if (std::sqrt(n2) < gains.params().sing_eps) {
    // series branch: betahat yt n2 / rho1^2
    const double k = 1.0 / (rho1 * rho1);
    out += k * (betahat_dot * n2 * yt + betahat * n2 * ytd +
                betahat * n2dot * yt);
    return out;
  }

  const double th = std::tanh(n2 / rho1);
  const double t2 = th * th;
  const double theta1 = 2.0 / rho1 * n2 * th * (1.0 - t2) * n2dot;
  const double theta2 = t2 * n2dot;
  const double psi = (theta1 - theta2) / (n2 * n2);
  out += betahat_dot * (t2 / n2) * yt + betahat * (t2 / n2) * ytd +
         betahat * psi * yt;
  return out;
}

double settling_time_bound(const GFuncParams& p) {
  const double pu = p.p_under, qu = p.q_under, pb = p.p_bar, qb = p.q_bar;
  return qu / (p.lambda_under * (pu - qu)) +
         qb / (qb - pb) / p.lambda_under *
             std::log(1.0 + p.lambda_under / p.lambda_bar);
}

double sigma_settling_bound(const SurfaceGains& k, int n) {
  const double beta = (k.p + k.q) / (2.0 * k.q);
  const double beta_bar = (k.p_bar + k.q_bar) / (2.0 * k.q_bar);
  const double alpha_sigma = std::pow(2.0, beta) * std::pow(n, 1.0 - beta);
  const double alpha_sigma_bar = std::pow(2.0, beta_bar);
  const double a_nu = k.c1 * alpha_sigma;
  const double a_nu_bar = k.c1_bar * alpha_sigma_bar;
  return 1.0 / (a_nu_bar * (1.0 - beta_bar)) + 1.0 / (a_nu * (beta - 1.0));
}

}  // namespace ftc
