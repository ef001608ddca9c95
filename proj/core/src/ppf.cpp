#include "ftc/ppf.hpp"

#include "ftc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ftc {

void FunnelParams::validate() const {
  if (!(mu_inf > 0.0) || !(mu0 > mu_inf) || !(l > 0.0) ||
      !std::isfinite(mu0)) {
    throw ValidationError("funnel: need mu0 > mu_inf > 0 and l > 0 (mu0=" +
                          std::to_string(mu0) +
                          ", mu_inf=" + std::to_string(mu_inf) +
                          ", l=" + std::to_string(l) + ")");
  }
}

FunnelValue mu(double t, const FunnelParams& p) {
  const double span = (p.mu0 - p.mu_inf) * std::exp(-p.l * t);
  return {span + p.mu_inf, -p.l * span, p.l * p.l * span};
}

FunnelSample funnel_at(double t, const std::vector<FunnelParams>& joints) {
  const auto n = static_cast<Eigen::Index>(joints.size());
  FunnelSample f{Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const FunnelValue v = mu(t, joints[i]);
    f.mu(i) = v.mu;
    f.dmu(i) = v.dmu;
    f.ddmu(i) = v.ddmu;
  }
  return f;
}

namespace {

Eigen::VectorXd normalized_error(const Eigen::VectorXd& e,
                                 const Eigen::VectorXd& mu, double t) {
  if (e.size() != mu.size()) {
    throw DimensionError("funnel: error and mu sizes differ");
  }
  Eigen::VectorXd omega(e.size());
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    const double w = e(i) / mu(i);
    if (!(std::abs(w) < 1.0)) {
      throw FunnelViolation(static_cast<int>(i), t, w);
    }
    omega(i) = std::clamp(w, -1.0 + kOmegaClamp, 1.0 - kOmegaClamp);
  }
  return omega;
}

}  // namespace

Eigen::VectorXd transform_z(const Eigen::VectorXd& e, const Eigen::VectorXd& mu,
                            double t) {
  return normalized_error(e, mu, t).array().atanh();
}

TransformState transform_derivatives(const Eigen::VectorXd& e,
                                     const Eigen::VectorXd& edot,
                                     const FunnelSample& f, double t) {
  TransformState ts;
  ts.omega = normalized_error(e, f.mu, t);
  ts.z = ts.omega.array().atanh();

  const auto n = e.size();
  ts.r.resize(n);
  ts.rdot.resize(n);
  ts.s.resize(n);
  ts.sdot.resize(n);
  ts.R.resize(n);
  ts.zdot.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = f.mu(i), dm = f.dmu(i), ddm = f.ddmu(i);
    const double w = ts.omega(i);
    const double one_m_w2 = 1.0 - w * w;
    const double s = dm / m;
    const double sdot = (ddm * m - dm * dm) / (m * m);
    const double v = edot(i) - s * e(i);  // mu * omega_dot
    const double wdot = v / m;
    const double den = m * one_m_w2;
    const double r = 1.0 / den;
    const double rdot = (-dm * one_m_w2 + 2.0 * m * w * wdot) / (den * den);

    ts.s(i) = s;
    ts.sdot(i) = sdot;
    ts.r(i) = r;
    ts.rdot(i) = rdot;
    ts.zdot(i) = r * v;
    ts.R(i) = rdot * v - r * (sdot * e(i) + s * edot(i));
  }
  return ts;
}

}  // namespace ftc
