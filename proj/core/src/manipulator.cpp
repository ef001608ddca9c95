#include "ftc/manipulator.hpp"

#include "ftc/errors.hpp"

#include <cmath>
#include <initializer_list>
#include <string>

namespace ftc {

namespace {

void require_positive(std::initializer_list<std::pair<const char*, double>> xs,
                      const char* model) {
  for (const auto& [name, v] : xs) {
    if (!std::isfinite(v) || v <= 0.0) {
      throw ValidationError(std::string(model) + ": parameter " + name +
                            " must be finite and > 0 (got " +
                            std::to_string(v) + ")");
    }
  }
}

}  // namespace

void SolarTrackerParams::validate() const {
  require_positive({{"m1", m1},   {"m2", m2},   {"m3", m3},   {"l1", l1},
                    {"l2", l2},   {"l3", l3},   {"L1", L1},   {"L2", L2},
                    {"L3", L3},   {"Ix1", Ix1}, {"Ix2", Ix2}, {"Ix3", Ix3},
                    {"Iy1", Iy1}, {"Iy2", Iy2}, {"Iy3", Iy3}, {"Iz1", Iz1},
                    {"Iz2", Iz2}, {"Iz3", Iz3}, {"g", g}},
                   "solar_tracker");
}

void TwoLinkParams::validate() const {
  require_positive({{"m1", m1},
                    {"m2", m2},
                    {"l1", l1},
                    {"l2", l2},
                    {"lc1", lc1},
                    {"lc2", lc2},
                    {"I1", I1},
                    {"I2", I2},
                    {"g", g}},
                   "two_link");
}

SolarTracker::SolarTracker(SolarTrackerParams p) : p_(p) { p_.validate(); }

double SolarTracker::gravity_bound() const {
  return p_.g * (p_.m2 * p_.l2 + p_.m3 * (p_.l3 + p_.L2) + p_.m3 * p_.l3);
}

DynamicsTerms SolarTracker::evaluate(const Eigen::VectorXd& q,
                                     const Eigen::VectorXd& qd) const {
  const auto& p = p_;
  const double s2 = std::sin(q(1)), c2 = std::cos(q(1));
  const double s3 = std::sin(q(2)), c3 = std::cos(q(2));
  const double qd1 = qd(0), qd2 = qd(1), qd3 = qd(2);

  const double w = c3 * p.l3 + p.L2;  // recurring (c3 l3 + L2)
  const double dIxz = p.Ix3 - p.Iz3;
  const double half_yzx = 0.5 * (p.Iy3 + p.Iz3 - p.Ix3);

  DynamicsTerms t;
  t.M.setZero(3, 3);
  t.M(0, 0) = s2 * s2 * (p.m2 * p.l2 * p.l2 + p.m3 * w * w + p.Iy2 + p.Iy3) +
              p.m3 * s3 * s3 * p.l3 * p.l3 + p.Iz1 +
              c2 * c2 * (p.Iz2 + s3 * s3 * p.Ix3 + c3 * c3 * p.Iz3);
  t.M(0, 1) = s3 * c2 * (c3 * dIxz - p.m3 * p.l3 * w);
  t.M(0, 2) = s2 * (p.m3 * p.l3 * (p.l3 + c3 * p.L2) - p.Iy3);
  t.M(1, 1) = p.m2 * p.l2 * p.l2 + p.m3 * w * w + p.Ix2 + c3 * c3 * p.Ix3 +
              s3 * s3 * p.Iz3;
  t.M(2, 2) = p.m3 * p.l3 * p.l3 + p.Iy3;
  t.M(1, 0) = t.M(0, 1);
  t.M(2, 0) = t.M(0, 2);

  // Shared sub-expressions of the Coriolis/centrifugal matrix.
  const double k12 = p.m2 * p.l2 * p.l2 + p.m3 * w * w + p.Iy2 + p.Iy3 -
                     p.Iz2 - s3 * s3 * p.Ix3 - c3 * c3 * p.Iz3;
  const double a13 = s3 * c3 * (p.m3 * p.l3 * p.l3 + c2 * c2 * dIxz) -
                     s2 * s2 * (p.m3 * s3 * p.l3 * w);
  const double b23 = c3 * c3 * dIxz - p.m3 * c3 * p.l3 * w + half_yzx;
  const double s3k = s3 * (c3 * (p.Iz3 - p.Ix3) - p.m3 * p.l3 * w);

  t.D.setZero(3, 3);
  t.D(0, 0) = a13 * qd3 + s2 * c2 * k12 * qd2;
  t.D(0, 1) = s2 * c2 * k12 * qd1 -
              s2 * s3 * (c3 * dIxz - p.m3 * p.l3 * w) * qd2 +
              c2 *
                  (p.m3 * s3 * s3 * p.l3 * p.l3 + c3 * c3 * dIxz +
                   0.5 * (p.Iz3 - p.Iy3 - p.Ix3)) *
                  qd3;
  t.D(0, 2) = a13 * qd1 +
              c2 *
                  (p.m3 * s3 * s3 * p.l3 * p.l3 + c3 * c3 * dIxz +
                   0.5 * (p.Iz3 - p.Ix3 - p.Iy3)) *
                  qd2 -
              p.m3 * s2 * s3 * p.l3 * p.L2 * qd3;
  t.D(1, 0) = -s2 * c2 * k12 * qd1 + c2 * b23 * qd3;
  // Printed as "c22" in the source table; it occupies the d22 slot.
  t.D(1, 1) = s3k * qd3;
  t.D(1, 2) = c2 * b23 * qd1 + s3k * qd2;
  t.D(2, 0) = -a13 * qd1 - c2 * b23 * qd2;
  t.D(2, 1) = -c2 * b23 * qd1 - s3k * qd2;
  // d33 = 0

  t.G.resize(3);
  t.G(0) = 0.0;
  t.G(1) = -p.g * s2 * (p.m2 * p.l2 + p.m3 * w);
  t.G(2) = -p.g * p.m3 * p.l3 * s3 * c2;
  return t;
}

TwoLinkArm::TwoLinkArm(TwoLinkParams p) : p_(p) { p_.validate(); }

DynamicsTerms TwoLinkArm::evaluate(const Eigen::VectorXd& q,
                                   const Eigen::VectorXd& qd) const {
  const auto& p = p_;
  const double c1 = std::cos(q(0));
  const double s2 = std::sin(q(1)), c2 = std::cos(q(1));
  const double c12 = std::cos(q(0) + q(1));

  DynamicsTerms t;
  t.M.resize(2, 2);
  t.M(0, 0) = p.m1 * p.lc1 * p.lc1 + p.I1 +
              p.m2 * (p.l1 * p.l1 + p.lc2 * p.lc2 + 2.0 * p.l1 * p.lc2 * c2) +
              p.I2;
  t.M(0, 1) = p.m2 * (p.lc2 * p.lc2 + p.l1 * p.lc2 * c2) + p.I2;
  t.M(1, 0) = t.M(0, 1);
  t.M(1, 1) = p.m2 * p.lc2 * p.lc2 + p.I2;

  const double h = -p.m2 * p.l1 * p.lc2 * s2;
  t.D.resize(2, 2);
  t.D << h * qd(1), h * (qd(0) + qd(1)), -h * qd(0), 0.0;

  t.G.resize(2);
  t.G(0) = (p.m1 * p.lc1 + p.m2 * p.l1) * p.g * c1 + p.m2 * p.lc2 * p.g * c12;
  t.G(1) = p.m2 * p.lc2 * p.g * c12;
  return t;
}

ConstantInertiaModel::ConstantInertiaModel(Eigen::MatrixXd M)
    : M_(std::move(M)) {
  if (M_.rows() != M_.cols() || M_.rows() == 0) {
    throw DimensionError("constant inertia model: M must be square");
  }
  if ((M_ - M_.transpose()).norm() > 0.0 ||
      Eigen::LLT<Eigen::MatrixXd>(M_).info() != Eigen::Success) {
    throw ValidationError("constant inertia model: M must be SPD");
  }
}

DynamicsTerms ConstantInertiaModel::evaluate(const Eigen::VectorXd& /*q*/,
                                             const Eigen::VectorXd& qd) const {
  const auto n = M_.rows();
  return {M_, Eigen::MatrixXd::Zero(n, n), Eigen::VectorXd::Zero(qd.size())};
}

DynamicsTerms dynamics_terms(const ManipulatorModel& model,
                             const JointState& s) {
  const int n = model.dof();
  if (s.q.size() != n || s.qd.size() != n) {
    throw DimensionError(model.name() + ": expected joint state of size " +
                         std::to_string(n) + ", got q=" +
                         std::to_string(s.q.size()) +
                         " qd=" + std::to_string(s.qd.size()));
  }
  if (!s.q.allFinite() || !s.qd.allFinite()) {
    throw NumericalError(model.name() + ": non-finite joint state");
  }
  return model.evaluate(s.q, s.qd);
}

Eigen::VectorXd forward_dynamics(const ManipulatorModel& model,
                                 const JointState& s,
                                 const Eigen::VectorXd& tau,
                                 const SolveOptions& opts) {
  if (tau.size() != model.dof()) {
    throw DimensionError(model.name() + ": torque has size " +
                         std::to_string(tau.size()) + ", expected " +
                         std::to_string(model.dof()));
  }
  const DynamicsTerms t = dynamics_terms(model, s);
  const Eigen::LLT<Eigen::MatrixXd> llt(t.M);
  if (llt.info() != Eigen::Success) {
    throw NumericalError(model.name() + ": inertia matrix is not SPD");
  }
  const double rcond = llt.rcond();
  if (!(rcond * opts.condition_cap >= 1.0)) {
    throw NumericalError(model.name() +
                         ": inertia matrix condition estimate " +
                         std::to_string(1.0 / rcond) + " exceeds cap");
  }
  return llt.solve(tau - t.D * s.qd - t.G);
}

Eigen::VectorXd plant_rhs(const ManipulatorModel& model, const JointState& s,
                          const Eigen::VectorXd& tau,
                          const SolveOptions& opts) {
  const auto n = model.dof();
  Eigen::VectorXd dx(2 * n);
  dx.head(n) = s.qd;
  dx.tail(n) = forward_dynamics(model, s, tau, opts);
  return dx;
}

Eigen::MatrixXd passivity_residual(const ManipulatorModel& model,
                                   const JointState& s, double step) {
  const JointState fwd{s.q + step * s.qd, s.qd};
  const JointState bwd{s.q - step * s.qd, s.qd};
  const Eigen::MatrixXd Mdot = (dynamics_terms(model, fwd).M -
                                dynamics_terms(model, bwd).M) /
                               (2.0 * step);
  return Mdot - 2.0 * dynamics_terms(model, s).D;
}

}  // namespace ftc
