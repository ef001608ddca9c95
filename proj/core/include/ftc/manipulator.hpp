#pragma once

#include <Eigen/Dense>

#include <memory>
#include <string>

namespace ftc {

struct JointState {
  Eigen::VectorXd q;   // rad
  Eigen::VectorXd qd;  // rad/s
};

/// Terms of M(q) qdd + D(q, qd) qd + G(q) = tau.
struct DynamicsTerms {
  Eigen::MatrixXd M;
  Eigen::MatrixXd D;
  Eigen::VectorXd G;
};

/// Three-DOF solar tracker base. Defaults are the identified values of the
/// physical prototype (kg, m, kg*m^2, m/s^2).
struct SolarTrackerParams {
  double m1 = 27.387, m2 = 15.843, m3 = 40.53;
  double l1 = 0.07, l2 = 0.085, l3 = 0.326;
  double L1 = 0.410, L2 = 0.170, L3 = 0.5;
  double Ix1 = 0.285, Ix2 = 0.254, Ix3 = 2.161;
  double Iy1 = 0.458, Iy2 = 0.254, Iy3 = 1.949;
  double Iz1 = 0.427, Iz2 = 0.229, Iz3 = 3.341;
  double g = 9.807;

  void validate() const;
};

/// Planar two-link arm, joint angles measured from the horizontal.
/// lc1/lc2 locate each link's centre of mass from its proximal joint.
/// The defaults are a generic unit arm, not an identified robot.
struct TwoLinkParams {
  double m1 = 1.0, m2 = 1.0;
  double l1 = 1.0, l2 = 1.0;
  double lc1 = 0.5, lc2 = 0.5;
  double I1 = 1.0 / 12.0, I2 = 1.0 / 12.0;
  double g = 9.81;

  void validate() const;
};

class ManipulatorModel {
 public:
  virtual ~ManipulatorModel() = default;

  virtual int dof() const = 0;
  virtual std::string name() const = 0;

  /// Closed-form M, D, G. Callers go through dynamics_terms(), which
  /// checks dimensions first.
  virtual DynamicsTerms evaluate(const Eigen::VectorXd& q,
                                 const Eigen::VectorXd& qd) const = 0;
};

class SolarTracker final : public ManipulatorModel {
 public:
  explicit SolarTracker(SolarTrackerParams p = {});
  int dof() const override { return 3; }
  std::string name() const override { return "solar_tracker"; }
  DynamicsTerms evaluate(const Eigen::VectorXd& q,
                         const Eigen::VectorXd& qd) const override;
  const SolarTrackerParams& params() const { return p_; }

  /// Upper bound on ||G(q)|| from the triangle inequality.
  double gravity_bound() const;

 private:
  SolarTrackerParams p_;
};

class TwoLinkArm final : public ManipulatorModel {
 public:
  explicit TwoLinkArm(TwoLinkParams p = {});
  int dof() const override { return 2; }
  std::string name() const override { return "two_link"; }
  DynamicsTerms evaluate(const Eigen::VectorXd& q,
                         const Eigen::VectorXd& qd) const override;
  const TwoLinkParams& params() const { return p_; }

 private:
  TwoLinkParams p_;
};

/// Constant SPD inertia, no Coriolis coupling, no gravity. Used for energy
/// and symmetry diagnostics.
class ConstantInertiaModel final : public ManipulatorModel {
 public:
  explicit ConstantInertiaModel(Eigen::MatrixXd M);
  int dof() const override { return static_cast<int>(M_.rows()); }
  std::string name() const override { return "constant_inertia"; }
  DynamicsTerms evaluate(const Eigen::VectorXd& q,
                         const Eigen::VectorXd& qd) const override;

 private:
  Eigen::MatrixXd M_;
};

struct SolveOptions {
  double condition_cap = 1e12;
};

DynamicsTerms dynamics_terms(const ManipulatorModel& model,
                             const JointState& s);

/// qdd = M^-1 (tau - D qd - G) via Cholesky. Throws NumericalError when
/// M is not SPD or its estimated condition number exceeds the cap.
Eigen::VectorXd forward_dynamics(const ManipulatorModel& model,
                                 const JointState& s,
                                 const Eigen::VectorXd& tau,
                                 const SolveOptions& opts = {});

/// Derivative of x = (q, qd): (qd, forward_dynamics).
Eigen::VectorXd plant_rhs(const ManipulatorModel& model, const JointState& s,
                          const Eigen::VectorXd& tau,
                          const SolveOptions& opts = {});

/// Mdot - 2D at (q, qd), Mdot by central differences along qd. Informational;
/// the result is skew-symmetric only for passivity-consistent D.
Eigen::MatrixXd passivity_residual(const ManipulatorModel& model,
                                   const JointState& s, double step = 1e-6);

}  // namespace ftc
