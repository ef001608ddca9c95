#include "ftc/errors.hpp"
#include "ftc/observer.hpp"
#include "ftc/presets.hpp"

#include "gen.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace ftc;

namespace {

struct Rig {
  Scenario sc;
  AugmentedSystem aug;
  ObserverGains gains;

  explicit Rig(const std::string& name)
      : sc(preset(name)),
        aug(build_augmented(sc.dof(), sc.fault_channels(), sc.A_v, sc.sensor.E)),
        gains(aug, sc.observer) {}
};

}  // namespace

TEST(Augmented, TwoLinkBlocks) {
  const Rig s("example1");
  const auto& A = s.aug.A_a;
  ASSERT_EQ(A.rows(), 6);
  EXPECT_TRUE(A.block(0, 2, 2, 2).isIdentity());
  EXPECT_TRUE(A.block(0, 0, 2, 2).isZero());
  EXPECT_TRUE(A.block(4, 4, 2, 2).isApprox(-s.sc.A_v));
  EXPECT_TRUE(A.block(4, 0, 2, 2).isApprox(s.sc.A_v));
  EXPECT_EQ(observability_rank(A, s.aug.C_a), 6);
  EXPECT_DOUBLE_EQ(s.aug.E_a(4, 0), 20.0);
  EXPECT_DOUBLE_EQ(s.aug.E_a(5, 0), 0.1);
}

TEST(Augmented, SolarTrackerFullRank) {
  const Rig s("example2");
  EXPECT_EQ(observability_rank(s.aug.A_a, s.aug.C_a), 9);
}

TEST(Augmented, RejectsNonHurwitzFilter) {
  EXPECT_THROW(build_augmented(2, 1, Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Ones(2, 1)),
               ValidationError);
  EXPECT_THROW(build_augmented(2, 1, Eigen::MatrixXd::Identity(3, 3), Eigen::MatrixXd::Ones(2, 1)),
               DimensionError);
}

TEST(Augmented, OutputIsFilterState) {
  const Rig s("example2");
  gen::for_all(200, 31, [&](gen::Gen& g, int) {
    const Eigen::VectorXd x = g.vec(9, -5, 5);
    ASSERT_EQ(s.aug.C_a * x, x.tail(3));
  });
}

TEST(Gains, LambdaResidual) {
  EXPECT_LE(Rig("example1").gains.lambda_residual(), 1e-10);
  EXPECT_LE(Rig("example2").gains.lambda_residual(), 1e-10);
}

TEST(Gains, RejectsIndefiniteP) {
  Scenario sc = preset("example1");
  sc.observer.P = -sc.observer.P;
  const auto aug = build_augmented(2, 1, sc.A_v, sc.sensor.E);
  EXPECT_THROW(ObserverGains(aug, sc.observer), ValidationError);
}

TEST(VirtualFilter, EquilibriumAndDecay) {
  const Eigen::MatrixXd Av = 100.0 * Eigen::MatrixXd::Identity(3, 3);
  const Eigen::VectorXd y = Eigen::VectorXd::Constant(3, 0.7);
  EXPECT_TRUE(virtual_filter_rhs(y, y, Av).isZero());
  const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(3, 2.0);
  EXPECT_TRUE(virtual_filter_rhs(x0, Eigen::VectorXd::Zero(3), Av).isApprox(-Av * x0));
}

TEST(VirtualFilter, ConstantInputClosedForm) {
  Eigen::MatrixXd Av(2, 2);
  Av << 20.0, 0.1, 0.1, 20.0;
  Eigen::VectorXd x(2), y(2);
  x << 1.0, -0.5;
  y << 0.3, 0.2;
  const Eigen::VectorXd x0 = x;
  const double h = 1e-3, T = 0.3;
  for (int k = 0; k < 300; ++k) {
    const Eigen::VectorXd k1 = virtual_filter_rhs(x, y, Av);
    const Eigen::VectorXd k2 = virtual_filter_rhs(x + 0.5 * h * k1, y, Av);
    const Eigen::VectorXd k3 = virtual_filter_rhs(x + 0.5 * h * k2, y, Av);
    const Eigen::VectorXd k4 = virtual_filter_rhs(x + h * k3, y, Av);
    x += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Av);
  const Eigen::MatrixXd expA = es.eigenvectors() *
                               (-T * es.eigenvalues().array()).exp().matrix().asDiagonal() *
                               es.eigenvectors().transpose();
  const Eigen::VectorXd exact = y + expA * (x0 - y);
  EXPECT_LT((x - exact).norm(), 1e-9);
}

TEST(Upsilon, ZeroAndLinearCases) {
  Rig s("example1");
  EXPECT_TRUE(upsilon(Eigen::VectorXd::Zero(2), 3.0, s.gains).isZero());
  Eigen::VectorXd y(2);
  y << 0.3, -0.1;
  EXPECT_TRUE(upsilon(y, 0.0, s.gains).isApprox(y));
}

TEST(Upsilon, SaturatedRegime) {
  Rig s("example2");
  Eigen::VectorXd y(3);
  y << 2.0, -1.0, 0.5;
  const double beta = 0.7;
  const Eigen::VectorXd expect = 300.0 * y + beta * y / y.squaredNorm();
  EXPECT_LT((upsilon(y, beta, s.gains) - expect).norm(), 1e-12 * expect.norm());
}

TEST(Upsilon, SeriesBranchContinuous) {
  Rig s("example2");
  const double eps = s.gains.params().sing_eps;
  Eigen::VectorXd d(3);
  d << 1.0, 2.0, -2.0;
  d /= d.norm();
  const Eigen::VectorXd below = upsilon(d * eps * (1 - 1e-9), 2.0, s.gains);
  const Eigen::VectorXd above = upsilon(d * eps * (1 + 1e-9), 2.0, s.gains);
  EXPECT_LT((below - above).norm(), 1e-12);
}

TEST(FaultEstimate, HandValue) {
  Rig s("example1");
  ObserverState st = ObserverState::zero(2, 1);
  EXPECT_TRUE(fault_estimate(st, s.aug, s.gains).fhat.isZero());
  st.xhat_a.tail(2) << 2.0, 7.0;
  st.pihat(0) = 0.1;
  const auto est = fault_estimate(st, s.aug, s.gains);
  EXPECT_NEAR(est.dhat(0), 0.2, 1e-15);
  EXPECT_NEAR(est.fhat(0), 0.2, 1e-15);
}

TEST(FaultEstimate, Superposition) {
  Rig s("example2");
  gen::for_all(500, 32, [&](gen::Gen& g, int) {
    ObserverState a = ObserverState::zero(3, 3), b = a, sum = a;
    a.xhat_a = g.vec(9, -3, 3);
    a.pihat = g.vec(3, -3, 3);
    b.xhat_a = g.vec(9, -3, 3);
    b.pihat = g.vec(3, -3, 3);
    sum.xhat_a = a.xhat_a + b.xhat_a;
    sum.pihat = a.pihat + b.pihat;
    const auto fa = fault_estimate(a, s.aug, s.gains).fhat;
    const auto fb = fault_estimate(b, s.aug, s.gains).fhat;
    ASSERT_LT((fault_estimate(sum, s.aug, s.gains).fhat - fa - fb).norm(), 1e-12);
  });
}

TEST(ObserverRhs, BetaDecaysWithoutInnovation) {
  Rig s("example2");
  const auto model = s.sc.model.build();
  ObserverState st = ObserverState::zero(3, 3);
  st.betahat = 4.0;
  const Eigen::VectorXd q = st.xhat_a.head(3);
  const Eigen::VectorXd u = dynamics_terms(*model, {q, Eigen::VectorXd::Zero(3)}).G;
  const auto d = observer_rhs(st, q, u, s.aug, s.gains, *model);
  EXPECT_DOUBLE_EQ(d.betahat, -s.gains.rho2() * 4.0);
  EXPECT_LT(d.xhat_a.norm(), 1e-12);
  EXPECT_LT(d.pihat.norm(), 1e-12);
}

TEST(ObserverRhs, InnovationRateMatchesDifference) {
  Rig s("example2");
  const auto model = s.sc.model.build();
  gen::for_all(50, 33, [&](gen::Gen& g, int) {
    ObserverState st = ObserverState::zero(3, 3);
    st.xhat_a = g.vec(9, -0.5, 0.5);
    st.pihat = g.vec(3, -0.1, 0.1);
    st.betahat = g.uniform(0, 2);
    st.x_v = g.vec(3, -0.5, 0.5);
    const Eigen::VectorXd yf = g.vec(3, -0.5, 0.5);
    const Eigen::VectorXd u = g.vec(3, -50, 50);
    const auto d = observer_rhs(st, yf, u, s.aug, s.gains, *model);
    const Eigen::VectorXd expect = d.x_v - d.xhat_a.tail(3);
    ASSERT_LT((innovation_rate(st, yf, s.aug, s.gains) - expect).norm(),
              1e-9 * (1.0 + expect.norm()));
  });
}

TEST(ObserverRhs, RejectsNonFiniteState) {
  Rig s("example1");
  const auto model = s.sc.model.build();
  ObserverState st = ObserverState::zero(2, 1);
  st.xhat_a(0) = std::nan("");
  EXPECT_THROW(observer_rhs(st, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2), s.aug,
                            s.gains, *model),
               NumericalError);
}

TEST(GainConditions, UnstabilizedGainsFail) {
  const auto aug = build_augmented(2, 1, preset("example1").A_v, preset("example1").sensor.E);
  ObserverGainParams p = preset("example1").observer;
  p.L = Eigen::MatrixXd::Zero(6, 2);
  p.P = Eigen::MatrixXd::Identity(6, 6);
  p.kappa = 10.0;
  const auto rep = validate_gain_conditions(aug, ObserverGains(aug, p));
  EXPECT_FALSE(rep.q1_positive);
  EXPECT_FALSE(rep.pass());
}

TEST(GainConditions, ZeroFaultDirectionReducesQ2) {
  const auto aug = build_augmented(2, 1, preset("example1").A_v, Eigen::MatrixXd::Zero(2, 1));
  const ObserverGains gains(aug, preset("example1").observer);
  const auto rep = validate_gain_conditions(aug, gains);
  EXPECT_NEAR(rep.Q2(0, 0), -0.5, 1e-15);
}

TEST(GainConditions, AppendixReportEmitted) {
  const Rig s("example1");
  const auto rep = validate_gain_conditions(s.aug, s.gains);
  EXPECT_EQ(rep.Q1.rows(), 6);
  EXPECT_EQ(rep.Q2.rows(), 1);
  EXPECT_TRUE(rep.Q1.isApprox(rep.Q1.transpose()));
  EXPECT_TRUE(rep.rho2_positive);
}

TEST(UltimateBound, FormulaValues) {
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(3, 3);
  EXPECT_EQ(ultimate_bound(0.0, 1.0, 0.0, I), 0.0);
  EXPECT_DOUBLE_EQ(ultimate_bound(4.0, 2.0, 2.0, I), 2.0);
  EXPECT_THROW(ultimate_bound(1.0, 0.0, 1.0, I), ValidationError);
}

TEST(Lyapunov, QuadraticForm) {
  const Rig s("example1");
  const Eigen::VectorXd x = Eigen::VectorXd::Unit(6, 0);
  Eigen::VectorXd p(1);
  p << 0.1;
  const double v = lyapunov_v1(x, p, 2.0, s.gains);
  EXPECT_NEAR(v, 5.9419 + 0.5 * 0.01 / 0.05 + 2.0, 1e-12);
}

TEST(Lipschitz, EstimateIsPositive) {
  const SolarTracker st;
  const double k = estimate_lipschitz(st, 1.0, 1.0, 10.0, 50);
  EXPECT_GT(k, 0.0);
  EXPECT_TRUE(std::isfinite(k));
}
