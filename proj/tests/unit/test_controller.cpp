#include "ftc/controller.hpp"
#include "ftc/errors.hpp"
#include "ftc/presets.hpp"

#include "gen.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace ftc;

namespace {

GFuncParams appendix_b() { return preset("example1").controller.g; }

}  // namespace

TEST(SignedPow, OddRoots) {
  EXPECT_NEAR(signed_pow(-8.0, 1.0 / 3.0), -2.0, 1e-15);
  EXPECT_NEAR(signed_pow(8.0, 1.0 / 3.0), 2.0, 1e-15);
  EXPECT_EQ(signed_pow(0.0, 23.0 / 25.0), 0.0);
  gen::for_all(1000, 51, [](gen::Gen& g, int) {
    const double x = g.signed_log(1e-6, 1e6);
    ASSERT_EQ(signed_pow(-x, 25.0 / 23.0), -signed_pow(x, 25.0 / 23.0));
  });
}

TEST(PStar, Branches) {
  const GFuncParams p = appendix_b();
  EXPECT_EQ(p_star(0.5, p), 1.0);
  EXPECT_EQ(p_star(-2.0, p), 25.0 / 23.0);
  EXPECT_NEAR(p_star(1.0, p), 1.0434782608695652, 1e-16);
}

TEST(GFunc, OriginAndNearOrigin) {
  const GFuncParams p = appendix_b();
  EXPECT_EQ(g_func(0.0, p), 0.0);
  const double x = 1e-4;
  const double expect = (x + 2.0 * std::pow(x, 23.0 / 25.0)) /
                        (0.7 + 0.3 * std::exp(-x * x));
  EXPECT_NEAR(g_func(x, p), expect, 1e-15);
}

TEST(GFunc, Odd) {
  const GFuncParams p = appendix_b();
  gen::for_all(10000, 52, [&](gen::Gen& g, int) {
    const double x = g.signed_log(1e-8, 1e4);
    ASSERT_EQ(g_func(-x, p), -g_func(x, p));
  });
}

TEST(GFunc, ContinuousAtUnitMagnitude) {
  const GFuncParams p = appendix_b();
  const double below = g_func(std::nextafter(1.0, 0.0), p);
  const double above = g_func(std::nextafter(1.0, 2.0), p);
  EXPECT_LE(std::abs(above - below), 1e-9);
  EXPECT_LE(std::abs(g_func(1.0, p) - below), 1e-9);
}

TEST(GFunc, InvalidParameters) {
  GFuncParams p = appendix_b();
  p.p_under = 24;
  EXPECT_FALSE(p.problems().empty());
  EXPECT_THROW(p.validate(), ValidationError);
  p = appendix_b();
  p.a = 1.0;
  EXPECT_THROW(p.validate(), ValidationError);
  SurfaceGains k;
  k.p_bar = 27;
  EXPECT_THROW(k.validate(), ValidationError);
}

TEST(GDot, ZeroRate) {
  const GFuncParams p = appendix_b();
  for (double x : {-3.0, -0.2, 0.0, 0.7, 5.0}) EXPECT_EQ(g_dot(x, 0.0, p), 0.0);
}

TEST(GDot, FiniteDifference) {
  const GFuncParams p = appendix_b();
  gen::for_all(5000, 53, [&](gen::Gen& g, int) {
    const double x = g.uniform(-4.0, 4.0);
    if (std::abs(x) < 1e-2 || std::abs(std::abs(x) - 1.0) < 1e-2) return;
    const double xd = g.signed_log(0.1, 10.0);
    const double h = 1e-6 / std::abs(xd);
    const double fd = (g_func(x + h * xd, p) - g_func(x - h * xd, p)) / (2 * h);
    const double an = g_dot(x, xd, p);
    ASSERT_LE(std::abs(fd - an), 1e-6 * std::abs(an)) << "x=" << x;
  });
}

TEST(GDot, LargeArgumentAsymptotics) {
  const GFuncParams p = appendix_b();
  const double x = 50.0;
  const double exact = (25.0 / 23.0 * std::pow(x, 2.0 / 23.0) +
                        2.0 * 23.0 / 25.0 * std::pow(x, -2.0 / 25.0)) /
                       0.7;
  EXPECT_NEAR(g_dot(x, 1.0, p), exact, 1e-12 * exact);
  double prev = 0.0;
  for (double big : {1e2, 1e4, 1e8}) {
    const double lead = 25.0 / 23.0 * std::pow(big, 2.0 / 23.0) / 0.7;
    const double ratio = g_dot(big, 1.0, p) / lead;
    EXPECT_GT(ratio, 1.0);
    if (prev > 0.0) EXPECT_LT(ratio, prev);
    prev = ratio;
  }
}

TEST(GDot, GuardBoundsSingularFactor) {
  const GFuncParams p = appendix_b();
  const double at_guard = g_dot(kGDotGuard, 1.0, p);
  EXPECT_TRUE(std::isfinite(g_dot(0.0, 1.0, p)));
  EXPECT_NEAR(g_dot(1e-12, 1.0, p), at_guard, 1e-6 * at_guard);
}

TEST(Surface, ZeroAtOrigin) {
  const GFuncParams p = appendix_b();
  const auto s = sliding_surface(Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2),
                                 ControllerState::zero(2), p);
  EXPECT_TRUE(s.isZero());
  EXPECT_TRUE(baseline_first_order(Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2), p).isZero());
}

TEST(Surface, ComponentwiseComposition) {
  const GFuncParams p = appendix_b();
  gen::for_all(1000, 54, [&](gen::Gen& g, int) {
    const Eigen::VectorXd z = g.vec(3, -2, 2), zd = g.vec(3, -5, 5);
    ControllerState st{g.vec(3, -1, 1)};
    const auto s = sliding_surface(z, zd, st, p);
    const auto fo = baseline_first_order(z, zd, p);
    for (int i = 0; i < 3; ++i) {
      ASSERT_EQ(s(i), zd(i) + g_func(z(i), p) + g_func(z(i) + st.integral(i), p));
      ASSERT_EQ(fo(i), zd(i) + g_func(z(i), p));
    }
  });
}

TEST(Surface, OnSurfaceGivesTerminalDynamics) {
  const GFuncParams p = appendix_b();
  Eigen::VectorXd z(1);
  z << 0.4;
  Eigen::VectorXd zd = -g_vec(z, p);
  EXPECT_NEAR(sliding_surface(z, zd, {Eigen::VectorXd::Constant(1, -0.4)}, p)(0), 0.0, 1e-15);
}

TEST(Surface, FirstOrderIgnoresHistory) {
  const GFuncParams p = appendix_b();
  TransformState ts;
  ts.z = Eigen::VectorXd::Constant(2, 0.3);
  ts.zdot = Eigen::VectorXd::Constant(2, -0.1);
  const auto a = evaluate_surface(SurfaceKind::FirstOrder, ts, ControllerState::zero(2), p);
  const auto b = evaluate_surface(SurfaceKind::FirstOrder, ts, {Eigen::VectorXd::Constant(2, 9.0)}, p);
  EXPECT_EQ(a.sigma, b.sigma);
  EXPECT_EQ(a.feedforward, b.feedforward);
}

namespace {

struct LawFixture {
  Scenario sc = preset("example2");
  AugmentedSystem aug = build_augmented(3, 3, sc.A_v, sc.sensor.E);
  ObserverGains gains{aug, sc.observer};
  ObserverCoupling coupling = ObserverCoupling::from(gains, 3);
};

}  // namespace

TEST(ControlLaw, GravityCompensationAtRest) {
  LawFixture f;
  const auto model = f.sc.model.build();
  const std::vector<FunnelParams> fp(3, FunnelParams{2.0, 0.3, 2.0});
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(3);
  const auto ts = transform_derivatives(zero, zero, funnel_at(0.0, fp));
  const auto surf = evaluate_surface(SurfaceKind::SecondOrder, ts, ControllerState::zero(3),
                                     f.sc.controller.g);
  ControlContext ctx{Eigen::Vector3d(0.2, -0.5, 0.9), zero, zero, zero, zero, zero, zero};
  const Eigen::VectorXd u = control_law(ctx, ts, surf, f.sc.controller.surface, f.coupling, *model);
  const Eigen::VectorXd G = dynamics_terms(*model, {ctx.qhat, zero}).G;
  EXPECT_LT((u - G).norm(), 1e-12 * (1 + G.norm()));
}

TEST(ControlLaw, OddFeedbackOnGravityFreeModel) {
  LawFixture f;
  const ConstantInertiaModel model(Eigen::Matrix3d::Identity() * 2.0);
  const std::vector<FunnelParams> fp(3, FunnelParams{2.0, 0.3, 2.0});
  gen::for_all(200, 55, [&](gen::Gen& g, int) {
    const Eigen::VectorXd e = g.vec(3, -0.25, 0.25), ed = g.vec(3, -1, 1);
    const Eigen::VectorXd I = g.vec(3, -0.2, 0.2), ydd = g.vec(3, -1, 1);
    const Eigen::VectorXd qd = g.vec(3, -1, 1);
    const double t = g.uniform(0, 3);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(3);
    auto u_of = [&](double sgn) {
      const auto ts = transform_derivatives(sgn * e, sgn * ed, funnel_at(t, fp), t);
      const auto surf = evaluate_surface(SurfaceKind::SecondOrder, ts, {sgn * I}, f.sc.controller.g);
      ControlContext ctx{zero, sgn * qd, zero, zero, zero, zero, sgn * ydd};
      return control_law(ctx, ts, surf, f.sc.controller.surface, f.coupling, model);
    };
    const Eigen::VectorXd up = u_of(1.0), um = u_of(-1.0);
    ASSERT_LT((up + um).norm(), 1e-9 * (1 + up.norm()));
  });
}

TEST(ControlLaw, NonFiniteInputRejected) {
  LawFixture f;
  const auto model = f.sc.model.build();
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(3);
  const std::vector<FunnelParams> fp(3, FunnelParams{2.0, 0.3, 2.0});
  const auto ts = transform_derivatives(zero, zero, funnel_at(0.0, fp));
  const auto surf = evaluate_surface(SurfaceKind::SecondOrder, ts, ControllerState::zero(3),
                                     f.sc.controller.g);
  ControlContext ctx{zero, zero, zero, zero, zero, zero, zero};
  ctx.ytilde(1) = std::nan("");
  EXPECT_THROW(control_law(ctx, ts, surf, f.sc.controller.surface, f.coupling, *model),
               NumericalError);
}

TEST(ReachingLaw, OddAndZero) {
  const SurfaceGains k;
  EXPECT_TRUE(reaching_law(Eigen::VectorXd::Zero(2), k).isZero());
  Eigen::VectorXd s(2);
  s << 0.3, -2.0;
  EXPECT_EQ(reaching_law(-s, k), -reaching_law(s, k));
  EXPECT_NEAR(reaching_law(s, k)(0),
              10 * 0.3 + 10 * std::pow(0.3, 25.0 / 23.0) + 10 * std::pow(0.3, 23.0 / 25.0), 1e-14);
}

namespace {

ObserverGains example2_gains() {
  const Scenario sc = preset("example2");
  return ObserverGains(build_augmented(3, 3, sc.A_v, sc.sensor.E), sc.observer);
}

}  // namespace

TEST(UpsilonDot, ZeroAtOrigin) {
  const auto gains = example2_gains();
  EXPECT_TRUE(upsilon_dot(Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3), 1.0, 0.5, gains).isZero());
}

TEST(UpsilonDot, RadialReduction) {
  const auto gains = example2_gains();
  const double rho1 = gains.rho1();
  gen::for_all(500, 56, [&](gen::Gen& g, int) {
    Eigen::VectorXd y = g.vec(3, -1, 1);
    y *= g.uniform(0.02, 1.0) / y.norm();
    const double c = g.uniform(-3, 3), beta = g.uniform(0, 5);
    const double s = y.squaredNorm();
    const double th = std::tanh(s / rho1), sech2 = 1.0 - th * th;
    const Eigen::VectorXd expect =
        c * 300.0 * y + beta * c * y * (4.0 * th * sech2 / rho1 - th * th / s);
    const Eigen::VectorXd got = upsilon_dot(y, c * y, beta, 0.0, gains);
    ASSERT_LE((got - expect).norm(), 1e-9 * (1 + expect.norm()));
  });
}

TEST(UpsilonDot, FiniteDifferenceAlongPath) {
  const auto gains = example2_gains();
  auto y_of = [](double t) {
    return Eigen::Vector3d(0.05 * std::sin(2 * t), 0.08 * std::cos(1.3 * t), 0.02 * t - 0.03);
  };
  auto yd_of = [](double t) {
    return Eigen::Vector3d(0.1 * std::cos(2 * t), -0.104 * std::sin(1.3 * t), 0.02);
  };
  auto b_of = [](double t) { return 0.5 + 0.3 * std::sin(t); };
  const double h = 1e-5;
  for (double t = 0.0; t < 3.0; t += 0.07) {
    const Eigen::VectorXd fd =
        (upsilon(y_of(t + h), b_of(t + h), gains) - upsilon(y_of(t - h), b_of(t - h), gains)) / (2 * h);
    const Eigen::VectorXd an = upsilon_dot(y_of(t), yd_of(t), b_of(t), 0.3 * std::cos(t), gains);
    ASSERT_LE((fd - an).norm(), 1e-4 * (1 + an.norm())) << "t=" << t;
  }
}

TEST(SettlingBound, AppendixValue) {
  const double b = settling_time_bound(appendix_b());
  EXPECT_NEAR(b, 23.0 / 2.0 + 12.5 * std::log(1.5), 1e-12);
  EXPECT_NEAR(b, 16.5683, 1e-4);
}

TEST(SettlingBound, ShrinksWithGain) {
  GFuncParams p = appendix_b();
  double prev = settling_time_bound(p);
  for (double l : {10.0, 1e3, 1e6, 1e9}) {
    p.lambda_under = l;
    const double b = settling_time_bound(p);
    EXPECT_LT(b, prev);
    prev = b;
  }
  EXPECT_LT(prev, 1e-6);
}

TEST(TerminalDynamics, ScalarReachesOriginBeforeBound) {
  const GFuncParams p = appendix_b();
  const double bound = settling_time_bound(p);
  for (double x0 : {0.1, -0.1, 10.0, -10.0, 1e3, -1e3}) {
    double x = x0, t = 0.0;
    const double h = 1e-4;
    while (std::abs(x) >= 1e-3 && t < bound) {
      const double k1 = -g_func(x, p), k2 = -g_func(x + 0.5 * h * k1, p),
                   k3 = -g_func(x + 0.5 * h * k2, p), k4 = -g_func(x + h * k3, p);
      x += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
      t += h;
    }
    EXPECT_LT(std::abs(x), 1e-3) << "x0=" << x0;
    EXPECT_LT(t, bound);
  }
}

TEST(TerminalDynamics, CascadeReachesOriginBeforeBound) {
  // on sigma = 0: etadot = -g(eta), zdot = -g(z) + etadot
  const GFuncParams p = appendix_b();
  const double bound = settling_time_bound(p);
  gen::for_all(20, 57, [&](gen::Gen& g, int) {
    double c1 = g.signed_log(0.1, 1e3), c2 = g.signed_log(0.1, 1e3);
    const double h = 1e-4;
    double t = 0.0, t2 = -1.0;
    auto f = [&](double a, double b, double& da, double& db) {
      db = -g_func(b, p);
      da = -g_func(a, p) + db;
    };
    while (t < 2 * bound && (std::abs(c1) >= 1e-3 || std::abs(c2) >= 1e-3)) {
      double a1, b1, a2, b2, a3, b3, a4, b4;
      f(c1, c2, a1, b1);
      f(c1 + 0.5 * h * a1, c2 + 0.5 * h * b1, a2, b2);
      f(c1 + 0.5 * h * a2, c2 + 0.5 * h * b2, a3, b3);
      f(c1 + h * a3, c2 + h * b3, a4, b4);
      c1 += h / 6 * (a1 + 2 * a2 + 2 * a3 + a4);
      c2 += h / 6 * (b1 + 2 * b2 + 2 * b3 + b4);
      t += h;
      if (t2 < 0 && std::abs(c2) < 1e-3) t2 = t;
    }
    ASSERT_GE(t2, 0.0);
    ASSERT_LT(t2, bound);
    ASSERT_LT(t, bound);
  });
}

TEST(SigmaBound, PositiveAndFinite) {
  const SurfaceGains k;
  const double b = sigma_settling_bound(k, 3);
  EXPECT_GT(b, 0.0);
  EXPECT_TRUE(std::isfinite(b));
}
