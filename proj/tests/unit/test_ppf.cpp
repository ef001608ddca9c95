#include "ftc/errors.hpp"
#include "ftc/ppf.hpp"

#include "gen.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace ftc;

namespace {

Eigen::VectorXd v1(double x) { return Eigen::VectorXd::Constant(1, x); }

}  // namespace

TEST(Funnel, Values) {
  const FunnelParams p{5.0, 2.0, 0.1};
  EXPECT_EQ(mu(0.0, p).mu, 5.0);
  EXPECT_NEAR(mu(10.0, p).mu, 3.103638323514327, 1e-15);
  EXPECT_NEAR(mu(1e4, p).mu, 2.0, 1e-15);
  EXPECT_NEAR(mu(1e4, p).dmu, 0.0, 1e-15);
}

TEST(Funnel, StrictlyDecreasingAboveFloor) {
  gen::for_all(2000, 41, [](gen::Gen& g, int) {
    const double inf = g.uniform(0.001, 1.0);
    const FunnelParams p{inf + g.uniform(0.01, 5.0), inf, g.uniform(0.05, 10.0)};
    const double t = g.uniform(0.0, 20.0 / p.l);
    ASSERT_LT(mu(t + 0.01, p).mu, mu(t, p).mu);
    ASSERT_GT(mu(t, p).mu, inf);
    ASSERT_LT(mu(t, p).dmu, 0.0);
  });
}

TEST(Funnel, InvalidParametersRejected) {
  EXPECT_THROW((FunnelParams{1.0, 1.0, 1.0}.validate()), ValidationError);
  EXPECT_THROW((FunnelParams{1.0, 0.0, 1.0}.validate()), ValidationError);
  EXPECT_THROW((FunnelParams{1.0, 0.1, 0.0}.validate()), ValidationError);
}

TEST(Transform, ClosedFormPoints) {
  EXPECT_EQ(transform_z(v1(0.0), v1(2.0))(0), 0.0);
  EXPECT_NEAR(transform_z(v1(1.0), v1(2.0))(0), 0.5 * std::log(3.0), 1e-15);
}

TEST(Transform, MonotoneBlowUpNearBoundary) {
  double prev = 0.0;
  for (double w : {0.9, 0.99, 0.999, 0.9999, 0.99999999}) {
    const double z = transform_z(v1(w), v1(1.0))(0);
    EXPECT_GT(z, prev);
    prev = z;
  }
  EXPECT_GT(prev, 9.0);
}

TEST(Transform, ViolationCarriesJointAndTime) {
  Eigen::VectorXd e(2), m(2);
  e << 0.1, -1.1;
  m << 1.0, 1.0;
  try {
    transform_z(e, m, 7.5);
    FAIL() << "expected a funnel violation";
  } catch (const FunnelViolation& v) {
    EXPECT_EQ(v.joint(), 1);
    EXPECT_EQ(v.time(), 7.5);
  }
  EXPECT_THROW(transform_z(v1(1.0), v1(1.0)), FunnelViolation);
}

TEST(Transform, RoundTrip) {
  gen::for_all(10000, 42, [](gen::Gen& g, int) {
    const double m = g.uniform(0.01, 5.0);
    const double e = m * g.uniform(-0.999, 0.999);
    const double z = transform_z(v1(e), v1(m))(0);
    ASSERT_LE(std::abs(std::tanh(z) * m - e), 1e-10 * std::max(std::abs(e), 1e-12));
    ASSERT_LE(std::abs(e), m * std::tanh(std::abs(z)) * (1 + 1e-12));
  });
}

TEST(TransformDerivatives, ZeroError) {
  const std::vector<FunnelParams> fp(2, FunnelParams{2.0, 0.3, 2.0});
  const auto ts = transform_derivatives(Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2),
                                        funnel_at(1.0, fp));
  EXPECT_TRUE(ts.zdot.isZero());
  EXPECT_TRUE(ts.R.isZero());
}

TEST(TransformDerivatives, ZdotMatchesFiniteDifference) {
  gen::for_all(300, 43, [](gen::Gen& g, int) {
    const std::vector<FunnelParams> fp = {FunnelParams{g.uniform(1.0, 5.0), 0.2, g.uniform(0.1, 3.0)}};
    const double a = g.uniform(-0.15, 0.15), w = g.uniform(0.2, 4.0), ph = g.uniform(0, 3);
    auto e_of = [&](double t) { return a * std::sin(w * t + ph); };
    const double t = g.uniform(0.0, 5.0), h = 1e-5;
    auto z_of = [&](double s) { return transform_z(v1(e_of(s)), funnel_at(s, fp).mu)(0); };
    const auto ts = transform_derivatives(v1(e_of(t)), v1(a * w * std::cos(w * t + ph)),
                                          funnel_at(t, fp), t);
    const double fd = (z_of(t + h) - z_of(t - h)) / (2 * h);
    ASSERT_LE(std::abs(fd - ts.zdot(0)), 1e-4 * std::max(std::abs(ts.zdot(0)), 1e-3));
  });
}

TEST(TransformDerivatives, ZddotIdentity) {
  // zddot = R + r eddot checked against a second difference of z
  const std::vector<FunnelParams> fp = {FunnelParams{2.0, 0.3, 1.0}};
  auto e_of = [](double t) { return 0.2 * std::sin(1.7 * t); };
  auto ed_of = [](double t) { return 0.34 * std::cos(1.7 * t); };
  auto edd_of = [](double t) { return -0.578 * std::sin(1.7 * t); };
  auto z_of = [&](double s) { return transform_z(v1(e_of(s)), funnel_at(s, fp).mu)(0); };
  const double h = 1e-4;
  for (double t : {0.3, 1.1, 2.4}) {
    const auto ts = transform_derivatives(v1(e_of(t)), v1(ed_of(t)), funnel_at(t, fp), t);
    const double zdd = ts.R(0) + ts.r(0) * edd_of(t);
    const double fd = (z_of(t + h) - 2 * z_of(t) + z_of(t - h)) / (h * h);
    EXPECT_NEAR(fd, zdd, 1e-5 * (1 + std::abs(zdd)));
  }
}
