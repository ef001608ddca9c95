#include "ftc/presets.hpp"

#include "ftc/errors.hpp"

namespace ftc {

Eigen::MatrixXd example1_P() {
  Eigen::MatrixXd P(6, 6);
  P << 5.9419, 0.0001, -0.6670, 0.0001, -1.9084, 0.0040,
       0.0001, 5.9419, 0.0001, -0.6670, 0.0040, -1.9084,
       -0.6670, 0.0001, 0.6044, -0.0000, -0.0265, 0.0001,
       0.0001, -0.6670, -0.0000, 0.6044, 0.0001, -0.0265,
       -1.9084, 0.0040, -0.0265, 0.0001, 4.7186, -0.0106,
       0.0040, -1.9084, 0.0001, -0.0265, -0.0106, 4.7186;
  return P;
}

Eigen::MatrixXd example1_L() {
  Eigen::MatrixXd L(6, 2);
  L << 14.1213, 0.0036,
       0.0536, 14.1214,
       15.2936, 0.0015,
       0.0626, 15.2936,
       -7.2526, -0.1340,
       0.0006, -7.2528;
  return L;
}

Eigen::MatrixXd example2_P() {
  Eigen::MatrixXd P(9, 9);
  P << 3.23637, 2.23e-19, -8.10e-17, -1.07894, -1.88e-16, 4.07e-17, -0.01348, 6.85e-17, -9.24e-17,
       2.23e-19, 3.23637, 1.18e-15, 3.68e-16, -1.07894, 3.53e-16, -6.84e-17, -0.01348, -5.63e-16,
       -8.10e-17, 1.18e-15, 3.23637, -4.51e-17, -3.99e-16, -1.07894, 9.07e-17, 5.86e-16, -0.01348,
       -1.07894, 3.68e-16, -4.51e-17, 3.237968, -3.31e-17, -2.92e-17, -0.03236, -1.35e-17, 7.44e-19,
       -1.88e-16, -1.07894, -3.99e-16, -3.31e-17, 3.237968, 9.90e-16, 3.71e-19, -0.03236, -1.45e-17,
       4.07e-17, 3.53e-16, -1.07894, -2.92e-17, 9.90e-16, 3.237968, 8.63e-19, 6.08e-18, -0.03236,
       -0.01348, -6.84e-17, 9.07e-17, -0.03236, 3.71e-19, 8.63e-19, 2.696713, -1.54e-17, -2.94e-17,
       6.85e-17, -0.01348, 5.86e-16, -1.35e-17, -0.03236, 6.08e-18, -1.54e-17, 2.696713, 2.98e-17,
       -9.24e-17, -5.63e-16, -0.01348, 7.44e-19, -1.45e-17, -0.03236, -2.94e-17, 2.98e-17, 2.696713;
  return P;
}

Eigen::MatrixXd example2_L() {
  Eigen::MatrixXd L(9, 3);
  L << 93.74817, -2.37e-15, 1.78e-15,
       -2.23e-15, 93.74817, -4.03e-14,
       1.69e-15, -4.04e-14, 93.74817,
       31.24764, -1.11e-14, 2.12e-15,
       4.98e-15, 31.24764, -1.19e-14,
       -2.50e-16, -3.27e-14, 31.24764,
       -98.6566, 2.23e-15, -3.08e-15,
       -2.16e-15, -98.6566, -2.05e-14,
       3.19e-15, 1.95e-14, -98.6566;
  return L;
}

namespace {

Scenario example1_base() {
  Scenario sc;
  sc.name = "example1";
  sc.model.kind = "two_link";
  sc.reference = {{0.5, 1.0, 0.0, 0.0}, {0.5, 1.0, 0.0, 0.0}};

  sc.sensor.E = Eigen::MatrixXd(2, 1);
  sc.sensor.E << 1.0, 0.0;
  sc.A_v = Eigen::MatrixXd(2, 2);
  sc.A_v << 20.0, 0.1, 0.1, 20.0;

  ObserverGainParams& o = sc.observer;
  o.P = example1_P();
  o.L = example1_L();
  o.Gamma = Eigen::MatrixXd::Constant(1, 1, 0.05);
  o.gamma = Eigen::MatrixXd::Constant(1, 1, 1.0);
  o.Upsilon = Eigen::MatrixXd::Identity(2, 2);
  o.rho1 = 100.0;
  o.rho2 = 0.001;
  o.kappa = 1.0;

  sc.controller.g = {1.0, 2.0, 0.7, 1.0, 2, 25, 23, 23, 25};
  sc.controller.surface = {10.0, 10.0, 10.0, 25, 23, 23, 25};
  sc.funnel.assign(2, FunnelParams{5.0, 2.0, 0.1});
  return sc;
}

Scenario example2_base() {
  Scenario sc;
  sc.name = "example2";
  sc.model.kind = "solar_tracker";
  sc.reference.assign(3, ReferenceSpec{0.5, 0.5, 0.0, 0.0});

  sc.sensor.E = Eigen::MatrixXd::Identity(3, 3);
  sc.A_v = 100.0 * Eigen::MatrixXd::Identity(3, 3);

  ObserverGainParams& o = sc.observer;
  o.P = example2_P();
  o.L = example2_L();
  o.Gamma = 0.01 * Eigen::MatrixXd::Identity(3, 3);
  o.gamma = 10.0 * Eigen::MatrixXd::Identity(3, 3);
  o.Upsilon = 300.0 * Eigen::MatrixXd::Identity(3, 3);
  o.rho1 = 0.01;
  o.rho2 = 0.01;
  o.kappa = 1.0;

  sc.controller.g = {0.01, 1.0, 0.7, 1.0, 2, 11, 9, 9, 11};
  sc.controller.surface = {1.0, 1.0, 1.0, 11, 9, 9, 11};
  sc.funnel.assign(3, FunnelParams{2.0, 0.3, 2.0});

  const double t_act = 35.0;
  for (double w : {10.0, 5.0, 7.0}) {
    sc.actuator.joints.emplace_back(t_act, fault::Sinusoid{5.0, w, 0.0, false});
  }
  return sc;
}

void set_sensor_faults(Scenario& sc, const FaultSignal& sig) {
  sc.sensor.channels.assign(static_cast<std::size_t>(sc.sensor.E.cols()), sig);
}

}  // namespace

Scenario preset(const std::string& name) {
  constexpr double t0 = 25.0;
  if (name == "example1" || name == "example1-nominal") {
    Scenario sc = example1_base();
    sc.name = name;
    if (name == "example1") {
      sc.sensor.channels = {FaultSignal(t0, fault::TanhStep{3.0, 0.2})};
    }
    return sc;
  }
  if (name.rfind("example2", 0) == 0) {
    Scenario sc = example2_base();
    sc.name = name;
    if (name == "example2") {
      set_sensor_faults(
          sc, FaultSignal(t0, fault::Composite{
                                  {FaultSignal(t0, fault::Sinusoid{0.5, 1.0, 0.0, true}),
                                   FaultSignal(t0, fault::Sinusoid{0.5, 3.5, 0.0, true})}}));
    } else if (name == "example2-offset") {
      set_sensor_faults(sc, FaultSignal(t0, fault::NoisyOffset{0.5, 0.05, sc.h, 1}));
      reseed_faults(sc, sc.seed);
    } else if (name == "example2-ramp") {
      set_sensor_faults(sc, FaultSignal(t0, fault::Ramp{0.02}));
    } else if (name == "example2-composite") {
      set_sensor_faults(
          sc, FaultSignal(t0, fault::Composite{
                                  {FaultSignal(t0, fault::Step{0.3}),
                                   FaultSignal(t0, fault::Ramp{0.02}),
                                   FaultSignal(t0, fault::Sinusoid{0.2, 2.0, 0.0, true})}}));
    } else if (name == "example2-nominal") {
      sc.actuator.joints.clear();
    } else {
      throw ConfigError("unknown preset '" + name + "'", 0);
    }
    return sc;
  }
  throw ConfigError("unknown preset '" + name + "'", 0);
}

std::vector<std::string> preset_names() {
  return {"example1",        "example1-nominal", "example2",
          "example2-offset", "example2-ramp",    "example2-composite",
          "example2-nominal"};
}

}  // namespace ftc
