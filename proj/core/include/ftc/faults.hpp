#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace ftc {

class FaultSignal;

namespace fault {

struct Zero {};

struct Step {
  double amplitude = 0.0;
};

/// slope * (t - onset)
struct Ramp {
  double slope = 0.02;
};

/// amplitude * sin(frequency * (t - origin) + phase). When `absolute` is set
/// the origin is t = 0 instead of the onset, so the waveform is the
/// ungated sin(frequency * t + phase) switched on at the onset.
struct Sinusoid {
  double amplitude = 0.0;
  double frequency = 1.0;  // rad/s
  double phase = 0.0;
  bool absolute = false;
};

/// amplitude * tanh((t - onset)^2 / width)
struct TanhStep {
  double amplitude = 0.0;
  double width = 0.2;
};

/// offset + uniform noise in [-noise, noise], held constant over
/// consecutive windows of length `hold`.
struct NoisyOffset {
  double offset = 0.5;
  double noise = 0.05;
  double hold = 1e-3;
  std::uint64_t seed = 1;
};

struct Composite {
  std::vector<FaultSignal> members;
};

using Shape =
    std::variant<Zero, Step, Ramp, Sinusoid, TanhStep, NoisyOffset, Composite>;

}  // namespace fault

/// A scalar fault profile that is exactly zero before its onset time.
class FaultSignal {
 public:
  FaultSignal() = default;
  FaultSignal(double onset, fault::Shape shape)
      : onset_(onset), shape_(std::move(shape)) {}

  static FaultSignal zero() { return {}; }

  double onset() const { return onset_; }
  const fault::Shape& shape() const { return shape_; }
  std::string kind() const;

  /// Value at time t. Total and deterministic; 0 for t < onset.
  double operator()(double t) const;

 private:
  double onset_ = 0.0;
  fault::Shape shape_ = fault::Zero{};
};

double eval_fault(const FaultSignal& sig, double t);

/// y_f = y + E f(t), E is n x m.
struct SensorFaultSpec {
  Eigen::MatrixXd E;
  std::vector<FaultSignal> channels;

  int outputs() const { return static_cast<int>(E.rows()); }
  int faults() const { return static_cast<int>(E.cols()); }
  Eigen::VectorXd values(double t) const;
  void validate() const;
};

/// Additive torque fault per joint.
struct ActuatorFaultSpec {
  std::vector<FaultSignal> joints;

  Eigen::VectorXd values(double t) const;
};

Eigen::VectorXd apply_sensor_fault(const Eigen::VectorXd& y,
                                   const SensorFaultSpec& spec, double t);

Eigen::VectorXd apply_actuator_fault(const Eigen::VectorXd& tau,
                                     const ActuatorFaultSpec& spec, double t);

}  // namespace ftc
