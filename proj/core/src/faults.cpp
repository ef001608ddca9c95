#include "ftc/faults.hpp"

#include "ftc/errors.hpp"

#include <cmath>
#include <string>

namespace ftc {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// splitmix64 finalizer: a counter-based stream, so the value held over
// window k depends only on (seed, k).
std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double unit_uniform(std::uint64_t seed, std::uint64_t k) {
  const std::uint64_t bits = mix(mix(seed) ^ k);
  return static_cast<double>(bits >> 11) * 0x1.0p-53;  // [0, 1)
}

}  // namespace

std::string FaultSignal::kind() const {
  return std::visit(overloaded{
                        [](const fault::Zero&) { return "zero"; },
                        [](const fault::Step&) { return "step"; },
                        [](const fault::Ramp&) { return "ramp"; },
                        [](const fault::Sinusoid&) { return "sinusoid"; },
                        [](const fault::TanhStep&) { return "tanh_step"; },
                        [](const fault::NoisyOffset&) { return "noisy_offset"; },
                        [](const fault::Composite&) { return "composite"; },
                    },
                    shape_);
}

double FaultSignal::operator()(double t) const {
  if (t < onset_) return 0.0;
  const double dt = t - onset_;
  return std::visit(
      overloaded{
          [](const fault::Zero&) { return 0.0; },
          [](const fault::Step& s) { return s.amplitude; },
          [dt](const fault::Ramp& r) { return r.slope * dt; },
          [t, dt](const fault::Sinusoid& s) {
            const double arg = s.absolute ? t : dt;
            return s.amplitude * std::sin(s.frequency * arg + s.phase);
          },
          [dt](const fault::TanhStep& s) {
            return s.amplitude * std::tanh(dt * dt / s.width);
          },
          [dt](const fault::NoisyOffset& s) {
            const auto k = static_cast<std::uint64_t>(std::floor(dt / s.hold));
            const double u = unit_uniform(s.seed, k);
            return s.offset + s.noise * (2.0 * u - 1.0);
          },
          [t](const fault::Composite& c) {
            double sum = 0.0;
            for (const auto& m : c.members) sum += m(t);
            return sum;
          },
      },
      shape_);
}

double eval_fault(const FaultSignal& sig, double t) { return sig(t); }

void SensorFaultSpec::validate() const {
  if (static_cast<int>(channels.size()) != E.cols()) {
    throw DimensionError("sensor fault: E has " + std::to_string(E.cols()) +
                         " columns but " + std::to_string(channels.size()) +
                         " channels were given");
  }
  if (E.cols() > E.rows()) {
    throw DimensionError("sensor fault: more fault channels than outputs");
  }
}

Eigen::VectorXd SensorFaultSpec::values(double t) const {
  Eigen::VectorXd f(channels.size());
  for (std::size_t i = 0; i < channels.size(); ++i) f(i) = channels[i](t);
  return f;
}

Eigen::VectorXd ActuatorFaultSpec::values(double t) const {
  Eigen::VectorXd f(joints.size());
  for (std::size_t i = 0; i < joints.size(); ++i) f(i) = joints[i](t);
  return f;
}

Eigen::VectorXd apply_sensor_fault(const Eigen::VectorXd& y,
                                   const SensorFaultSpec& spec, double t) {
  spec.validate();
  if (y.size() != spec.E.rows()) {
    throw DimensionError("sensor fault: measurement has size " +
                         std::to_string(y.size()) + ", E has " +
                         std::to_string(spec.E.rows()) + " rows");
  }
  return y + spec.E * spec.values(t);
}

Eigen::VectorXd apply_actuator_fault(const Eigen::VectorXd& tau,
                                     const ActuatorFaultSpec& spec, double t) {
  if (spec.joints.empty()) return tau;
  if (static_cast<Eigen::Index>(spec.joints.size()) != tau.size()) {
    throw DimensionError("actuator fault: " +
                         std::to_string(spec.joints.size()) +
                         " channels for " + std::to_string(tau.size()) +
                         " joints");
  }
  return tau + spec.values(t);
}

}  // namespace ftc
