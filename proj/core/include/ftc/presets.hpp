#pragma once

#include "ftc/engine.hpp"

#include <string>
#include <vector>

namespace ftc {

/// Built-in scenarios:
///   example1            two-link arm, tanh-step fault on sensor 1 at 25 s
///   example1-nominal    same gains, no faults
///   example2            solar tracker, sinusoidal sensor faults at 25 s and
///                       actuator faults at 35 s
///   example2-offset     offset 0.5 rad with uniform noise
///   example2-ramp       ramp 0.02 rad/s
///   example2-composite  step 0.3 + ramp 0.02 (t - t0) + 0.2 sin 2t
///   example2-nominal    no faults
/// Throws ConfigError for unknown names.
Scenario preset(const std::string& name);
std::vector<std::string> preset_names();

Eigen::MatrixXd example1_P();
Eigen::MatrixXd example1_L();
Eigen::MatrixXd example2_P();
Eigen::MatrixXd example2_L();

}  // namespace ftc
