#include "ftc/errors.hpp"

#include <sstream>

namespace ftc {

namespace {

std::string funnel_message(int joint, double t, double omega) {
  std::ostringstream os;
  os << "funnel violated on joint " << joint + 1 << " at t=" << t
     << " (|e|/mu=" << omega << ")";
  return os.str();
}

std::string config_message(const std::string& what, int line) {
  if (line <= 0) return what;
  return "line " + std::to_string(line) + ": " + what;
}

}  // namespace

FunnelViolation::FunnelViolation(int joint, double t, double omega)
    : Error(funnel_message(joint, t, omega)),
      joint_(joint),
      time_(t),
      omega_(omega) {}

ConfigError::ConfigError(const std::string& what, int line)
    : Error(config_message(what, line)), line_(line) {}

}  // namespace ftc
