#pragma once

#include <stdexcept>
#include <string>

namespace ftc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A parameter set or scenario failed a structural check (sign, parity,
/// Hurwitz, observability, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values or an ill-conditioned solve during evaluation.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, double t = -1.0)
      : Error(what), time_(t) {}
  double time() const { return time_; }

 private:
  double time_;
};

/// The tracking error left the prescribed funnel (|e_i| >= mu_i).
class FunnelViolation : public Error {
 public:
  FunnelViolation(int joint, double t, double omega);
  int joint() const { return joint_; }
  double time() const { return time_; }
  double omega() const { return omega_; }

 private:
  int joint_;
  double time_;
  double omega_;
};

/// Malformed configuration; line is 1-based, 0 when unknown.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line);
  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace ftc
