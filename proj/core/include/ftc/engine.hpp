#pragma once

#include "ftc/controller.hpp"
#include "ftc/errors.hpp"
#include "ftc/faults.hpp"
#include "ftc/manipulator.hpp"
#include "ftc/observer.hpp"
#include "ftc/ppf.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace ftc {

/// Classic four-stage Runge-Kutta step. `rhs(t, x)` returns dx/dt.
/// Throws NumericalError tagged with the stage time when a stage is not
/// finite.
template <class Rhs>
Eigen::VectorXd rk4_step(Rhs&& rhs, const Eigen::VectorXd& x, double t,
                         double h, const Eigen::VectorXd& k1) {
  auto finite = [](const Eigen::VectorXd& k, double ts) {
    if (!k.allFinite()) throw NumericalError("non-finite RK4 stage", ts);
  };
  finite(k1, t);
  const Eigen::VectorXd k2 = rhs(t + 0.5 * h, x + 0.5 * h * k1);
  finite(k2, t + 0.5 * h);
  const Eigen::VectorXd k3 = rhs(t + 0.5 * h, x + 0.5 * h * k2);
  finite(k3, t + 0.5 * h);
  const Eigen::VectorXd k4 = rhs(t + h, x + h * k3);
  finite(k4, t + h);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

template <class Rhs>
Eigen::VectorXd rk4_step(Rhs&& rhs, const Eigen::VectorXd& x, double t,
                         double h) {
  return rk4_step(rhs, x, t, h, rhs(t, x));
}

struct ModelSpec {
  std::string kind = "solar_tracker";  // solar_tracker | two_link | constant_inertia
  SolarTrackerParams solar;
  TwoLinkParams two_link;
  Eigen::MatrixXd inertia;  // constant_inertia only

  int dof() const;
  std::unique_ptr<ManipulatorModel> build() const;
};

/// y_d = offset + amplitude sin(frequency t + phase)
struct ReferenceSpec {
  double amplitude = 0.0;
  double frequency = 1.0;
  double phase = 0.0;
  double offset = 0.0;
};

struct ReferenceSample {
  Eigen::VectorXd yd, yd_dot, yd_ddot;
};
ReferenceSample reference_at(double t, const std::vector<ReferenceSpec>& refs);

/// Empty vectors mean zero.
struct InitialConditions {
  Eigen::VectorXd q, qd;
  Eigen::VectorXd x_v;
  Eigen::VectorXd xhat_a;
  Eigen::VectorXd pihat;
  double betahat = 0.0;
};

struct ControllerSpec {
  GFuncParams g;
  SurfaceGains surface;
  SurfaceKind kind = SurfaceKind::SecondOrder;
  double g_guard = kGDotGuard;
};

struct Scenario {
  std::string name = "scenario";
  ModelSpec model;
  std::vector<ReferenceSpec> reference;  // one per joint
  SensorFaultSpec sensor;                // E doubles as the observer's E
  ActuatorFaultSpec actuator;
  Eigen::MatrixXd A_v;
  ObserverGainParams observer;
  ControllerSpec controller;
  std::vector<FunnelParams> funnel;  // one per joint
  InitialConditions initial;
  double T = 50.0;
  double h = 1e-3;
  std::uint64_t seed = 1;

  int dof() const { return model.dof(); }
  int fault_channels() const { return static_cast<int>(sensor.E.cols()); }
  /// Number of integration steps, floor(T / h).
  long steps() const;
};

/// Replace the seed of every noisy fault channel by `seed` + channel index.
void reseed_faults(Scenario& sc, std::uint64_t seed);

struct ScenarioCheck {
  std::string name;
  bool pass = false;
  bool informational = false;  // reported, does not gate a run
  std::string detail;
};

struct ScenarioReport {
  std::vector<ScenarioCheck> checks;
  bool pass() const;
  void print(std::ostream& os) const;
};

/// Structural checks: dimensions, step/horizon, parity and ordering of the
/// controller exponents, funnel parameters and initial containment, Hurwitz
/// filter, observability, SPD gains, and the Q1/Q2 eigenvalue report.
ScenarioReport check_scenario(const Scenario& sc);

/// Everything recorded at one time instant.
struct LoopSignals {
  double t = 0.0;
  Eigen::VectorXd q, qd, yf, x_v, xhat_a, yd, e, etrue, mu, z, eta, sigma, u;
  Eigen::VectorXd f, fhat, pihat;
  double betahat = 0.0;
  double V2 = 0.0;
  double xtilde_norm = 0.0;
};

/// The coupled plant, virtual filter, observer and controller as one ODE in
/// the stacked state (q, qd, x_v, xhat_a, pihat, betahat, integral of g(z)).
class ClosedLoop {
 public:
  /// Throws ValidationError if check_scenario fails.
  explicit ClosedLoop(Scenario sc);

  int n() const { return n_; }
  int m() const { return m_; }
  int state_size() const { return 8 * n_ + m_ + 1; }
  const Scenario& scenario() const { return sc_; }
  const ManipulatorModel& model() const { return *model_; }
  const AugmentedSystem& augmented() const { return aug_; }
  const ObserverGains& gains() const { return *gains_; }

  Eigen::VectorXd initial_state() const;

  /// dX/dt at (t, X); fills `sig` when given. Throws FunnelViolation or
  /// NumericalError tagged with t.
  Eigen::VectorXd derivative(double t, const Eigen::VectorXd& X,
                             LoopSignals* sig = nullptr) const;

  ObserverState observer_state(const Eigen::VectorXd& X) const;
  ControllerState controller_state(const Eigen::VectorXd& X) const;

 private:
  Scenario sc_;
  int n_ = 0;
  int m_ = 0;
  std::unique_ptr<ManipulatorModel> model_;
  AugmentedSystem aug_;
  std::unique_ptr<ObserverGains> gains_;
  ObserverCoupling coupling_;
};

/// Column-labelled samples at t_k = k h. Row-major storage.
class SimulationTrace {
 public:
  SimulationTrace() = default;
  SimulationTrace(int n, int m);
  explicit SimulationTrace(std::vector<std::string> columns);

  static std::vector<std::string> column_names(int n, int m);

  int n() const { return n_; }
  int m() const { return m_; }
  const std::vector<std::string>& columns() const { return columns_; }
  std::size_t rows() const {
    return columns_.empty() ? 0 : data_.size() / columns_.size();
  }
  std::size_t cols() const { return columns_.size(); }

  void reserve(std::size_t rows);
  void append(const LoopSignals& s);
  void append_row(const std::vector<double>& row);

  double at(std::size_t row, std::size_t col) const {
    return data_[row * columns_.size() + col];
  }
  /// Index of a column; throws std::out_of_range for unknown names.
  std::size_t index(const std::string& name) const;
  std::vector<double> column(const std::string& name) const;

  bool operator==(const SimulationTrace& o) const {
    return columns_ == o.columns_ && data_ == o.data_;
  }

 private:
  int n_ = 0;
  int m_ = 0;
  std::vector<std::string> columns_;
  std::vector<double> data_;
};

inline constexpr const char* kTraceVersion = "# ftc-trace v1";

/// Header comment, header row, then one row per sample in scientific
/// notation with 17 significant digits.
void write_trace_csv(std::ostream& os, const SimulationTrace& trace);
SimulationTrace read_trace_csv(std::istream& is);

struct MetricsOptions {
  double fault_onset = -1.0;       // < 0: no fault, post-onset metrics skipped
  double window = -1.0;            // steady-state window; < 0: last 10 %
  double transient = -1.0;         // post-transient start; < 0: 20 % of T
  double recovery_threshold = 0.05;
  double sigma_threshold = 1e-3;
};

/// Per-joint error summary for one error signal.
struct ErrorMetrics {
  std::vector<double> steady_state;  // max |e_i| over the window
  std::vector<double> recovery_time; // see compute_metrics
  long funnel_violations = 0;
  double first_violation = -1.0;
};

struct MetricsReport {
  bool completed = true;
  std::string failure;
  double failure_time = -1.0;
  double horizon = 0.0;
  std::size_t samples = 0;

  ErrorMetrics estimate;  // e = qhat - yd, the controlled error
  ErrorMetrics truth;     // q - yd

  std::vector<double> fault_rmse;        // over [max(onset, t_end - window), t_end]
  std::vector<double> fault_rms;         // RMS of f over the same window
  std::vector<double> fault_rmse_onset;  // over [onset, t_end]
  double max_xtilde_post_transient = 0.0;
  double max_betahat = 0.0;
  double sigma_settling = -1.0;
  long v2_increases = 0;

  void print(std::ostream& os) const;
};

/// Funnel violations count samples with |e_i| >= mu_i. A recovery time is
/// the time after the onset at which |e_i| last exceeds the threshold
/// (0 when it never does, -1 when it is above it at the end). The sigma
/// settling time is the last time ||sigma|| >= sigma_threshold.
MetricsReport compute_metrics(const SimulationTrace& trace,
                              const MetricsOptions& opts = {});

struct RunResult {
  SimulationTrace trace;
  MetricsReport metrics;
};

/// Integrates the scenario. Funnel violations and numerical failures end the
/// run early; the partial trace is kept and the report is marked incomplete.
RunResult run_scenario(const Scenario& sc, const MetricsOptions& opts = {});

/// Runs independent scenarios on up to `threads` worker threads. The result
/// order matches the input; failures are captured per entry.
std::vector<RunResult> run_batch(const std::vector<Scenario>& scenarios,
                                 const MetricsOptions& opts,
                                 unsigned threads = 0);

/// Earliest onset over the sensor and actuator channels, -1 if none.
double first_fault_onset(const Scenario& sc);

}  // namespace ftc
