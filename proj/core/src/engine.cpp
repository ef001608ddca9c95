#include "ftc/engine.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace ftc {

int ModelSpec::dof() const {
  if (kind == "solar_tracker") return 3;
  if (kind == "two_link") return 2;
  if (kind == "constant_inertia") return static_cast<int>(inertia.rows());
  return 0;
}

std::unique_ptr<ManipulatorModel> ModelSpec::build() const {
  if (kind == "solar_tracker") return std::make_unique<SolarTracker>(solar);
  if (kind == "two_link") return std::make_unique<TwoLinkArm>(two_link);
  if (kind == "constant_inertia") {
    return std::make_unique<ConstantInertiaModel>(inertia);
  }
  throw ValidationError("unknown model kind '" + kind + "'");
}

ReferenceSample reference_at(double t, const std::vector<ReferenceSpec>& refs) {
  const auto n = static_cast<Eigen::Index>(refs.size());
  ReferenceSample r{Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const ReferenceSpec& s = refs[i];
    const double arg = s.frequency * t + s.phase;
    const double sn = std::sin(arg), cs = std::cos(arg);
    r.yd(i) = s.offset + s.amplitude * sn;
    r.yd_dot(i) = s.amplitude * s.frequency * cs;
    r.yd_ddot(i) = -s.amplitude * s.frequency * s.frequency * sn;
  }
  return r;
}

long Scenario::steps() const {
  return static_cast<long>(std::floor(T / h + 1e-9));
}

namespace {

FaultSignal reseeded(const FaultSignal& sig, std::uint64_t seed) {
  fault::Shape shape = sig.shape();
  if (auto* no = std::get_if<fault::NoisyOffset>(&shape)) {
    no->seed = seed;
  } else if (auto* c = std::get_if<fault::Composite>(&shape)) {
    for (auto& member : c->members) member = reseeded(member, seed);
  }
  return {sig.onset(), std::move(shape)};
}

Eigen::VectorXd or_zero(const Eigen::VectorXd& v, Eigen::Index n) {
  return v.size() == 0 ? Eigen::VectorXd::Zero(n) : v;
}

}  // namespace

void reseed_faults(Scenario& sc, std::uint64_t seed) {
  sc.seed = seed;
  for (std::size_t i = 0; i < sc.sensor.channels.size(); ++i) {
    sc.sensor.channels[i] = reseeded(sc.sensor.channels[i], seed + i);
  }
  const std::size_t offset = sc.sensor.channels.size();
  for (std::size_t i = 0; i < sc.actuator.joints.size(); ++i) {
    sc.actuator.joints[i] = reseeded(sc.actuator.joints[i], seed + offset + i);
  }
}

bool ScenarioReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const ScenarioCheck& c) {
    return c.pass || c.informational;
  });
}

void ScenarioReport::print(std::ostream& os) const {
  for (const auto& c : checks) {
    os << (c.pass ? "PASS" : (c.informational ? "INFO" : "FAIL")) << "  "
       << c.name;
    if (!c.detail.empty()) os << ": " << c.detail;
    os << '\n';
  }
  os << (pass() ? "overall: pass" : "overall: fail") << '\n';
}

namespace {

std::string join(const std::vector<std::string>& xs) {
  std::string out;
  for (const auto& x : xs) {
    if (!out.empty()) out += "; ";
    out += x;
  }
  return out;
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

bool size_ok(const Eigen::VectorXd& v, Eigen::Index n) {
  return v.size() == 0 || v.size() == n;
}

}  // namespace

ScenarioReport check_scenario(const Scenario& sc) {
  ScenarioReport rep;
  auto add = [&rep](std::string name, bool pass, std::string detail = {},
                    bool info = false) {
    rep.checks.push_back({std::move(name), pass, info, std::move(detail)});
  };

  const int n = sc.dof();
  {
    std::vector<std::string> bad;
    if (n <= 0) bad.push_back("unknown model '" + sc.model.kind + "'");
    if (static_cast<int>(sc.reference.size()) != n) {
      bad.push_back("reference needs " + std::to_string(n) + " entries");
    }
    if (static_cast<int>(sc.funnel.size()) != n) {
      bad.push_back("funnel needs " + std::to_string(n) + " entries");
    }
    if (sc.sensor.E.rows() != n || sc.sensor.E.cols() < 1 ||
        sc.sensor.E.cols() > n) {
      bad.push_back("E must be n x m with 1 <= m <= n");
    }
    if (!sc.sensor.channels.empty() &&
        static_cast<Eigen::Index>(sc.sensor.channels.size()) !=
            sc.sensor.E.cols()) {
      bad.push_back("sensor fault channels must match the columns of E");
    }
    if (!sc.actuator.joints.empty() &&
        static_cast<int>(sc.actuator.joints.size()) != n) {
      bad.push_back("actuator faults need one entry per joint");
    }
    if (sc.A_v.rows() != n || sc.A_v.cols() != n) bad.push_back("A_v must be n x n");
    const auto& ic = sc.initial;
    if (!size_ok(ic.q, n) || !size_ok(ic.qd, n) || !size_ok(ic.x_v, n) ||
        !size_ok(ic.xhat_a, 3 * n) || !size_ok(ic.pihat, sc.sensor.E.cols())) {
      bad.push_back("initial condition sizes");
    }
    add("dimensions", bad.empty(), join(bad));
    if (!bad.empty()) return rep;
  }
  const int m = sc.fault_channels();

  add("step", sc.h > 0.0 && sc.T >= sc.h && std::isfinite(sc.T),
      "h=" + num(sc.h) + " T=" + num(sc.T));

  try {
    sc.model.build();
    if (sc.model.kind == "solar_tracker") sc.model.solar.validate();
    if (sc.model.kind == "two_link") sc.model.two_link.validate();
    add("model", true, sc.model.kind);
  } catch (const Error& ex) {
    add("model", false, ex.what());
  }

  const auto gp = sc.controller.g.problems();
  add("g_parameters", gp.empty(), join(gp));
  const auto sp = sc.controller.surface.problems();
  add("surface_gains", sp.empty(), join(sp));

  bool funnel_ok = true;
  std::string funnel_detail;
  for (std::size_t i = 0; i < sc.funnel.size(); ++i) {
    try {
      sc.funnel[i].validate();
    } catch (const ValidationError& ex) {
      funnel_ok = false;
      funnel_detail = "joint " + std::to_string(i + 1) + ": " + ex.what();
    }
  }
  add("funnel_parameters", funnel_ok, funnel_detail);

  {
    const Eigen::VectorXd xhat = or_zero(sc.initial.xhat_a, 3 * n);
    const ReferenceSample r = reference_at(0.0, sc.reference);
    const Eigen::VectorXd e0 = xhat.head(n) - r.yd;
    bool ok = true;
    std::string detail;
    for (int i = 0; i < n; ++i) {
      if (!(std::abs(e0(i)) < sc.funnel[i].mu0)) {
        ok = false;
        detail = "joint " + std::to_string(i + 1) + ": |e(0)|=" +
                 num(std::abs(e0(i))) + " >= mu0=" + num(sc.funnel[i].mu0);
        break;
      }
    }
    add("funnel_initial", ok, detail);
  }

  const bool hurwitz = negated_is_hurwitz(sc.A_v);
  add("filter_hurwitz", hurwitz, hurwitz ? "" : "-A_v has an eigenvalue with Re >= 0");
  if (!hurwitz) return rep;

  AugmentedSystem aug;
  try {
    aug = build_augmented(n, m, sc.A_v, sc.sensor.E);
    add("observability", true, "rank " + std::to_string(3 * n));
  } catch (const Error& ex) {
    add("observability", false, ex.what());
    return rep;
  }

  try {
    const ObserverGains gains(aug, sc.observer);
    add("observer_gains", true, "P, Gamma, gamma, Upsilon SPD");
    add("lambda_residual", gains.lambda_residual() <= 1e-10,
        num(gains.lambda_residual()));
    const GainConditionReport gc = validate_gain_conditions(aug, gains);
    add("Q1_positive", gc.q1_positive,
        "min eig " + num(gc.q1_min_eig) + " (kappa=" + num(sc.observer.kappa) +
            ")",
        true);
    add("Q2_positive", gc.q2_positive, "min eig " + num(gc.q2_min_eig), true);
    add("rho2_positive", gc.rho2_positive, num(sc.observer.rho2), true);
  } catch (const Error& ex) {
    add("observer_gains", false, ex.what());
  }
  return rep;
}

ClosedLoop::ClosedLoop(Scenario sc) : sc_(std::move(sc)) {
  const ScenarioReport rep = check_scenario(sc_);
  if (!rep.pass()) {
    std::vector<std::string> failed;
    for (const auto& c : rep.checks) {
      if (!c.pass && !c.informational) {
        failed.push_back(c.detail.empty() ? c.name : c.name + " (" + c.detail + ")");
      }
    }
    throw ValidationError("scenario '" + sc_.name + "' failed: " + join(failed));
  }
  n_ = sc_.dof();
  m_ = sc_.fault_channels();
  model_ = sc_.model.build();
  aug_ = build_augmented(n_, m_, sc_.A_v, sc_.sensor.E);
  gains_ = std::make_unique<ObserverGains>(aug_, sc_.observer);
  coupling_ = ObserverCoupling::from(*gains_, n_);
}

Eigen::VectorXd ClosedLoop::initial_state() const {
  const auto& ic = sc_.initial;
  Eigen::VectorXd X = Eigen::VectorXd::Zero(state_size());
  X.segment(0, n_) = or_zero(ic.q, n_);
  X.segment(n_, n_) = or_zero(ic.qd, n_);
  X.segment(2 * n_, n_) = or_zero(ic.x_v, n_);
  X.segment(3 * n_, 3 * n_) = or_zero(ic.xhat_a, 3 * n_);
  X.segment(6 * n_, m_) = or_zero(ic.pihat, m_);
  X(6 * n_ + m_) = ic.betahat;
  return X;
}

ObserverState ClosedLoop::observer_state(const Eigen::VectorXd& X) const {
  return {X.segment(3 * n_, 3 * n_), X.segment(6 * n_, m_), X(6 * n_ + m_),
          X.segment(2 * n_, n_)};
}

ControllerState ClosedLoop::controller_state(const Eigen::VectorXd& X) const {
  return {X.segment(6 * n_ + m_ + 1, n_)};
}

Eigen::VectorXd ClosedLoop::derivative(double t, const Eigen::VectorXd& X,
                                       LoopSignals* sig) const {
  const int n = n_, m = m_;
  if (X.size() != state_size()) throw DimensionError("closed loop: state size");
  try {
    const Eigen::VectorXd q = X.segment(0, n);
    const Eigen::VectorXd qd = X.segment(n, n);
    const ObserverState os = observer_state(X);
    const ControllerState cs = controller_state(X);

    const Eigen::VectorXd f = sc_.sensor.channels.empty()
                                  ? Eigen::VectorXd::Zero(m)
                                  : sc_.sensor.values(t);
    const Eigen::VectorXd yf = q + sc_.sensor.E * f;

    const FaultEstimate est = fault_estimate(os, aug_, *gains_);
    const Eigen::VectorXd ups = upsilon(est.ytilde, os.betahat, *gains_);
    const double th = std::tanh(est.ytilde.squaredNorm() / gains_->rho1());
    const double betahat_dot = 2.0 * th * th - gains_->rho2() * os.betahat;
    const Eigen::VectorXd ytd = innovation_rate(os, yf, aug_, *gains_);
    const Eigen::VectorXd ups_dot =
        upsilon_dot(est.ytilde, ytd, os.betahat, betahat_dot, *gains_);

    const ReferenceSample ref = reference_at(t, sc_.reference);
    const Eigen::VectorXd qhat = os.xhat_a.head(n);
    const Eigen::VectorXd qdhat = os.xhat_a.segment(n, n);
    const Eigen::VectorXd e = qhat - ref.yd;
    const Eigen::VectorXd edot = qdhat + coupling_.L1 * est.ytilde +
                                 coupling_.Lambda1 * ups - ref.yd_dot;

    const FunnelSample funnel = funnel_at(t, sc_.funnel);
    const TransformState ts = transform_derivatives(e, edot, funnel, t);
    const SurfaceSignals surf = evaluate_surface(
        sc_.controller.kind, ts, cs, sc_.controller.g, sc_.controller.g_guard);

    const ControlContext ctx{qhat, qdhat, est.ytilde, ytd, ups, ups_dot,
                             ref.yd_ddot};
    const Eigen::VectorXd u = control_law(ctx, ts, surf, sc_.controller.surface,
                                          coupling_, *model_);
    const Eigen::VectorXd tau = apply_actuator_fault(u, sc_.actuator, t);

    const Eigen::VectorXd qdd = forward_dynamics(*model_, {q, qd}, tau);
    const ObserverDerivative od =
        observer_rhs(os, yf, u, aug_, *gains_, *model_);

    Eigen::VectorXd dX(state_size());
    dX << qd, qdd, od.x_v, od.xhat_a, od.pihat, od.betahat, surf.g_z;

    if (sig) {
      sig->t = t;
      sig->q = q;
      sig->qd = qd;
      sig->yf = yf;
      sig->x_v = os.x_v;
      sig->xhat_a = os.xhat_a;
      sig->yd = ref.yd;
      sig->e = e;
      sig->etrue = q - ref.yd;
      sig->mu = funnel.mu;
      sig->z = ts.z;
      sig->eta = cs.eta(ts.z);
      sig->sigma = surf.sigma;
      sig->u = u;
      sig->f = f;
      sig->fhat = est.fhat;
      sig->pihat = os.pihat;
      sig->betahat = os.betahat;
      sig->V2 = 0.5 * surf.sigma.squaredNorm();
      Eigen::VectorXd xa(3 * n);
      xa << q, qd, os.x_v;
      sig->xtilde_norm = (xa - os.xhat_a).norm();
    }
    return dX;
  } catch (const NumericalError& ex) {
    if (ex.time() >= 0.0) throw;
    throw NumericalError(ex.what(), t);
  }
}

SimulationTrace::SimulationTrace(int n, int m)
    : n_(n), m_(m), columns_(column_names(n, m)) {}

SimulationTrace::SimulationTrace(std::vector<std::string> columns)
    : columns_(std::move(columns)) {
  for (const auto& c : columns_) {
    if (c.rfind("etrue", 0) == 0) ++n_;
    if (c.rfind("fhat", 0) == 0) ++m_;
  }
}

std::vector<std::string> SimulationTrace::column_names(int n, int m) {
  std::vector<std::string> cols{"t"};
  auto group = [&cols](const std::string& base, int count) {
    for (int i = 1; i <= count; ++i) cols.push_back(base + std::to_string(i));
  };
  for (const char* g : {"q", "qd", "yf", "xv", "qhat", "qdhat", "xvhat", "yd",
                        "e", "etrue", "mu", "z", "eta", "sigma", "u"}) {
    group(g, n);
  }
  group("f", m);
  group("fhat", m);
  group("pihat", m);
  cols.insert(cols.end(), {"betahat", "V2", "xtilde_norm"});
  return cols;
}

void SimulationTrace::reserve(std::size_t rows) {
  data_.reserve(rows * columns_.size());
}

void SimulationTrace::append(const LoopSignals& s) {
  const std::size_t before = data_.size();
  auto push = [this](const Eigen::VectorXd& v) {
    data_.insert(data_.end(), v.data(), v.data() + v.size());
  };
  data_.push_back(s.t);
  push(s.q);
  push(s.qd);
  push(s.yf);
  push(s.x_v);
  push(s.xhat_a);
  push(s.yd);
  push(s.e);
  push(s.etrue);
  push(s.mu);
  push(s.z);
  push(s.eta);
  push(s.sigma);
  push(s.u);
  push(s.f);
  push(s.fhat);
  push(s.pihat);
  data_.push_back(s.betahat);
  data_.push_back(s.V2);
  data_.push_back(s.xtilde_norm);
  if (data_.size() - before != columns_.size()) {
    data_.resize(before);
    throw DimensionError("trace row does not match the column layout");
  }
}

void SimulationTrace::append_row(const std::vector<double>& row) {
  if (row.size() != columns_.size()) {
    throw DimensionError("trace row has " + std::to_string(row.size()) +
                         " values, expected " + std::to_string(columns_.size()));
  }
  data_.insert(data_.end(), row.begin(), row.end());
}

std::size_t SimulationTrace::index(const std::string& name) const {
  const auto it = std::find(columns_.begin(), columns_.end(), name);
  if (it == columns_.end()) throw std::out_of_range("no trace column " + name);
  return static_cast<std::size_t>(it - columns_.begin());
}

std::vector<double> SimulationTrace::column(const std::string& name) const {
  const std::size_t c = index(name);
  std::vector<double> out(rows());
  for (std::size_t r = 0; r < out.size(); ++r) out[r] = at(r, c);
  return out;
}

void write_trace_csv(std::ostream& os, const SimulationTrace& trace) {
  os << kTraceVersion << '\n';
  const auto& cols = trace.columns();
  for (std::size_t c = 0; c < cols.size(); ++c) {
    if (c) os << ',';
    os << cols[c];
  }
  os << '\n';
  char buf[64];
  std::string line;
  for (std::size_t r = 0; r < trace.rows(); ++r) {
    line.clear();
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (c) line.push_back(',');
      const auto res = std::to_chars(buf, buf + sizeof buf, trace.at(r, c),
                                     std::chars_format::scientific, 16);
      line.append(buf, res.ptr);
    }
    line.push_back('\n');
    os << line;
  }
}

SimulationTrace read_trace_csv(std::istream& is) {
  std::string line;
  std::vector<std::string> cols;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cols.push_back(cell);
    break;
  }
  if (cols.empty()) throw std::runtime_error("trace csv: missing header row");
  SimulationTrace trace(cols);
  std::vector<double> row;
  long lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    row.clear();
    const char* p = line.data();
    const char* end = p + line.size();
    while (p <= end) {
      double v = 0.0;
      const auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc()) {
        throw std::runtime_error("trace csv: bad number on data line " +
                                 std::to_string(lineno));
      }
      row.push_back(v);
      p = res.ptr;
      if (p == end) break;
      if (*p != ',') {
        throw std::runtime_error("trace csv: bad separator on data line " +
                                 std::to_string(lineno));
      }
      ++p;
    }
    trace.append_row(row);
  }
  return trace;
}

namespace {

/// Time after `start` at which |x| last reaches `thr`; 0 if never, -1 if at
/// the final sample.
double last_exceedance(const std::vector<double>& t, const std::vector<double>& x,
                       double start, double thr) {
  long last = -1;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] >= start && std::abs(x[k]) >= thr) last = static_cast<long>(k);
  }
  if (last < 0) return 0.0;
  if (last + 1 >= static_cast<long>(t.size())) return -1.0;
  return t[last + 1] - start;
}

ErrorMetrics error_metrics(const SimulationTrace& tr, const std::string& base,
                           const std::vector<double>& t, double window_start,
                           const MetricsOptions& o) {
  ErrorMetrics em;
  const int n = tr.n();
  for (int i = 1; i <= n; ++i) {
    const auto e = tr.column(base + std::to_string(i));
    const auto mu = tr.column("mu" + std::to_string(i));
    double ss = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
      if (t[k] >= window_start) ss = std::max(ss, std::abs(e[k]));
      if (!(std::abs(e[k]) < mu[k])) {
        if (em.funnel_violations == 0 || t[k] < em.first_violation) {
          em.first_violation = t[k];
        }
        ++em.funnel_violations;
      }
    }
    em.steady_state.push_back(ss);
    if (o.fault_onset >= 0.0) {
      em.recovery_time.push_back(
          last_exceedance(t, e, o.fault_onset, o.recovery_threshold));
    }
  }
  return em;
}

}  // namespace

MetricsReport compute_metrics(const SimulationTrace& tr,
                              const MetricsOptions& o) {
  MetricsReport rep;
  rep.samples = tr.rows();
  if (tr.rows() == 0) return rep;
  const auto t = tr.column("t");
  const double t_end = t.back();
  rep.horizon = t_end;
  const double window = o.window >= 0.0 ? o.window : 0.1 * t_end;
  const double transient = o.transient >= 0.0 ? o.transient : 0.2 * t_end;
  const double ws = t_end - window;

  rep.estimate = error_metrics(tr, "e", t, ws, o);
  rep.truth = error_metrics(tr, "etrue", t, ws, o);

  if (o.fault_onset >= 0.0) {
    const double fs = std::max(o.fault_onset, ws);
    for (int j = 1; j <= tr.m(); ++j) {
      const auto f = tr.column("f" + std::to_string(j));
      const auto fh = tr.column("fhat" + std::to_string(j));
      double se_w = 0.0, se_on = 0.0, ff_on = 0.0;
      long nw = 0, non = 0;
      for (std::size_t k = 0; k < t.size(); ++k) {
        const double d = f[k] - fh[k];
        if (t[k] >= fs) {
          se_w += d * d;
          ++nw;
        }
        if (t[k] >= o.fault_onset) {
          se_on += d * d;
          ff_on += f[k] * f[k];
          ++non;
        }
      }
      rep.fault_rmse.push_back(nw ? std::sqrt(se_w / nw) : 0.0);
      rep.fault_rmse_onset.push_back(non ? std::sqrt(se_on / non) : 0.0);
      rep.fault_rms.push_back(non ? std::sqrt(ff_on / non) : 0.0);
    }
  }

  const auto xt = tr.column("xtilde_norm");
  const auto bh = tr.column("betahat");
  const auto v2 = tr.column("V2");
  std::vector<double> sig_norm(t.size(), 0.0);
  for (int i = 1; i <= tr.n(); ++i) {
    const auto s = tr.column("sigma" + std::to_string(i));
    for (std::size_t k = 0; k < t.size(); ++k) sig_norm[k] += s[k] * s[k];
  }
  for (auto& s : sig_norm) s = std::sqrt(s);

  rep.max_betahat = *std::max_element(bh.begin(), bh.end());
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] >= transient) {
      rep.max_xtilde_post_transient = std::max(rep.max_xtilde_post_transient, xt[k]);
      if (k + 1 < t.size() &&
          v2[k + 1] > v2[k] * (1.0 + 1e-9) + 1e-15) {
        ++rep.v2_increases;
      }
    }
  }
  rep.sigma_settling = last_exceedance(t, sig_norm, t.front(), o.sigma_threshold);
  if (rep.sigma_settling > 0.0) rep.sigma_settling += t.front();
  return rep;
}

namespace {

void print_vec(std::ostream& os, const char* key, const std::vector<double>& v) {
  os << key << " =";
  for (double x : v) os << ' ' << x;
  os << '\n';
}

void print_errors(std::ostream& os, const std::string& p, const ErrorMetrics& e) {
  os << p << "funnel_violations = " << e.funnel_violations << '\n';
  os << p << "first_violation = " << e.first_violation << '\n';
  print_vec(os, (p + "steady_state_error").c_str(), e.steady_state);
  print_vec(os, (p + "recovery_time").c_str(), e.recovery_time);
}

}  // namespace

void MetricsReport::print(std::ostream& os) const {
  const auto old = os.precision(10);
  os << "status = " << (completed ? "completed" : "failed") << '\n';
  if (!completed) {
    os << "failure = " << failure << '\n';
    os << "failure_time = " << failure_time << '\n';
  }
  os << "horizon = " << horizon << '\n';
  os << "samples = " << samples << '\n';
  print_errors(os, "", estimate);
  print_errors(os, "true_", truth);
  print_vec(os, "fault_rmse_final", fault_rmse);
  print_vec(os, "fault_rmse_post_onset", fault_rmse_onset);
  print_vec(os, "fault_rms_post_onset", fault_rms);
  os << "max_xtilde_post_transient = " << max_xtilde_post_transient << '\n';
  os << "max_betahat = " << max_betahat << '\n';
  os << "sigma_settling_time = " << sigma_settling << '\n';
  os << "v2_increases_post_transient = " << v2_increases << '\n';
  os.precision(old);
}

RunResult run_scenario(const Scenario& sc, const MetricsOptions& opts) {
  const ClosedLoop loop(sc);
  RunResult res{SimulationTrace(loop.n(), loop.m()), {}};
  const long N = sc.steps();
  res.trace.reserve(static_cast<std::size_t>(N) + 1);

  auto rhs = [&loop](double t, const Eigen::VectorXd& X) {
    return loop.derivative(t, X);
  };
  Eigen::VectorXd X = loop.initial_state();
  std::string failure;
  double failure_time = -1.0;
  try {
    for (long k = 0;; ++k) {
      const double t = static_cast<double>(k) * sc.h;
      LoopSignals s;
      const Eigen::VectorXd k1 = loop.derivative(t, X, &s);
      res.trace.append(s);
      if (k == N) break;
      X = rk4_step(rhs, X, t, sc.h, k1);
    }
  } catch (const FunnelViolation& ex) {
    failure = ex.what();
    failure_time = ex.time();
  } catch (const NumericalError& ex) {
    failure = ex.what();
    failure_time = ex.time();
  }

  res.metrics = compute_metrics(res.trace, opts);
  if (!failure.empty()) {
    res.metrics.completed = false;
    res.metrics.failure = failure;
    res.metrics.failure_time = failure_time;
  }
  return res;
}

std::vector<RunResult> run_batch(const std::vector<Scenario>& scenarios,
                                 const MetricsOptions& opts, unsigned threads) {
  std::vector<RunResult> out(scenarios.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, std::max<std::size_t>(1, scenarios.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < scenarios.size(); i = next++) {
      try {
        out[i] = run_scenario(scenarios[i], opts);
      } catch (const std::exception& ex) {
        out[i].metrics.completed = false;
        out[i].metrics.failure = ex.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < threads; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return out;
}

double first_fault_onset(const Scenario& sc) {
  double t0 = -1.0;
  auto visit = [&t0](const FaultSignal& s) {
    if (std::holds_alternative<fault::Zero>(s.shape())) return;
    if (t0 < 0.0 || s.onset() < t0) t0 = s.onset();
  };
  for (const auto& s : sc.sensor.channels) visit(s);
  for (const auto& s : sc.actuator.joints) visit(s);
  return t0;
}

}  // namespace ftc
