#include "ftc/config.hpp"

#include "ftc/errors.hpp"
#include "ftc/presets.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>

namespace ftc {

namespace {

int line_of(const YAML::Node& n) {
  const YAML::Mark m = n.Mark();
  return m.is_null() ? 0 : m.line + 1;
}

[[noreturn]] void fail(const YAML::Node& n, const std::string& msg) {
  throw ConfigError(msg, line_of(n));
}

void require_map(const YAML::Node& n, const std::string& where) {
  if (!n.IsMap()) fail(n, where + ": expected a mapping");
}

void check_keys(const YAML::Node& map, std::initializer_list<const char*> allowed,
                const std::string& where) {
  require_map(map, where);
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) fail(kv.first, "unknown key '" + key + "' in " + where);
  }
}

double get_double(const YAML::Node& n, const std::string& what) {
  if (!n.IsScalar()) fail(n, what + ": expected a number");
  const std::string s = n.Scalar();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    // from_chars rejects a leading '+', which YAML allows
    try {
      v = n.as<double>();
    } catch (const YAML::Exception&) {
      fail(n, what + ": '" + s + "' is not a number");
    }
  }
  return v;
}

int get_int(const YAML::Node& n, const std::string& what) {
  if (!n.IsScalar()) fail(n, what + ": expected an integer");
  try {
    return n.as<int>();
  } catch (const YAML::Exception&) {
    fail(n, what + ": '" + n.Scalar() + "' is not an integer");
  }
}

std::uint64_t get_u64(const YAML::Node& n, const std::string& what) {
  if (!n.IsScalar()) fail(n, what + ": expected an unsigned integer");
  try {
    return n.as<std::uint64_t>();
  } catch (const YAML::Exception&) {
    fail(n, what + ": '" + n.Scalar() + "' is not an unsigned integer");
  }
}

bool get_bool(const YAML::Node& n, const std::string& what) {
  try {
    return n.as<bool>();
  } catch (const YAML::Exception&) {
    fail(n, what + ": expected true or false");
  }
}

std::string get_string(const YAML::Node& n, const std::string& what) {
  if (!n.IsScalar()) fail(n, what + ": expected a string");
  return n.Scalar();
}

Eigen::VectorXd get_vector(const YAML::Node& n, const std::string& what,
                           Eigen::Index size) {
  if (n.IsScalar() && size > 0) {
    return Eigen::VectorXd::Constant(size, get_double(n, what));
  }
  if (!n.IsSequence()) fail(n, what + ": expected a list of numbers");
  if (size >= 0 && static_cast<Eigen::Index>(n.size()) != size) {
    fail(n, what + ": expected " + std::to_string(size) + " entries, got " +
                std::to_string(n.size()));
  }
  Eigen::VectorXd v(static_cast<Eigen::Index>(n.size()));
  for (std::size_t i = 0; i < n.size(); ++i) v(i) = get_double(n[i], what);
  return v;
}

/// A list of rows; a scalar s means s * I when the shape is square.
Eigen::MatrixXd get_matrix(const YAML::Node& n, const std::string& what,
                           Eigen::Index rows, Eigen::Index cols) {
  if (n.IsScalar()) {
    if (rows != cols || rows <= 0) fail(n, what + ": a scalar needs a square shape");
    return get_double(n, what) * Eigen::MatrixXd::Identity(rows, cols);
  }
  if (!n.IsSequence() || n.size() == 0) fail(n, what + ": expected a list of rows");
  const auto r = static_cast<Eigen::Index>(n.size());
  if (rows >= 0 && r != rows) {
    fail(n, what + ": expected " + std::to_string(rows) + " rows, got " +
                std::to_string(r));
  }
  Eigen::Index c = -1;
  Eigen::MatrixXd M;
  for (Eigen::Index i = 0; i < r; ++i) {
    const YAML::Node row = n[static_cast<std::size_t>(i)];
    if (!row.IsSequence()) fail(row, what + ": each row must be a list");
    if (c < 0) {
      c = static_cast<Eigen::Index>(row.size());
      if (cols >= 0 && c != cols) {
        fail(row, what + ": expected " + std::to_string(cols) + " columns, got " +
                      std::to_string(c));
      }
      M.resize(r, c);
    } else if (static_cast<Eigen::Index>(row.size()) != c) {
      fail(row, what + ": ragged rows");
    }
    for (Eigen::Index j = 0; j < c; ++j) {
      M(i, j) = get_double(row[static_cast<std::size_t>(j)], what);
    }
  }
  return M;
}

void opt(const YAML::Node& map, const char* key, double& field,
         const std::string& where) {
  if (const YAML::Node v = map[key]) field = get_double(v, where + "." + key);
}
void opt(const YAML::Node& map, const char* key, int& field,
         const std::string& where) {
  if (const YAML::Node v = map[key]) field = get_int(v, where + "." + key);
}

// ---- sections --------------------------------------------------------------

void parse_model(const YAML::Node& n, ModelSpec& m) {
  check_keys(n, {"kind", "params", "inertia"}, "model");
  if (const YAML::Node k = n["kind"]) {
    m.kind = get_string(k, "model.kind");
    if (m.kind != "solar_tracker" && m.kind != "two_link" &&
        m.kind != "constant_inertia") {
      fail(k, "model.kind must be solar_tracker, two_link or constant_inertia");
    }
  }
  if (const YAML::Node p = n["params"]) {
    const std::string w = "model.params";
    if (m.kind == "solar_tracker") {
      check_keys(p, {"m1", "m2", "m3", "l1", "l2", "l3", "L1", "L2", "L3",
                     "Ix1", "Ix2", "Ix3", "Iy1", "Iy2", "Iy3", "Iz1", "Iz2",
                     "Iz3", "g"}, w);
      auto& s = m.solar;
      opt(p, "m1", s.m1, w); opt(p, "m2", s.m2, w); opt(p, "m3", s.m3, w);
      opt(p, "l1", s.l1, w); opt(p, "l2", s.l2, w); opt(p, "l3", s.l3, w);
      opt(p, "L1", s.L1, w); opt(p, "L2", s.L2, w); opt(p, "L3", s.L3, w);
      opt(p, "Ix1", s.Ix1, w); opt(p, "Ix2", s.Ix2, w); opt(p, "Ix3", s.Ix3, w);
      opt(p, "Iy1", s.Iy1, w); opt(p, "Iy2", s.Iy2, w); opt(p, "Iy3", s.Iy3, w);
      opt(p, "Iz1", s.Iz1, w); opt(p, "Iz2", s.Iz2, w); opt(p, "Iz3", s.Iz3, w);
      opt(p, "g", s.g, w);
    } else if (m.kind == "two_link") {
      check_keys(p, {"m1", "m2", "l1", "l2", "lc1", "lc2", "I1", "I2", "g"}, w);
      auto& s = m.two_link;
      opt(p, "m1", s.m1, w); opt(p, "m2", s.m2, w);
      opt(p, "l1", s.l1, w); opt(p, "l2", s.l2, w);
      opt(p, "lc1", s.lc1, w); opt(p, "lc2", s.lc2, w);
      opt(p, "I1", s.I1, w); opt(p, "I2", s.I2, w);
      opt(p, "g", s.g, w);
    } else {
      fail(p, "model.params is not used by " + m.kind);
    }
  }
  if (const YAML::Node i = n["inertia"]) {
    if (m.kind != "constant_inertia") fail(i, "model.inertia needs kind constant_inertia");
    m.inertia = get_matrix(i, "model.inertia", -1, -1);
  }
  if (m.kind == "constant_inertia" &&
      (m.inertia.rows() == 0 || m.inertia.rows() != m.inertia.cols())) {
    fail(n, "model.inertia must be a square matrix");
  }
}

/// Each entry of a per-joint list overrides the matching entry of `items`;
/// a single mapping applies to every joint.
template <class T, class F>
void parse_per_joint(const YAML::Node& n, std::vector<T>& items, int joints,
                     const std::string& where, F&& apply) {
  if (static_cast<int>(items.size()) != joints) items.resize(joints);
  if (n.IsMap()) {
    for (auto& it : items) apply(n, it);
    return;
  }
  if (!n.IsSequence() || static_cast<int>(n.size()) != joints) {
    fail(n, where + ": expected a mapping or a list of " + std::to_string(joints) +
                " mappings");
  }
  for (int i = 0; i < joints; ++i) apply(n[static_cast<std::size_t>(i)], items[i]);
}

fault::Shape default_shape(const std::string& kind, const YAML::Node& at) {
  if (kind == "zero") return fault::Zero{};
  if (kind == "step") return fault::Step{};
  if (kind == "ramp") return fault::Ramp{};
  if (kind == "sinusoid") return fault::Sinusoid{};
  if (kind == "tanh_step") return fault::TanhStep{};
  if (kind == "noisy_offset") return fault::NoisyOffset{};
  if (kind == "composite") return fault::Composite{};
  fail(at, "unknown fault kind '" + kind + "'");
}

FaultSignal parse_fault(const YAML::Node& n, const FaultSignal* base,
                        const std::string& where) {
  require_map(n, where);
  std::string kind = base ? base->kind() : "zero";
  fault::Shape shape = base ? base->shape() : fault::Shape{fault::Zero{}};
  double onset = base ? base->onset() : 0.0;
  if (const YAML::Node k = n["kind"]) {
    const std::string nk = get_string(k, where + ".kind");
    if (!base || nk != kind) shape = default_shape(nk, k);
    kind = nk;
  }
  opt(n, "onset", onset, where);

  if (auto* s = std::get_if<fault::Zero>(&shape)) {
    (void)s;
    check_keys(n, {"kind", "onset"}, where);
  } else if (auto* s = std::get_if<fault::Step>(&shape)) {
    check_keys(n, {"kind", "onset", "amplitude"}, where);
    opt(n, "amplitude", s->amplitude, where);
  } else if (auto* s = std::get_if<fault::Ramp>(&shape)) {
    check_keys(n, {"kind", "onset", "slope"}, where);
    opt(n, "slope", s->slope, where);
  } else if (auto* s = std::get_if<fault::Sinusoid>(&shape)) {
    check_keys(n, {"kind", "onset", "amplitude", "frequency", "phase", "absolute"},
               where);
    opt(n, "amplitude", s->amplitude, where);
    opt(n, "frequency", s->frequency, where);
    opt(n, "phase", s->phase, where);
    if (const YAML::Node a = n["absolute"]) s->absolute = get_bool(a, where + ".absolute");
  } else if (auto* s = std::get_if<fault::TanhStep>(&shape)) {
    check_keys(n, {"kind", "onset", "amplitude", "width"}, where);
    opt(n, "amplitude", s->amplitude, where);
    opt(n, "width", s->width, where);
    if (!(s->width > 0.0)) fail(n, where + ".width must be > 0");
  } else if (auto* s = std::get_if<fault::NoisyOffset>(&shape)) {
    check_keys(n, {"kind", "onset", "offset", "noise", "hold", "seed"}, where);
    opt(n, "offset", s->offset, where);
    opt(n, "noise", s->noise, where);
    opt(n, "hold", s->hold, where);
    if (const YAML::Node sd = n["seed"]) s->seed = get_u64(sd, where + ".seed");
    if (!(s->hold > 0.0)) fail(n, where + ".hold must be > 0");
    if (!(s->noise >= 0.0)) fail(n, where + ".noise must be >= 0");
  } else if (auto* s = std::get_if<fault::Composite>(&shape)) {
    check_keys(n, {"kind", "onset", "members"}, where);
    if (const YAML::Node mem = n["members"]) {
      if (!mem.IsSequence()) fail(mem, where + ".members must be a list");
      std::vector<FaultSignal> members;
      for (std::size_t i = 0; i < mem.size(); ++i) {
        const FaultSignal* b = i < s->members.size() ? &s->members[i] : nullptr;
        members.push_back(
            parse_fault(mem[i], b, where + ".members." + std::to_string(i)));
      }
      s->members = std::move(members);
    }
  }
  if (!std::isfinite(onset) || onset < 0.0) fail(n, where + ".onset must be >= 0");
  return {onset, std::move(shape)};
}

std::vector<FaultSignal> parse_fault_list(const YAML::Node& n,
                                          const std::vector<FaultSignal>& base,
                                          const std::string& where) {
  if (!n.IsSequence()) fail(n, where + ": expected a list of faults");
  std::vector<FaultSignal> out;
  for (std::size_t i = 0; i < n.size(); ++i) {
    const FaultSignal* b = i < base.size() ? &base[i] : nullptr;
    out.push_back(parse_fault(n[i], b, where + "." + std::to_string(i)));
  }
  return out;
}

void parse_faults(const YAML::Node& n, Scenario& sc) {
  check_keys(n, {"sensor", "actuator"}, "faults");
  const int dof = sc.dof();
  if (const YAML::Node s = n["sensor"]) {
    check_keys(s, {"E", "channels"}, "faults.sensor");
    if (const YAML::Node e = s["E"]) {
      sc.sensor.E = get_matrix(e, "faults.sensor.E", dof, -1);
      if (sc.sensor.E.cols() > dof) fail(e, "faults.sensor.E: more columns than joints");
    }
    if (const YAML::Node c = s["channels"]) {
      sc.sensor.channels = parse_fault_list(c, sc.sensor.channels, "faults.sensor.channels");
      if (!sc.sensor.channels.empty() &&
          static_cast<Eigen::Index>(sc.sensor.channels.size()) != sc.sensor.E.cols()) {
        fail(c, "faults.sensor.channels: need one entry per column of E (" +
                    std::to_string(sc.sensor.E.cols()) + ")");
      }
    }
  }
  if (const YAML::Node a = n["actuator"]) {
    sc.actuator.joints = parse_fault_list(a, sc.actuator.joints, "faults.actuator");
    if (!sc.actuator.joints.empty() &&
        static_cast<int>(sc.actuator.joints.size()) != dof) {
      fail(a, "faults.actuator: need one entry per joint (" + std::to_string(dof) + ")");
    }
  }
}

void parse_observer(const YAML::Node& n, Scenario& sc) {
  const std::string w = "observer";
  check_keys(n, {"A_v", "L", "P", "Gamma", "gamma", "Upsilon", "rho1", "rho2",
                 "kappa", "c1", "c2", "sing_eps"}, w);
  const Eigen::Index dof = sc.dof();
  const Eigen::Index m = sc.sensor.E.cols();
  auto& o = sc.observer;
  if (const YAML::Node v = n["A_v"]) sc.A_v = get_matrix(v, "observer.A_v", dof, dof);
  if (const YAML::Node v = n["L"]) o.L = get_matrix(v, "observer.L", 3 * dof, dof);
  if (const YAML::Node v = n["P"]) o.P = get_matrix(v, "observer.P", 3 * dof, 3 * dof);
  if (const YAML::Node v = n["Gamma"]) o.Gamma = get_matrix(v, "observer.Gamma", m, m);
  if (const YAML::Node v = n["gamma"]) o.gamma = get_matrix(v, "observer.gamma", m, m);
  if (const YAML::Node v = n["Upsilon"]) o.Upsilon = get_matrix(v, "observer.Upsilon", dof, dof);
  opt(n, "rho1", o.rho1, w);
  opt(n, "rho2", o.rho2, w);
  opt(n, "kappa", o.kappa, w);
  opt(n, "c1", o.c1, w);
  opt(n, "c2", o.c2, w);
  opt(n, "sing_eps", o.sing_eps, w);
}

void parse_controller(const YAML::Node& n, ControllerSpec& c) {
  check_keys(n, {"surface", "g", "gains", "g_guard"}, "controller");
  if (const YAML::Node s = n["surface"]) {
    const std::string k = get_string(s, "controller.surface");
    if (k == "second_order") c.kind = SurfaceKind::SecondOrder;
    else if (k == "first_order") c.kind = SurfaceKind::FirstOrder;
    else fail(s, "controller.surface must be second_order or first_order");
  }
  if (const YAML::Node g = n["g"]) {
    const std::string w = "controller.g";
    check_keys(g, {"lambda_under", "lambda_bar", "a", "b", "c", "p_under",
                   "q_under", "p_bar", "q_bar"}, w);
    opt(g, "lambda_under", c.g.lambda_under, w);
    opt(g, "lambda_bar", c.g.lambda_bar, w);
    opt(g, "a", c.g.a, w);
    opt(g, "b", c.g.b, w);
    opt(g, "c", c.g.c, w);
    opt(g, "p_under", c.g.p_under, w);
    opt(g, "q_under", c.g.q_under, w);
    opt(g, "p_bar", c.g.p_bar, w);
    opt(g, "q_bar", c.g.q_bar, w);
  }
  if (const YAML::Node g = n["gains"]) {
    const std::string w = "controller.gains";
    check_keys(g, {"k1", "c1", "c1_bar", "p", "q", "p_bar", "q_bar"}, w);
    opt(g, "k1", c.surface.k1, w);
    opt(g, "c1", c.surface.c1, w);
    opt(g, "c1_bar", c.surface.c1_bar, w);
    opt(g, "p", c.surface.p, w);
    opt(g, "q", c.surface.q, w);
    opt(g, "p_bar", c.surface.p_bar, w);
    opt(g, "q_bar", c.surface.q_bar, w);
  }
  opt(n, "g_guard", c.g_guard, "controller");
}

void parse_initial(const YAML::Node& n, Scenario& sc) {
  check_keys(n, {"q", "qd", "x_v", "xhat_a", "pihat", "betahat"}, "initial");
  const Eigen::Index dof = sc.dof();
  auto& ic = sc.initial;
  if (const YAML::Node v = n["q"]) ic.q = get_vector(v, "initial.q", dof);
  if (const YAML::Node v = n["qd"]) ic.qd = get_vector(v, "initial.qd", dof);
  if (const YAML::Node v = n["x_v"]) ic.x_v = get_vector(v, "initial.x_v", dof);
  if (const YAML::Node v = n["xhat_a"]) ic.xhat_a = get_vector(v, "initial.xhat_a", 3 * dof);
  if (const YAML::Node v = n["pihat"]) {
    ic.pihat = get_vector(v, "initial.pihat", sc.sensor.E.cols());
  }
  opt(n, "betahat", ic.betahat, "initial");
}

Scenario from_node(const YAML::Node& root) {
  if (!root.IsMap()) fail(root, "config: top level must be a mapping");
  check_keys(root, {"preset", "name", "model", "simulation", "reference",
                    "funnel", "faults", "observer", "controller", "initial"},
             "config");

  Scenario sc;
  if (const YAML::Node p = root["preset"]) {
    const std::string name = get_string(p, "preset");
    try {
      sc = preset(name);
    } catch (const ConfigError& ex) {
      fail(p, ex.what());
    }
  } else {
    sc.A_v.resize(0, 0);
  }
  if (const YAML::Node v = root["name"]) sc.name = get_string(v, "name");
  if (const YAML::Node v = root["model"]) parse_model(v, sc.model);
  const int dof = sc.dof();
  if (dof <= 0) fail(root, "config: no model selected (set model.kind or a preset)");

  std::optional<std::uint64_t> seed;
  if (const YAML::Node s = root["simulation"]) {
    check_keys(s, {"T", "h", "seed"}, "simulation");
    opt(s, "T", sc.T, "simulation");
    opt(s, "h", sc.h, "simulation");
    if (const YAML::Node v = s["seed"]) seed = get_u64(v, "simulation.seed");
    if (!(sc.h > 0.0) || !(sc.T >= sc.h)) fail(s, "simulation: need h > 0 and T >= h");
  }
  if (const YAML::Node r = root["reference"]) {
    parse_per_joint(r, sc.reference, dof, "reference",
                    [](const YAML::Node& e, ReferenceSpec& ref) {
                      check_keys(e, {"amplitude", "frequency", "phase", "offset"},
                                 "reference");
                      opt(e, "amplitude", ref.amplitude, "reference");
                      opt(e, "frequency", ref.frequency, "reference");
                      opt(e, "phase", ref.phase, "reference");
                      opt(e, "offset", ref.offset, "reference");
                    });
  }
  if (const YAML::Node f = root["funnel"]) {
    parse_per_joint(f, sc.funnel, dof, "funnel",
                    [](const YAML::Node& e, FunnelParams& fp) {
                      check_keys(e, {"mu0", "mu_inf", "l"}, "funnel");
                      opt(e, "mu0", fp.mu0, "funnel");
                      opt(e, "mu_inf", fp.mu_inf, "funnel");
                      opt(e, "l", fp.l, "funnel");
                    });
  }
  if (const YAML::Node f = root["faults"]) parse_faults(f, sc);
  if (const YAML::Node o = root["observer"]) parse_observer(o, sc);
  if (const YAML::Node c = root["controller"]) parse_controller(c, sc.controller);
  if (const YAML::Node i = root["initial"]) parse_initial(i, sc);
  if (seed) reseed_faults(sc, *seed);
  return sc;
}

// ---- emission ----------------------------------------------------------------

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void emit_vector(YAML::Emitter& out, const Eigen::VectorXd& v) {
  out << YAML::Flow << YAML::BeginSeq;
  for (Eigen::Index i = 0; i < v.size(); ++i) out << fmt(v(i));
  out << YAML::EndSeq;
}

void emit_matrix(YAML::Emitter& out, const Eigen::MatrixXd& M) {
  out << YAML::BeginSeq;
  for (Eigen::Index i = 0; i < M.rows(); ++i) emit_vector(out, M.row(i).transpose());
  out << YAML::EndSeq;
}

void kv(YAML::Emitter& out, const char* key, double v) {
  out << YAML::Key << key << YAML::Value << fmt(v);
}
void kv(YAML::Emitter& out, const char* key, int v) {
  out << YAML::Key << key << YAML::Value << v;
}

void emit_fault(YAML::Emitter& out, const FaultSignal& f) {
  out << YAML::BeginMap;
  out << YAML::Key << "kind" << YAML::Value << f.kind();
  kv(out, "onset", f.onset());
  std::visit(
      [&out](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, fault::Step>) {
          kv(out, "amplitude", s.amplitude);
        } else if constexpr (std::is_same_v<S, fault::Ramp>) {
          kv(out, "slope", s.slope);
        } else if constexpr (std::is_same_v<S, fault::Sinusoid>) {
          kv(out, "amplitude", s.amplitude);
          kv(out, "frequency", s.frequency);
          kv(out, "phase", s.phase);
          out << YAML::Key << "absolute" << YAML::Value << s.absolute;
        } else if constexpr (std::is_same_v<S, fault::TanhStep>) {
          kv(out, "amplitude", s.amplitude);
          kv(out, "width", s.width);
        } else if constexpr (std::is_same_v<S, fault::NoisyOffset>) {
          kv(out, "offset", s.offset);
          kv(out, "noise", s.noise);
          kv(out, "hold", s.hold);
          out << YAML::Key << "seed" << YAML::Value << s.seed;
        } else if constexpr (std::is_same_v<S, fault::Composite>) {
          out << YAML::Key << "members" << YAML::Value << YAML::BeginSeq;
          for (const auto& m : s.members) emit_fault(out, m);
          out << YAML::EndSeq;
        }
      },
      f.shape());
  out << YAML::EndMap;
}

YAML::Node navigate(YAML::Node node, const std::string& path) {
  std::stringstream ss(path);
  std::string seg;
  while (std::getline(ss, seg, '.')) {
    if (node.IsSequence()) {
      std::size_t idx = 0;
      const auto res = std::from_chars(seg.data(), seg.data() + seg.size(), idx);
      if (res.ec != std::errc() || idx >= node.size()) {
        throw ConfigError("override path '" + path + "': bad index '" + seg + "'", 0);
      }
      node.reset(node[idx]);
    } else if (node.IsMap()) {
      if (!node[seg]) {
        throw ConfigError("override path '" + path + "': no key '" + seg + "'", 0);
      }
      node.reset(node[seg]);
    } else {
      throw ConfigError("override path '" + path + "' descends into a scalar", 0);
    }
  }
  return node;
}

void apply_value(YAML::Node node, double value, OverrideMode mode,
                 const std::string& path) {
  if (node.IsSequence()) {
    for (std::size_t i = 0; i < node.size(); ++i) {
      apply_value(node[i], value, mode, path);
    }
    return;
  }
  if (node.IsMap()) {
    for (auto kv : node) apply_value(kv.second, value, mode, path);
    return;
  }
  if (!node.IsScalar()) {
    throw ConfigError("override path '" + path + "' is not numeric", 0);
  }
  double cur = 0.0;
  try {
    cur = node.as<double>();
  } catch (const YAML::Exception&) {
    throw ConfigError("override path '" + path + "' is not numeric", 0);
  }
  const double next = mode == OverrideMode::Set ? value : cur * value;
  node = fmt(next);
}

}  // namespace

Scenario parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& ex) {
    throw ConfigError("YAML syntax: " + ex.msg, ex.mark.line + 1);
  }
  if (!root || root.IsNull()) throw ConfigError("config is empty", 0);
  return from_node(root);
}

Scenario load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'", 0);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string emit_config(const Scenario& sc) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << sc.name;

  out << YAML::Key << "model" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "kind" << YAML::Value << sc.model.kind;
  if (sc.model.kind == "solar_tracker") {
    const auto& s = sc.model.solar;
    out << YAML::Key << "params" << YAML::Value << YAML::BeginMap;
    kv(out, "m1", s.m1); kv(out, "m2", s.m2); kv(out, "m3", s.m3);
    kv(out, "l1", s.l1); kv(out, "l2", s.l2); kv(out, "l3", s.l3);
    kv(out, "L1", s.L1); kv(out, "L2", s.L2); kv(out, "L3", s.L3);
    kv(out, "Ix1", s.Ix1); kv(out, "Ix2", s.Ix2); kv(out, "Ix3", s.Ix3);
    kv(out, "Iy1", s.Iy1); kv(out, "Iy2", s.Iy2); kv(out, "Iy3", s.Iy3);
    kv(out, "Iz1", s.Iz1); kv(out, "Iz2", s.Iz2); kv(out, "Iz3", s.Iz3);
    kv(out, "g", s.g);
    out << YAML::EndMap;
  } else if (sc.model.kind == "two_link") {
    const auto& s = sc.model.two_link;
    out << YAML::Key << "params" << YAML::Value << YAML::BeginMap;
    kv(out, "m1", s.m1); kv(out, "m2", s.m2);
    kv(out, "l1", s.l1); kv(out, "l2", s.l2);
    kv(out, "lc1", s.lc1); kv(out, "lc2", s.lc2);
    kv(out, "I1", s.I1); kv(out, "I2", s.I2);
    kv(out, "g", s.g);
    out << YAML::EndMap;
  } else {
    out << YAML::Key << "inertia" << YAML::Value;
    emit_matrix(out, sc.model.inertia);
  }
  out << YAML::EndMap;

  out << YAML::Key << "simulation" << YAML::Value << YAML::BeginMap;
  kv(out, "T", sc.T);
  kv(out, "h", sc.h);
  out << YAML::EndMap;

  out << YAML::Key << "reference" << YAML::Value << YAML::BeginSeq;
  for (const auto& r : sc.reference) {
    out << YAML::Flow << YAML::BeginMap;
    kv(out, "amplitude", r.amplitude);
    kv(out, "frequency", r.frequency);
    kv(out, "phase", r.phase);
    kv(out, "offset", r.offset);
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  out << YAML::Key << "funnel" << YAML::Value << YAML::BeginSeq;
  for (const auto& f : sc.funnel) {
    out << YAML::Flow << YAML::BeginMap;
    kv(out, "mu0", f.mu0);
    kv(out, "mu_inf", f.mu_inf);
    kv(out, "l", f.l);
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  out << YAML::Key << "faults" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "sensor" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "E" << YAML::Value;
  emit_matrix(out, sc.sensor.E);
  out << YAML::Key << "channels" << YAML::Value << YAML::BeginSeq;
  for (const auto& c : sc.sensor.channels) emit_fault(out, c);
  out << YAML::EndSeq << YAML::EndMap;
  out << YAML::Key << "actuator" << YAML::Value << YAML::BeginSeq;
  for (const auto& c : sc.actuator.joints) emit_fault(out, c);
  out << YAML::EndSeq;
  out << YAML::EndMap;

  const auto& o = sc.observer;
  out << YAML::Key << "observer" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "A_v" << YAML::Value;
  emit_matrix(out, sc.A_v);
  out << YAML::Key << "L" << YAML::Value;
  emit_matrix(out, o.L);
  out << YAML::Key << "P" << YAML::Value;
  emit_matrix(out, o.P);
  out << YAML::Key << "Gamma" << YAML::Value;
  emit_matrix(out, o.Gamma);
  out << YAML::Key << "gamma" << YAML::Value;
  emit_matrix(out, o.gamma);
  out << YAML::Key << "Upsilon" << YAML::Value;
  emit_matrix(out, o.Upsilon);
  kv(out, "rho1", o.rho1);
  kv(out, "rho2", o.rho2);
  kv(out, "kappa", o.kappa);
  kv(out, "c1", o.c1);
  kv(out, "c2", o.c2);
  kv(out, "sing_eps", o.sing_eps);
  out << YAML::EndMap;

  const auto& c = sc.controller;
  out << YAML::Key << "controller" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "surface" << YAML::Value
      << (c.kind == SurfaceKind::SecondOrder ? "second_order" : "first_order");
  out << YAML::Key << "g" << YAML::Value << YAML::BeginMap;
  kv(out, "lambda_under", c.g.lambda_under);
  kv(out, "lambda_bar", c.g.lambda_bar);
  kv(out, "a", c.g.a);
  kv(out, "b", c.g.b);
  kv(out, "c", c.g.c);
  kv(out, "p_under", c.g.p_under);
  kv(out, "q_under", c.g.q_under);
  kv(out, "p_bar", c.g.p_bar);
  kv(out, "q_bar", c.g.q_bar);
  out << YAML::EndMap;
  out << YAML::Key << "gains" << YAML::Value << YAML::BeginMap;
  kv(out, "k1", c.surface.k1);
  kv(out, "c1", c.surface.c1);
  kv(out, "c1_bar", c.surface.c1_bar);
  kv(out, "p", c.surface.p);
  kv(out, "q", c.surface.q);
  kv(out, "p_bar", c.surface.p_bar);
  kv(out, "q_bar", c.surface.q_bar);
  out << YAML::EndMap;
  kv(out, "g_guard", c.g_guard);
  out << YAML::EndMap;

  const int n = sc.dof();
  const auto& ic = sc.initial;
  auto vec = [](const Eigen::VectorXd& v, Eigen::Index size) {
    return v.size() == 0 ? Eigen::VectorXd::Zero(size) : v;
  };
  out << YAML::Key << "initial" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "q" << YAML::Value;
  emit_vector(out, vec(ic.q, n));
  out << YAML::Key << "qd" << YAML::Value;
  emit_vector(out, vec(ic.qd, n));
  out << YAML::Key << "x_v" << YAML::Value;
  emit_vector(out, vec(ic.x_v, n));
  out << YAML::Key << "xhat_a" << YAML::Value;
  emit_vector(out, vec(ic.xhat_a, 3 * n));
  out << YAML::Key << "pihat" << YAML::Value;
  emit_vector(out, vec(ic.pihat, sc.sensor.E.cols()));
  kv(out, "betahat", ic.betahat);
  out << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

Scenario with_override(const Scenario& sc, const std::string& path,
                       double value, OverrideMode mode) {
  YAML::Node root = YAML::Load(emit_config(sc));
  apply_value(navigate(root, path), value, mode, path);
  YAML::Emitter out;
  out << root;
  Scenario next = parse_config(out.c_str());
  next.seed = sc.seed;
  return next;
}

}  // namespace ftc
