#include "ftc/config.hpp"
#include "ftc/engine.hpp"
#include "ftc/errors.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace ftc;

namespace {

enum Exit { kOk = 0, kFailed = 1, kConfig = 2, kRuntime = 3 };

std::string num(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, end) : "nan";
}

double max_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
}

// Writes through a sibling temporary so a crash never leaves a half file.
void write_atomically(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    if (!out) throw Error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::optional<Scenario> load(const std::string& path) {
  try {
    return load_config(path);
  } catch (const ConfigError& e) {
    std::cerr << path << ": " << e.what() << '\n';
  } catch (const Error& e) {
    std::cerr << path << ": " << e.what() << '\n';
  }
  return std::nullopt;
}

MetricsOptions options_for(const Scenario& sc) {
  MetricsOptions o;
  o.fault_onset = first_fault_onset(sc);
  return o;
}

int cmd_simulate(const std::string& config, const std::string& out_dir,
                 std::optional<std::uint64_t> seed) {
  std::optional<Scenario> sc = load(config);
  if (!sc) return kConfig;
  if (seed) {
    sc->seed = *seed;
    reseed_faults(*sc, *seed);
  }
  const ScenarioReport report = check_scenario(*sc);
  if (!report.pass()) {
    report.print(std::cerr);
    return kConfig;
  }

  RunResult r;
  try {
    r = run_scenario(*sc, options_for(*sc));
  } catch (const Error& e) {
    std::cerr << "simulate: " << e.what() << '\n';
    return kRuntime;
  }

  std::ostringstream trace, metrics;
  write_trace_csv(trace, r.trace);
  r.metrics.print(metrics);
  try {
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    write_atomically(dir / "resolved-config.yaml", emit_config(*sc));
    write_atomically(dir / "metrics.txt", metrics.str());
    write_atomically(dir / "trace.csv", trace.str());
  } catch (const std::exception& e) {
    std::cerr << "simulate: " << e.what() << '\n';
    return kRuntime;
  }

  std::cout << metrics.str();
  if (!r.metrics.completed) {
    std::cerr << "simulate: run failed at t = " << num(r.metrics.failure_time)
              << ": " << r.metrics.failure << '\n';
    return kRuntime;
  }
  return kOk;
}

int cmd_validate(const std::string& config, std::optional<double> kappa,
                 std::optional<double> c1, std::optional<double> c2) {
  std::optional<Scenario> sc = load(config);
  if (!sc) return kConfig;
  if (kappa) sc->observer.kappa = *kappa;
  if (c1) sc->observer.c1 = *c1;
  if (c2) sc->observer.c2 = *c2;
  const ScenarioReport report = check_scenario(*sc);
  report.print(std::cout);
  return report.pass() ? kOk : kFailed;
}

const char* kSweepHeader =
    "value,completed,failure_time,funnel_violations,first_violation,"
    "max_steady_state,max_recovery_time,true_max_steady_state,"
    "sigma_settling,max_fault_rmse,max_xtilde_post_transient,max_betahat,"
    "failure";

std::string csv_field(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

std::string sweep_row(double value, const MetricsReport& m) {
  std::ostringstream os;
  os << num(value) << ',' << (m.completed ? 1 : 0) << ','
     << num(m.failure_time) << ',' << m.estimate.funnel_violations << ','
     << num(m.estimate.first_violation) << ','
     << num(max_of(m.estimate.steady_state)) << ','
     << num(max_of(m.estimate.recovery_time)) << ','
     << num(max_of(m.truth.steady_state)) << ',' << num(m.sigma_settling)
     << ',' << num(max_of(m.fault_rmse)) << ','
     << num(m.max_xtilde_post_transient) << ',' << num(m.max_betahat) << ','
     << csv_field(m.failure);
  return os.str();
}

int cmd_sweep(const std::string& config, const std::string& param,
              const std::string& mode_name,
              const std::vector<std::string>& raw_values,
              const std::string& out_path, unsigned threads) {
  std::vector<double> values;
  for (const std::string& s : raw_values) {
    if (s.empty()) continue;
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
      std::cerr << "sweep: '" << s << "' is not a number\n";
      return kConfig;
    }
    values.push_back(v);
  }
  std::optional<Scenario> base = load(config);
  if (!base) return kConfig;
  const OverrideMode mode =
      mode_name == "scale" ? OverrideMode::Scale : OverrideMode::Set;

  std::vector<Scenario> runs;
  std::vector<std::string> rejected(values.size());
  std::vector<std::size_t> slot(values.size(), static_cast<std::size_t>(-1));
  for (std::size_t i = 0; i < values.size(); ++i) {
    try {
      Scenario sc = with_override(*base, param, values[i], mode);
      const ScenarioReport rep = check_scenario(sc);
      if (!rep.pass()) {
        std::ostringstream os;
        for (const auto& c : rep.checks) {
          if (!c.pass && !c.informational) os << c.name << "; ";
        }
        rejected[i] = "validation: " + os.str();
        continue;
      }
      slot[i] = runs.size();
      runs.push_back(std::move(sc));
    } catch (const Error& e) {
      rejected[i] = e.what();
    }
  }

  MetricsOptions opts = options_for(*base);
  const std::vector<RunResult> results = run_batch(runs, opts, threads);

  std::ostringstream table;
  table << kSweepHeader << '\n';
  bool all_ok = true;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (slot[i] == static_cast<std::size_t>(-1)) {
      MetricsReport m;
      m.completed = false;
      m.failure = rejected[i];
      table << sweep_row(values[i], m) << '\n';
      all_ok = false;
      continue;
    }
    const MetricsReport& m = results[slot[i]].metrics;
    all_ok = all_ok && m.completed;
    table << sweep_row(values[i], m) << '\n';
  }

  if (out_path.empty()) {
    std::cout << table.str();
  } else {
    try {
      write_atomically(out_path, table.str());
    } catch (const std::exception& e) {
      std::cerr << "sweep: " << e.what() << '\n';
      return kRuntime;
    }
  }
  return all_ok ? kOk : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fault-tolerant manipulator control simulator"};
  app.require_subcommand(1);

  std::string config;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  auto* sim = app.add_subcommand("simulate", "run one scenario");
  sim->add_option("config", config, "scenario YAML")->required();
  sim->add_option("-o,--out", out_dir, "output directory");
  sim->add_option("--seed", seed, "seed for noisy fault channels");

  std::optional<double> kappa, c1, c2;
  auto* val = app.add_subcommand("validate", "check a scenario");
  val->add_option("config", config, "scenario YAML")->required();
  val->add_option("--kappa", kappa, "Lipschitz constant of H");
  val->add_option("--c1", c1, "analysis constant c1");
  val->add_option("--c2", c2, "analysis constant c2");

  std::string param, mode = "set", sweep_out;
  std::vector<std::string> values;
  unsigned threads = 0;
  auto* sw = app.add_subcommand("sweep", "run a one-parameter sweep");
  sw->add_option("config", config, "scenario YAML")->required();
  sw->add_option("--param", param, "dotted path, e.g. controller.gains.k1")
      ->required();
  sw->add_option("--mode", mode, "set or scale")
      ->check(CLI::IsMember({"set", "scale"}));
  sw->add_option("--values", values, "parameter values")->expected(0, -1);
  sw->add_option("-o,--out", sweep_out, "CSV output file (default stdout)");
  sw->add_option("-j,--threads", threads, "worker threads (0 = hardware)");

  CLI11_PARSE(app, argc, argv);

  if (*sim) return cmd_simulate(config, out_dir, seed);
  if (*val) return cmd_validate(config, kappa, c1, c2);
  return cmd_sweep(config, param, mode, values, sweep_out, threads);
}
