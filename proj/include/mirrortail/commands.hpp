#pragma once

#include "mirrortail/bounds.hpp"
#include "mirrortail/concentration.hpp"
#include "mirrortail/experiment.hpp"
#include "mirrortail/trace_suite.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

// Subcommand bodies shared by the CLI and the tests. Every runner returns the
// process exit code: 0 ok, 1 a check failed or the run could not finish,
// 2 bad input.
namespace mirrortail::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;
inline constexpr int kExitUsage = 2;

// Thrown for anything the caller got wrong; maps to exit code 2.
struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& body) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << body;
  f.close();
  if (!f) throw std::runtime_error("failed writing '" + path + "'");
}

// ---- eval-bounds ----------------------------------------------------------

using KeyValues = std::map<std::string, std::string>;

// One `key = value` (or `key: value`) per line, '#' starts a comment.
inline KeyValues parse_key_values(const std::string& text) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto sep = line.find_first_of("=:");
    if (sep == std::string::npos) throw UsageError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, sep));
    const std::string value = trim(line.substr(sep + 1));
    if (key.empty() || value.empty()) throw UsageError("line " + std::to_string(lineno) + ": empty key or value");
    if (!kv.emplace(key, value).second) throw UsageError("duplicate key '" + key + "'");
  }
  return kv;
}

inline double parse_number(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    const auto slash = v.find('/');
    if (slash == std::string::npos) {
      x = std::stod(v, &used);
    } else {
      std::size_t u2 = 0;
      const std::string den = v.substr(slash + 1);
      x = std::stod(v.substr(0, slash), &used) / std::stod(den, &u2);
      if (u2 != den.size()) used = 0;
      else used = v.size();
    }
  } catch (const std::exception&) {
    throw UsageError("'" + key + "': not a number: " + v);
  }
  if (used != v.size()) throw UsageError("'" + key + "': not a number: " + v);
  return x;
}

struct BoundsRequest {
  bounds::TailBoundInputs in;
  std::optional<double> y1, y2, xi1, xi2;
  StepSchedule::Kind schedule = StepSchedule::Kind::constant;
  std::size_t t_max = 1000000;
  std::vector<std::string> formulas;  // empty: everything computable
};

inline const std::vector<std::string>& bound_formula_names() {
  static const std::vector<std::string> n{
      "avg-weibull-constant", "avg-weibull-inv-sqrt", "avg-poly-constant", "avg-poly-inv-sqrt",
      "tuned-weibull",        "tuned-weibull-light",  "tuned-weibull-heavy", "tuned-poly",
      "tuned-poly-light",     "tuned-poly-heavy",     "crossover-weibull", "crossover-poly",
      "last-weibull",         "last-poly",            "bounded-weibull",   "bounded-poly",
      "avg-generic",          "last-generic",         "gamma"};
  return n;
}

inline BoundsRequest parse_bounds_request(const KeyValues& kv) {
  BoundsRequest r;
  auto& in = r.in;
  const std::map<std::string, double*> scalars{
      {"breg0", &in.breg0}, {"eta", &in.eta},   {"G", &in.G},         {"sigma2", &in.sigma2},
      {"nu", &in.nu},       {"theta", &in.theta}, {"kappa", &in.kappa}, {"p", &in.p},
      {"T", &in.T},         {"delta", &in.delta}, {"C", &in.C}};
  const std::map<std::string, std::optional<double>*> optionals{
      {"D", &in.D}, {"y1", &r.y1}, {"y2", &r.y2}, {"xi1", &r.xi1}, {"xi2", &r.xi2}};
  for (const auto& [key, value] : kv) {
    if (auto it = scalars.find(key); it != scalars.end()) {
      *it->second = parse_number(key, value);
    } else if (auto jt = optionals.find(key); jt != optionals.end()) {
      *jt->second = parse_number(key, value);
    } else if (key == "schedule") {
      if (value == "constant") r.schedule = StepSchedule::Kind::constant;
      else if (value == "inverse-sqrt") r.schedule = StepSchedule::Kind::inverse_sqrt;
      else throw UsageError("schedule must be constant or inverse-sqrt");
    } else if (key == "t_max") {
      const double t = parse_number(key, value);
      if (!(t >= 1.0) || t != std::floor(t)) throw UsageError("t_max must be a positive integer");
      r.t_max = std::size_t(t);
    } else if (key == "formulas") {
      std::istringstream ss(value);
      std::string f;
      while (std::getline(ss, f, ',')) {
        f = trim(f);
        if (f.empty()) continue;
        const auto& names = bound_formula_names();
        if (std::find(names.begin(), names.end(), f) == names.end()) throw UsageError("unknown formula '" + f + "'");
        r.formulas.push_back(f);
      }
    } else {
      throw UsageError("unknown key '" + key + "'");
    }
  }
  return r;
}

struct BoundValue {
  std::string formula;
  std::string value;  // shortest round-trip double, or an integer / "none" for crossovers
};

inline std::vector<BoundValue> eval_bounds(const BoundsRequest& r) {
  using bounds::Case;
  using bounds::Regime;
  std::vector<std::string> wanted = r.formulas;
  if (wanted.empty()) {
    for (const auto& f : bound_formula_names()) {
      if ((f == "bounded-weibull" || f == "bounded-poly") && !r.in.D) continue;
      if (f == "avg-generic" && !(r.y1 && r.y2)) continue;
      if (f == "last-generic" && !(r.xi1 && r.xi2)) continue;
      if (f == "gamma" && !r.y2) continue;
      wanted.push_back(f);
    }
  }
  const auto num = [](double x) { return experiment::format_double(x); };
  const auto need = [](const std::optional<double>& v, const char* key, const std::string& f) {
    if (!v) throw UsageError(f + " needs '" + key + "'");
    return *v;
  };
  const auto integral_T = [&](const std::string& f) {
    if (r.in.T != std::floor(r.in.T)) throw UsageError(f + " needs an integer T");
  };

  std::vector<BoundValue> out;
  for (const std::string& f : wanted) {
    std::string v;
    try {
      if (f == "avg-weibull-constant") v = num(bounds::avg_weibull_bound(Case::constant, r.in));
      else if (f == "avg-weibull-inv-sqrt") v = num(bounds::avg_weibull_bound(Case::inverse_sqrt, r.in));
      else if (f == "avg-poly-constant") v = num(bounds::avg_poly_bound(Case::constant, r.in));
      else if (f == "avg-poly-inv-sqrt") v = num(bounds::avg_poly_bound(Case::inverse_sqrt, r.in));
      else if (f == "tuned-weibull") v = num(bounds::tuned_eta_forms(Regime::weibull, r.in).total);
      else if (f == "tuned-weibull-light") v = num(bounds::tuned_eta_forms(Regime::weibull, r.in).subgaussian);
      else if (f == "tuned-weibull-heavy") v = num(bounds::tuned_eta_forms(Regime::weibull, r.in).heavy_tail);
      else if (f == "tuned-poly") v = num(bounds::tuned_eta_forms(Regime::poly, r.in).total);
      else if (f == "tuned-poly-light") v = num(bounds::tuned_eta_forms(Regime::poly, r.in).subgaussian);
      else if (f == "tuned-poly-heavy") v = num(bounds::tuned_eta_forms(Regime::poly, r.in).heavy_tail);
      else if (f == "crossover-weibull" || f == "crossover-poly") {
        const auto t = bounds::crossover_horizon(f == "crossover-weibull" ? Regime::weibull : Regime::poly, r.in, r.t_max);
        v = t ? std::to_string(*t) : "none";
      } else if (f == "last-weibull") v = num(bounds::last_iterate_bound(Regime::weibull, r.in));
      else if (f == "last-poly") v = num(bounds::last_iterate_bound(Regime::poly, r.in));
      else if (f == "bounded-weibull") v = num(bounds::bounded_domain_bound(Regime::weibull, r.in));
      else if (f == "bounded-poly") v = num(bounds::bounded_domain_bound(Regime::poly, r.in));
      else if (f == "avg-generic") {
        integral_T(f);
        const StepSchedule s{r.schedule, r.in.eta};
        v = num(bounds::avg_generic_bound(
            bounds::MartingaleTailFns::constant(need(r.y1, "y1", f), need(r.y2, "y2", f)), r.in, s));
      } else if (f == "last-generic") {
        v = num(bounds::last_generic_bound(need(r.xi1, "xi1", f), need(r.xi2, "xi2", f), r.in));
      } else if (f == "gamma") {
        integral_T(f);
        if (!(r.in.T >= 1.0)) throw UsageError("gamma needs T >= 1");
        double sum = 0.0;
        for (double e : bounds::step_sizes(StepSchedule{r.schedule, r.in.eta}, std::size_t(r.in.T))) sum += e * e;
        v = num(bounds::gamma_value(need(r.y2, "y2", f), sum * (r.in.G * r.in.G + r.in.sigma2)));
      }
    } catch (const UsageError&) {
      throw;
    } catch (const std::invalid_argument& e) {
      throw UsageError(f + ": " + e.what());
    }
    out.push_back({f, v});
  }
  return out;
}

inline int eval_bounds_command(const KeyValues& kv, std::ostream& out) {
  for (const BoundValue& b : eval_bounds(parse_bounds_request(kv))) out << b.formula << " " << b.value << "\n";
  return kExitOk;
}

// ---- check-invariants -----------------------------------------------------

struct InvariantOptions {
  std::size_t traces = 1000;
  std::uint64_t seed = 1;
  std::vector<std::size_t> horizons{1, 2, 4, 64};
  double rel_tol = diag::kDefaultRelTol;
  unsigned workers = default_workers();
  std::string csv;  // optional artifact path
};

inline std::string suite_csv(const suite::SuiteResult& r) {
  std::string s = "check,traces,instances,failures,min_slack,passed\n";
  for (const auto& c : r.checks)
    s += c.name + "," + std::to_string(c.traces) + "," + std::to_string(c.instances) + "," +
         std::to_string(c.failures) + "," + experiment::format_double(c.min_slack) + "," + (c.passed ? "1" : "0") + "\n";
  return s;
}

inline void print_suite_table(const suite::SuiteResult& r, std::ostream& out) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-22s %7s %10s %8s %14s  %s\n", "check", "traces", "instances", "failed", "min_slack",
                "status");
  out << buf;
  for (const auto& c : r.checks) {
    std::snprintf(buf, sizeof buf, "%-22s %7zu %10zu %8zu %14.6g  %s\n", c.name.c_str(), c.traces, c.instances,
                  c.failures, c.min_slack, c.passed ? "PASS" : "FAIL");
    out << buf;
    if (!c.passed) out << "  worst: " << c.worst_trace << "\n";
  }
  out << (r.passed ? "all invariants hold" : "INVARIANT FAILURE") << " over " << r.traces << " traces\n";
}

inline int check_invariants_command(const InvariantOptions& o, std::ostream& out) {
  if (o.traces < 1) throw UsageError("--traces must be >= 1");
  if (o.horizons.empty()) throw UsageError("--horizons is empty");
  for (std::size_t T : o.horizons)
    if (T < 1) throw UsageError("horizons must be >= 1");
  if (!(o.rel_tol >= 0.0)) throw UsageError("--rel-tol must be >= 0");
  const suite::SuiteResult r = suite::run_trace_suite(o.traces, o.seed, o.horizons, o.rel_tol, o.workers);
  print_suite_table(r, out);
  if (!o.csv.empty()) write_file(o.csv, suite_csv(r));
  return r.passed ? kExitOk : kExitFailed;
}

// ---- validate-concentration -----------------------------------------------

struct ConcentrationOptions {
  std::string prop;  // one of conc::known_props() or "all"
  std::size_t trials = conc::kDefaultTrials;
  std::uint64_t seed = 1;
  unsigned workers = default_workers();
  std::string csv;
};

inline std::string concentration_csv(const std::vector<conc::ReportRow>& rows) {
  std::string s = "prop,label,trials,statistic,std_error,cap,passed\n";
  for (const auto& r : rows)
    s += r.prop + "," + r.label + "," + std::to_string(r.trials) + "," + experiment::format_double(r.statistic) + "," +
         experiment::format_double(r.std_error) + "," + experiment::format_double(r.cap) + "," +
         (r.passed ? "1" : "0") + "\n";
  return s;
}

inline std::vector<conc::ReportRow> run_concentration(const ConcentrationOptions& o,
                                                      const std::function<void(const conc::ReportRow&)>& on_row = {}) {
  std::vector<std::string> props;
  if (o.prop == "all") {
    for (auto p : conc::known_props()) props.emplace_back(p);
  } else {
    const auto& k = conc::known_props();
    if (std::find(k.begin(), k.end(), o.prop) == k.end()) throw UsageError("unknown --prop '" + o.prop + "'");
    props.push_back(o.prop);
  }
  if (o.trials < 1) throw UsageError("--trials must be >= 1");
  const conc::RunContext ctx{o.trials, o.seed, o.workers};
  std::vector<conc::ReportRow> rows;
  for (const auto& p : props) {
    for (const auto& cfg : conc::standard_configurations(p)) {
      for (auto& row : cfg.run(ctx)) {
        if (on_row) on_row(row);
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

inline void print_concentration_row(const conc::ReportRow& r, std::ostream& out) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%-8s %-44s %8zu %12.6g %12.4g %12.6g  %s\n", r.prop.c_str(), r.label.c_str(),
                r.trials, r.statistic, r.std_error, r.cap, r.passed ? "PASS" : "FAIL");
  out << buf << std::flush;
}

inline int validate_concentration_command(const ConcentrationOptions& o, std::ostream& out) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-8s %-44s %8s %12s %12s %12s  %s\n", "prop", "configuration", "trials", "statistic",
                "std_error", "cap", "status");
  out << buf;
  const auto rows = run_concentration(o, [&](const conc::ReportRow& r) { print_concentration_row(r, out); });
  if (!o.csv.empty()) write_file(o.csv, concentration_csv(rows));
  bool ok = true;
  for (const auto& r : rows) ok = ok && r.passed;
  return ok ? kExitOk : kExitFailed;
}

// ---- run-experiment -------------------------------------------------------

struct ExperimentOptions {
  std::string config;  // path to flat JSON; empty uses the presets
  bool desk_scale = false;
  std::optional<std::string> fixed_eta_rule;
  std::optional<std::string> output;
  std::optional<unsigned> workers;
};

inline experiment::ExperimentConfig resolve_experiment_config(const ExperimentOptions& o) {
  nlohmann::json j = nlohmann::json::object();
  if (!o.config.empty()) {
    try {
      j = nlohmann::json::parse(read_file(o.config));
    } catch (const nlohmann::json::exception& e) {
      throw UsageError("config '" + o.config + "': " + e.what());
    }
  }
  if (o.fixed_eta_rule) j["fixed_eta_rule"] = *o.fixed_eta_rule;
  if (o.output) j["output"] = *o.output;
  if (o.workers) j["workers"] = *o.workers;
  try {
    return experiment::load_config(j, o.desk_scale);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

inline int run_experiment_command(const ExperimentOptions& o, std::ostream& out) {
  const experiment::ExperimentConfig c = resolve_experiment_config(o);
  const auto rows = experiment::run_experiment(c);
  experiment::emit_results(rows, c.format, c.output);
  out << "wrote " << rows.size() << " rows to " << c.output << "\n";
  return kExitOk;
}

}  // namespace mirrortail::cli
