#pragma once

#include "mirrortail/noise.hpp"
#include "mirrortail/parallel.hpp"
#include "mirrortail/problem.hpp"
#include "mirrortail/smd.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

// Monte Carlo comparison of average-iterate and last-iterate errors of SMD on
// f(x) = |x| over R under noises with increasingly heavy tails.
namespace mirrortail::experiment {

struct NoiseCell {
  NoiseClass cls = NoiseClass::gaussian;
  double theta_or_p = 0.5;  // 0.5 marks the gaussian (sub-Weibull shape 1/2)

  NoiseSpec spec(double variance) const {
    switch (cls) {
      case NoiseClass::gaussian: return NoiseSpec::gaussian(variance);
      case NoiseClass::sym_weibull: return NoiseSpec::weibull(theta_or_p, variance);
      case NoiseClass::sym_poly: return NoiseSpec::poly(theta_or_p, variance);
    }
    return NoiseSpec::gaussian(variance);
  }
};

enum class Mode { fixed_horizon, anytime };
enum class FixedEtaRule { inv_sqrt_T, inv_T };

struct ExperimentConfig {
  Mode mode = Mode::fixed_horizon;
  std::vector<NoiseCell> noises;
  std::size_t runs = 20000;
  std::vector<std::size_t> T_grid;  // fixed-horizon
  std::size_t max_T = 3000;         // anytime
  std::size_t dense_window = 1000;  // anytime: trailing steps recorded densely
  std::size_t dense_stride = 5;
  std::size_t log_points_per_decade = 20;
  FixedEtaRule eta_rule = FixedEtaRule::inv_sqrt_T;
  double eta = 1.0;  // anytime: eta_t = eta / sqrt(t)
  double x1 = 2.0;
  double noise_variance = 1.0;
  double q = 0.99;
  std::uint64_t base_seed = 20240601;
  bool common_random_numbers = false;
  unsigned workers = default_workers();
  std::string output = "results.csv";
  std::string format = "csv";

  void validate() const {
    if (runs < 1) throw std::invalid_argument("config: runs must be >= 1");
    if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("config: q must lie in (0, 1)");
    if (noises.empty()) throw std::invalid_argument("config: noise list is empty");
    if (mode == Mode::fixed_horizon) {
      if (T_grid.empty()) throw std::invalid_argument("config: T grid is empty");
      for (std::size_t i = 0; i < T_grid.size(); ++i) {
        if (T_grid[i] < 1) throw std::invalid_argument("config: T must be >= 1");
        if (i > 0 && T_grid[i] <= T_grid[i - 1]) throw std::invalid_argument("config: T grid must be strictly increasing");
      }
    } else if (max_T < 1) {
      throw std::invalid_argument("config: max_T must be >= 1");
    }
    if (dense_stride < 1) throw std::invalid_argument("config: dense_stride must be >= 1");
    if (format != "csv" && format != "json") throw std::invalid_argument("config: format must be csv or json");
    for (const NoiseCell& n : noises) n.spec(noise_variance).validate();
  }
};

inline std::vector<NoiseCell> default_noises() {
  return {{NoiseClass::gaussian, 0.5},
          {NoiseClass::sym_weibull, 1.0},
          {NoiseClass::sym_weibull, 2.0},
          {NoiseClass::sym_weibull, 10.0 / 3.0}};
}

// 20k runs, seven horizons from 100 to 3000.
inline ExperimentConfig paper_scale() {
  ExperimentConfig c;
  c.noises = default_noises();
  c.runs = 20000;
  c.T_grid = {100, 200, 400, 700, 1000, 2000, 3000};
  c.max_T = 3000;
  c.dense_stride = 5;
  return c;
}

// 2k runs, horizons up to 1000.
inline ExperimentConfig desk_scale() {
  ExperimentConfig c = paper_scale();
  c.runs = 2000;
  c.T_grid = {100, 150, 250, 400, 600, 800, 1000};
  c.max_T = 1000;
  c.dense_window = 300;
  c.dense_stride = 1;
  return c;
}

// "gaussian", "sym-weibull:<theta>", "sym-poly:<p>"; theta/p may be a
// fraction such as 10/3.
inline NoiseCell parse_noise(const std::string& s) {
  const auto colon = s.find(':');
  const std::string name = s.substr(0, colon);
  double value = 0.0;
  if (colon != std::string::npos) {
    const std::string v = s.substr(colon + 1);
    const auto slash = v.find('/');
    try {
      value = slash == std::string::npos ? std::stod(v) : std::stod(v.substr(0, slash)) / std::stod(v.substr(slash + 1));
    } catch (const std::exception&) {
      throw std::invalid_argument("noise '" + s + "': bad parameter");
    }
  }
  if (name == "gaussian") return {NoiseClass::gaussian, 0.5};
  if (colon == std::string::npos) throw std::invalid_argument("noise '" + s + "': missing parameter");
  if (name == "sym-weibull") return {NoiseClass::sym_weibull, value};
  if (name == "sym-poly") return {NoiseClass::sym_poly, value};
  throw std::invalid_argument("unknown noise class '" + name + "'");
}

// Flat JSON object; every key optional. "scale" picks the preset ("paper" or
// "desk") that the remaining keys override; `desk` forces the desk preset.
inline ExperimentConfig load_config(const nlohmann::json& j, bool desk = false) {
  if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
  static const std::set<std::string> known{
      "scale",  "mode",         "noises",    "runs",           "T_grid",    "max_T",
      "q",      "base_seed",    "output",    "format",         "x1",        "eta",
      "workers", "dense_window", "dense_stride", "log_points_per_decade", "fixed_eta_rule", "noise_variance",
      "common_random_numbers"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) throw std::invalid_argument("config: unknown key '" + it.key() + "'");

  const std::string scale = j.value("scale", std::string(desk ? "desk" : "paper"));
  if (scale != "paper" && scale != "desk") throw std::invalid_argument("config: scale must be paper or desk");
  ExperimentConfig c = desk || scale == "desk" ? desk_scale() : paper_scale();
  try {
    if (j.contains("mode")) {
      const auto m = j.at("mode").get<std::string>();
      if (m == "fixed-horizon") c.mode = Mode::fixed_horizon;
      else if (m == "anytime") c.mode = Mode::anytime;
      else throw std::invalid_argument("config: mode must be fixed-horizon or anytime");
    }
    if (j.contains("noises")) {
      c.noises.clear();
      for (const auto& n : j.at("noises")) c.noises.push_back(parse_noise(n.get<std::string>()));
    }
    if (j.contains("fixed_eta_rule")) {
      const auto r = j.at("fixed_eta_rule").get<std::string>();
      if (r == "inv-sqrt-T") c.eta_rule = FixedEtaRule::inv_sqrt_T;
      else if (r == "inv-T") c.eta_rule = FixedEtaRule::inv_T;
      else throw std::invalid_argument("config: fixed_eta_rule must be inv-sqrt-T or inv-T");
    }
    if (j.contains("runs")) c.runs = j.at("runs").get<std::size_t>();
    if (j.contains("T_grid")) c.T_grid = j.at("T_grid").get<std::vector<std::size_t>>();
    if (j.contains("max_T")) c.max_T = j.at("max_T").get<std::size_t>();
    if (j.contains("dense_window")) c.dense_window = j.at("dense_window").get<std::size_t>();
    if (j.contains("dense_stride")) c.dense_stride = j.at("dense_stride").get<std::size_t>();
    if (j.contains("log_points_per_decade")) c.log_points_per_decade = j.at("log_points_per_decade").get<std::size_t>();
    if (j.contains("q")) c.q = j.at("q").get<double>();
    if (j.contains("base_seed")) c.base_seed = j.at("base_seed").get<std::uint64_t>();
    if (j.contains("output")) c.output = j.at("output").get<std::string>();
    if (j.contains("format")) c.format = j.at("format").get<std::string>();
    if (j.contains("x1")) c.x1 = j.at("x1").get<double>();
    if (j.contains("eta")) c.eta = j.at("eta").get<double>();
    if (j.contains("noise_variance")) c.noise_variance = j.at("noise_variance").get<double>();
    if (j.contains("workers")) c.workers = std::max(1u, j.at("workers").get<unsigned>());
    if (j.contains("common_random_numbers")) c.common_random_numbers = j.at("common_random_numbers").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

struct QuantileSummary {
  NoiseCell noise;
  std::size_t T = 0;
  std::string iterate_kind;  // "average" or "last"
  std::size_t runs = 0;
  double mean_err = 0.0;
  double q = 0.0;
  double quantile_err = 0.0;
  std::uint64_t base_seed = 0;
};

// 1-based nearest-rank index ceil(q n); the 1e-9 guard absorbs products such
// as 0.99 * 100 = 99.00000000000001.
inline std::size_t nearest_rank(double q, std::size_t n) {
  const double r = std::ceil(q * double(n) - 1e-9);
  return std::clamp<std::size_t>(r < 1.0 ? 1 : std::size_t(r), 1, n);
}

struct Aggregate {
  double mean;
  double quantile;
};

inline Aggregate aggregate(std::vector<double> errors, double q) {
  if (errors.empty()) throw std::invalid_argument("aggregate: empty input");
  if (!(q > 0.0 && q < 1.0) && q != 1.0) throw std::invalid_argument("aggregate: q must lie in (0, 1]");
  long double s = 0.0L;
  for (double e : errors) s += e;  // input order is fixed by run index
  const std::size_t k = nearest_rank(q, errors.size());
  std::nth_element(errors.begin(), errors.begin() + std::ptrdiff_t(k - 1), errors.end());
  return {double(s / (long double)errors.size()), errors[k - 1]};
}

inline std::uint64_t cell_key(const NoiseCell& n) {
  std::uint64_t bits = 0;
  static_assert(sizeof bits == sizeof n.theta_or_p);
  std::memcpy(&bits, &n.theta_or_p, sizeof bits);
  return stream_key({std::uint64_t(n.cls), bits});
}

// Seed of one run. With common random numbers the noise cell is left out so
// all noise classes see the same streams.
inline std::uint64_t run_seed(const ExperimentConfig& c, const NoiseCell& n, std::size_t T, std::size_t run) {
  if (c.common_random_numbers) return stream_key({c.base_seed, std::uint64_t(T), std::uint64_t(run)});
  return stream_key({c.base_seed, cell_key(n), std::uint64_t(T), std::uint64_t(run)});
}

struct Problem1D {
  MirrorSetup setup = MirrorSetup::euclidean();
  OracleProblem problem{Objective::abs_sum, Point::Zero(1), MirrorSetup::euclidean()};
};

inline Point start_point(double x1) {
  Point p(1);
  p[0] = x1;
  return p;
}

inline double fixed_eta(const ExperimentConfig& c, std::size_t T) {
  return c.eta_rule == FixedEtaRule::inv_sqrt_T ? 1.0 / std::sqrt(double(T)) : 1.0 / double(T);
}

// Errors of x_T and of the mean of x_1 .. x_T (T - 1 updates).
struct RunErrors {
  double average;
  double last;
};

inline RunErrors run_fixed_horizon(const Problem1D& p, const NoiseSpec& noise, double eta, std::size_t T, double x1,
                                   std::uint64_t seed) {
  MirrorDescent smd(p.problem, p.setup, StepSchedule::constant(eta), noise, start_point(x1), seed);
  for (std::size_t t = 1; t < T; ++t) smd.advance();
  return {smd.error_average(), smd.error_last()};
}

inline std::vector<QuantileSummary> fixed_horizon_experiment(const ExperimentConfig& c) {
  c.validate();
  if (c.mode != Mode::fixed_horizon) throw std::invalid_argument("fixed_horizon_experiment: mode is anytime");
  const Problem1D p;
  std::vector<QuantileSummary> out;
  for (const NoiseCell& n : c.noises) {
    const NoiseSpec spec = n.spec(c.noise_variance);
    for (std::size_t T : c.T_grid) {
      std::vector<RunErrors> errs(c.runs);
      parallel_for(c.runs, c.workers, [&](std::size_t r) {
        errs[r] = run_fixed_horizon(p, spec, fixed_eta(c, T), T, c.x1, run_seed(c, n, T, r));
      });
      std::vector<double> avg(c.runs), last(c.runs);
      for (std::size_t r = 0; r < c.runs; ++r) {
        avg[r] = errs[r].average;
        last[r] = errs[r].last;
      }
      const Aggregate a = aggregate(std::move(avg), c.q);
      const Aggregate l = aggregate(std::move(last), c.q);
      out.push_back({n, T, "average", c.runs, a.mean, c.q, a.quantile, c.base_seed});
      out.push_back({n, T, "last", c.runs, l.mean, c.q, l.quantile, c.base_seed});
    }
  }
  return out;
}

// Logarithmic grid from 1 to max_T plus every dense_stride-th step of the
// trailing window (always including max_T).
inline std::vector<std::size_t> anytime_checkpoints(const ExperimentConfig& c) {
  std::set<std::size_t> pts{1, c.max_T};
  const double per = double(std::max<std::size_t>(1, c.log_points_per_decade));
  for (std::size_t k = 0;; ++k) {
    const double v = std::round(std::pow(10.0, double(k) / per));
    if (v > double(c.max_T)) break;
    pts.insert(std::size_t(v));
  }
  const std::size_t start = c.max_T > c.dense_window ? c.max_T - c.dense_window + 1 : 1;
  for (long long t = (long long)c.max_T; t >= (long long)start; t -= (long long)c.dense_stride) pts.insert(std::size_t(t));
  return {pts.begin(), pts.end()};
}

inline std::vector<QuantileSummary> anytime_experiment(const ExperimentConfig& c) {
  c.validate();
  if (c.mode != Mode::anytime) throw std::invalid_argument("anytime_experiment: mode is fixed-horizon");
  const Problem1D p;
  const std::vector<std::size_t> cps = anytime_checkpoints(c);
  const std::size_t K = cps.size();
  std::vector<QuantileSummary> out;
  for (const NoiseCell& n : c.noises) {
    const NoiseSpec spec = n.spec(c.noise_variance);
    // Row-major [run][checkpoint] for each iterate kind.
    std::vector<double> avg(c.runs * K), last(c.runs * K);
    parallel_for(c.runs, c.workers, [&](std::size_t r) {
      MirrorDescent smd(p.problem, p.setup, StepSchedule::inverse_sqrt(c.eta), spec, start_point(c.x1),
                        run_seed(c, n, c.max_T, r));
      std::size_t k = 0;
      for (std::size_t t = 1; k < K; ++t) {
        if (t == cps[k]) {
          avg[r * K + k] = smd.error_average();
          last[r * K + k] = smd.error_last();
          ++k;
        }
        if (k < K) smd.advance();
      }
    });
    for (std::size_t k = 0; k < K; ++k) {
      std::vector<double> a(c.runs), l(c.runs);
      for (std::size_t r = 0; r < c.runs; ++r) {
        a[r] = avg[r * K + k];
        l[r] = last[r * K + k];
      }
      const Aggregate ga = aggregate(std::move(a), c.q);
      const Aggregate gl = aggregate(std::move(l), c.q);
      out.push_back({n, cps[k], "average", c.runs, ga.mean, c.q, ga.quantile, c.base_seed});
      out.push_back({n, cps[k], "last", c.runs, gl.mean, c.q, gl.quantile, c.base_seed});
    }
  }
  return out;
}

inline std::vector<QuantileSummary> run_experiment(const ExperimentConfig& c) {
  return c.mode == Mode::fixed_horizon ? fixed_horizon_experiment(c) : anytime_experiment(c);
}

// Shortest representation that parses back to the same double.
inline std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline const char* kCsvHeader = "noise_class,theta_or_p,T,iterate_kind,runs,mean_err,q,quantile_err,base_seed";

inline std::string to_csv(const std::vector<QuantileSummary>& rows) {
  std::string s = std::string(kCsvHeader) + "\n";
  for (const QuantileSummary& r : rows) {
    s += std::string(to_string(r.noise.cls)) + "," + format_double(r.noise.theta_or_p) + "," + std::to_string(r.T) + "," +
         r.iterate_kind + "," + std::to_string(r.runs) + "," + format_double(r.mean_err) + "," + format_double(r.q) +
         "," + format_double(r.quantile_err) + "," + std::to_string(r.base_seed) + "\n";
  }
  return s;
}

inline nlohmann::json to_json(const std::vector<QuantileSummary>& rows) {
  nlohmann::json a = nlohmann::json::array();
  for (const QuantileSummary& r : rows) {
    a.push_back({{"noise_class", std::string(to_string(r.noise.cls))},
                 {"theta_or_p", r.noise.theta_or_p},
                 {"T", r.T},
                 {"iterate_kind", r.iterate_kind},
                 {"runs", r.runs},
                 {"mean_err", r.mean_err},
                 {"q", r.q},
                 {"quantile_err", r.quantile_err},
                 {"base_seed", r.base_seed}});
  }
  return a;
}

inline void emit_results(const std::vector<QuantileSummary>& rows, const std::string& format, const std::string& path) {
  if (rows.empty()) throw std::invalid_argument("emit_results: no summaries");
  std::string body;
  if (format == "csv") body = to_csv(rows);
  else if (format == "json") body = to_json(rows).dump(2) + "\n";
  else throw std::invalid_argument("emit_results: format must be csv or json");
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << body;
  f.close();
  if (!f) throw std::runtime_error("failed writing '" + path + "'");
}

}  // namespace mirrortail::experiment
