#include "mirrortail/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace cli = mirrortail::cli;

namespace {

std::vector<std::size_t> parse_horizons(const std::string& s) {
  std::vector<std::size_t> out;
  std::istringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = cli::trim(item);
    if (item.empty()) continue;
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || item[0] == '-') throw cli::UsageError("bad horizon '" + item + "'");
    out.push_back(std::size_t(v));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mirrortail: stochastic mirror descent under heavy-tailed noise"};
  app.require_subcommand(1);

  auto* exp = app.add_subcommand("run-experiment", "Monte Carlo error sweep; writes a CSV/JSON artifact");
  cli::ExperimentOptions eo;
  std::string eta_rule, output;
  unsigned exp_workers = 0;
  exp->add_option("--config", eo.config, "flat JSON config (all fields optional)")->check(CLI::ExistingFile);
  exp->add_flag("--desk-scale", eo.desk_scale, "2k runs x T up to 1000 instead of 20k x 3000");
  exp->add_option("--fixed-eta-rule", eta_rule, "inv-sqrt-T | inv-T")->check(CLI::IsMember({"inv-sqrt-T", "inv-T"}));
  exp->add_option("--output", output, "artifact path (overrides the config)");
  exp->add_option("--workers", exp_workers, "worker threads")->check(CLI::PositiveNumber);

  auto* eb = app.add_subcommand("eval-bounds", "Evaluate closed-form error bounds from a key = value file");
  std::string kv_path;
  std::vector<std::string> kv_overrides;
  bool list_formulas = false;
  eb->add_option("--config", kv_path, "key = value file")->check(CLI::ExistingFile);
  eb->add_option("assignments", kv_overrides, "extra key=value pairs (override the file)");
  eb->add_flag("--list", list_formulas, "list formula names and exit");

  auto* ci = app.add_subcommand("check-invariants", "Run the deterministic inequality suite over generated traces");
  cli::InvariantOptions io;
  std::string horizons = "1,2,4,64";
  ci->add_option("--traces", io.traces, "number of random traces")->capture_default_str();
  ci->add_option("--seed", io.seed, "base seed")->capture_default_str();
  ci->add_option("--horizons", horizons, "comma-separated horizons")->capture_default_str();
  ci->add_option("--rel-tol", io.rel_tol, "relative slack tolerance")->capture_default_str();
  ci->add_option("--workers", io.workers, "worker threads")->check(CLI::PositiveNumber);
  ci->add_option("--csv", io.csv, "write the summary table as CSV");

  auto* vc = app.add_subcommand("validate-concentration", "Monte Carlo checks of the concentration inequalities");
  cli::ConcentrationOptions co;
  std::vector<std::string> props{"all"};
  for (auto p : mirrortail::conc::known_props()) props.emplace_back(p);
  vc->add_option("--prop", co.prop, "e2|e3|p1|b1|b2|moments|mgf|all")->required()->check(CLI::IsMember(props));
  vc->add_option("--trials", co.trials, "trials per configuration")->capture_default_str();
  vc->add_option("--seed", co.seed, "base seed")->capture_default_str();
  vc->add_option("--workers", co.workers, "worker threads")->check(CLI::PositiveNumber);
  vc->add_option("--csv", co.csv, "write rows as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? cli::kExitOk : cli::kExitUsage;
  }

  try {
    if (exp->parsed()) {
      if (!eta_rule.empty()) eo.fixed_eta_rule = eta_rule;
      if (!output.empty()) eo.output = output;
      if (exp_workers > 0) eo.workers = exp_workers;
      return cli::run_experiment_command(eo, std::cout);
    }
    if (eb->parsed()) {
      if (list_formulas) {
        for (const auto& f : cli::bound_formula_names()) std::cout << f << "\n";
        return cli::kExitOk;
      }
      cli::KeyValues kv = kv_path.empty() ? cli::KeyValues{} : cli::parse_key_values(cli::read_file(kv_path));
      for (const auto& a : kv_overrides) {
        const auto extra = cli::parse_key_values(a);
        for (const auto& [k, v] : extra) kv[k] = v;
      }
      return cli::eval_bounds_command(kv, std::cout);
    }
    if (ci->parsed()) {
      io.horizons = parse_horizons(horizons);
      return cli::check_invariants_command(io, std::cout);
    }
    if (vc->parsed()) return cli::validate_concentration_command(co, std::cout);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kExitFailed;
  }
  return cli::kExitUsage;
}
