#pragma once

// `v2i solve|sweep|optimize|simulate|compare --scenario <path> [--out <path>]
//  [--seed <u64>] [--tolerance <pct>]`
//
// Exit codes: 0 success, 1 usage or scenario error, 2 numeric failure,
// 3 compare outside tolerance.

#include <CLI11.hpp>

#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "v2i/csv.hpp"
#include "v2i/des_oracle.hpp"
#include "v2i/pipeline.hpp"
#include "v2i/retry_optimizer.hpp"
#include "v2i/scenario.hpp"
#include "v2i/units.hpp"

namespace v2i::cli {

inline constexpr std::string_view kVersion = "1.0.0";

enum ExitCode : int { kOk = 0, kUsage = 1, kNumeric = 2, kOutOfTolerance = 3 };

struct Options {
  std::string command;
  std::optional<std::string> scenario_path;
  std::optional<std::string> out_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> tolerance_pct;
};

namespace detail {

inline const std::vector<std::string>& metric_columns() {
  static const std::vector<std::string> cols = {
      "v_kmh", "cw_min", "m", "k_vpkm", "lambda_tag_veh_s", "n_mean", "n", "tau", "p_c", "p_tran", "p_s",
      "e_t_slot_s", "rho", "p_b", "s_bps", "s_classic_bps", "t_delay_s", "t_delay_weighted_s", "s_clamped"};
  return cols;
}

inline std::vector<std::string> metric_cells(const ModelInputs& in, const Metrics& m) {
  return {cell(units::mps_to_kmh(in.v)), cell(in.mac.cw_min), cell(in.mac.m),
          cell(units::per_m_to_per_km(m.k)), cell(m.lambda_tag), cell(m.n_mean), cell(m.n), cell(m.tau),
          cell(m.p_c), cell(m.p_tran), cell(m.p_s), cell(m.e_t_slot), cell(m.rho), cell(m.p_block), cell(m.s),
          cell(m.s_classic), cell(m.t_delay), cell(m.t_delay_weighted), cell(m.s_clamped)};
}

template <typename... Parts>
std::vector<std::string> concat(Parts&&... parts) {
  std::vector<std::string> out;
  (out.insert(out.end(), parts.begin(), parts.end()), ...);
  return out;
}

inline void write_metadata(CsvWriter& csv, const std::string& command, const Scenario& s) {
  csv.comment("v2i " + std::string(kVersion));
  csv.comment("command: " + command);
  csv.comment("scenario_hash: " + scenario_hash(s));
  csv.comment("seed: " + std::to_string(s.sim.seed));
  csv.comment("resolved scenario:");
  std::istringstream echo(echo_scenario(s));
  for (std::string line; std::getline(echo, line);) {
    if (!line.empty()) csv.comment(line);
  }
}

/// Contending-station count used for simulation: the override if present,
/// otherwise round(N_mean).
inline std::uint32_t station_count(const ModelInputs& in) {
  if (in.n_override) return *in.n_override;
  return point_population(traffic_state(in.traffic, in.v));
}

inline int cmd_solve(const Scenario& s, CsvWriter& csv) {
  const ModelInputs in = to_model_inputs(s);
  csv.row(metric_columns());
  csv.row(metric_cells(in, evaluate(in)));
  return kOk;
}

inline int cmd_sweep(const Scenario& s, CsvWriter& csv) {
  csv.row(concat(std::vector<std::string>{s.sweep.variable}, metric_columns()));
  for (double value : sweep_values(s.sweep)) {
    Scenario point = s;
    set_sweep_value(point, s.sweep.variable, value);
    const ModelInputs in = to_model_inputs(point);
    csv.row(concat(std::vector<std::string>{cell(value)}, metric_cells(in, evaluate(in))));
  }
  return kOk;
}

inline std::vector<std::string> optimize_cells(const OptimizationRequest& req, const RetryRow& row,
                                               std::string_view kind, bool feasible) {
  ModelInputs in = req.scenario;
  in.mac.m = row.m;
  return concat(std::vector<std::string>{std::string(kind), cell(feasible), cell(row.delay)},
                metric_cells(in, row.metrics));
}

inline int cmd_optimize(const Scenario& s, CsvWriter& csv) {
  const std::vector<std::string> head = {"row", "feasible", "constrained_delay_s"};
  if (!s.optimize.sweep) {
    const OptimizationRequest req = to_optimization_request(s);
    const OptimizationResult res = optimize_retry(req);
    csv.row(concat(head, metric_columns()));
    for (const auto& row : res.per_m) csv.row(optimize_cells(req, row, "per_m", row.feasible));
    csv.row(optimize_cells(req, res.best(), "m_star", res.feasible));
    return kOk;
  }
  csv.row(concat(std::vector<std::string>{s.sweep.variable}, head, metric_columns()));
  for (double value : sweep_values(s.sweep)) {
    Scenario point = s;
    set_sweep_value(point, s.sweep.variable, value);
    const OptimizationRequest req = to_optimization_request(point);
    const OptimizationResult res = optimize_retry(req);
    csv.row(concat(std::vector<std::string>{cell(value)}, optimize_cells(req, res.best(), "m_star", res.feasible)));
  }
  return kOk;
}

inline int cmd_simulate(const Scenario& s, CsvWriter& csv) {
  const SimReport rep = run_simulation(to_sim_config(s, station_count(to_model_inputs(s))));
  SlotCounts total;
  for (const auto& r : rep.replications) {
    total.slots += r.slots;
    total.idle += r.idle;
    total.successes += r.successes;
    total.collisions += r.collisions;
  }
  const auto& c = rep.config;
  csv.row({"n", "cw_min", "m", "horizon_slots", "replications", "seed", "tau_hat", "tau_ci95", "pc_hat", "pc_ci95",
           "throughput_bps", "throughput_ci95", "delay_s", "delay_ci95", "discard_rate", "discard_ci95", "slots",
           "idle", "successes", "collisions"});
  csv.row({cell(c.n), cell(c.mac.cw_min), cell(c.mac.m), cell(c.horizon_slots), cell(c.replications), cell(c.seed),
           cell(rep.tau.mean), cell(rep.tau.ci95), cell(rep.p_c.mean), cell(rep.p_c.ci95),
           cell(rep.throughput.mean), cell(rep.throughput.ci95), cell(rep.delay.mean), cell(rep.delay.ci95),
           cell(rep.discard_rate.mean), cell(rep.discard_rate.ci95), cell(total.slots), cell(total.idle),
           cell(total.successes), cell(total.collisions)});
  return kOk;
}

inline int cmd_compare(const Scenario& s, CsvWriter& csv) {
  const ModelInputs in = to_model_inputs(s);
  const std::uint32_t n = station_count(in);
  const SimReport rep = run_simulation(to_sim_config(s, n));
  const MacEvaluation analytic = evaluate_mac(n, in.mac, in.queue, in.tol);
  const ComparisonTable table = compare(rep, analytic.fp, analytic.perf, to_tolerances(s));
  csv.row({"metric", "analytic", "simulated", "ci95", "rel_error", "tolerance", "pass"});
  for (const auto& r : table.rows) {
    csv.row({r.metric, cell(r.analytic), cell(r.simulated), cell(r.ci95), cell(r.rel_error), cell(r.tolerance),
             cell(r.pass)});
  }
  return table.all_pass() ? kOk : kOutOfTolerance;
}

}  // namespace detail

/// Runs one subcommand against an already-parsed option set.
inline int execute(const Options& opt, std::ostream& out, std::ostream& err) {
  static const std::map<std::string, std::function<int(const Scenario&, CsvWriter&)>> kCommands = {
      {"solve", detail::cmd_solve},       {"sweep", detail::cmd_sweep},     {"optimize", detail::cmd_optimize},
      {"simulate", detail::cmd_simulate}, {"compare", detail::cmd_compare},
  };
  const auto command = kCommands.find(opt.command);
  if (command == kCommands.end()) {
    err << "v2i: unknown command '" << opt.command << "'\n";
    return kUsage;
  }

  Scenario scenario;
  try {
    if (opt.scenario_path) scenario = load_scenario(*opt.scenario_path);
    if (opt.seed) scenario.sim.seed = *opt.seed;
    if (opt.tolerance_pct) {
      const double t = *opt.tolerance_pct;
      scenario.compare = {t, t, t, t};
    }
    validate_scenario(scenario);
  } catch (const ScenarioError& e) {
    err << "v2i: scenario error: " << e.what() << '\n';
    return kUsage;
  }

  std::ostringstream buffer;
  int code = kOk;
  try {
    CsvWriter csv(buffer);
    detail::write_metadata(csv, opt.command, scenario);
    code = command->second(scenario, csv);
  } catch (const ScenarioError& e) {
    err << "v2i: scenario error: " << e.what() << '\n';
    return kUsage;
  } catch (const DomainError& e) {
    err << "v2i: numeric failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const ConvergenceError& e) {
    err << "v2i: numeric failure: " << e.what() << '\n';
    return kNumeric;
  }

  if (opt.out_path) {
    std::ofstream file(*opt.out_path, std::ios::binary);
    if (!file) {
      err << "v2i: cannot write '" << *opt.out_path << "'\n";
      return kUsage;
    }
    file << buffer.str();
  } else {
    out << buffer.str();
  }
  if (code == kOutOfTolerance) err << "v2i: comparison outside tolerance\n";
  return code;
}

/// Full command line, argv[0] included.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Analytical V2I 802.11 DCF model: solve, sweep, optimize, simulate, compare", "v2i"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  Options opt;
  std::string scenario_path;
  std::string out_path;
  std::uint64_t seed = 0;
  double tolerance = 0.0;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"solve", "Evaluate the model at one operating point"},
      {"sweep", "Evaluate the model over the [sweep] range"},
      {"optimize", "Choose the retry limit m under the delay bound"},
      {"simulate", "Run the slotted DCF simulator"},
      {"compare", "Simulate and compare against the analytic fixed point"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--scenario", scenario_path, "Scenario file ([section] / key = value)")->check(CLI::ExistingFile);
    sub->add_option("--out", out_path, "Write CSV here instead of stdout");
    sub->add_option("--seed", seed, "Override [sim] seed");
    sub->add_option("--tolerance", tolerance, "Override every compare tolerance (percent)")
        ->check(CLI::NonNegativeNumber);
  }

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  CLI::App* chosen = app.get_subcommands().front();
  opt.command = chosen->get_name();
  if (chosen->count("--scenario")) opt.scenario_path = scenario_path;
  if (chosen->count("--out")) opt.out_path = out_path;
  if (chosen->count("--seed")) opt.seed = seed;
  if (chosen->count("--tolerance")) opt.tolerance_pct = tolerance;
  return execute(opt, out, err);
}

}  // namespace v2i::cli
