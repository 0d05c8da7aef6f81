#pragma once

// Scenario files: line-oriented `[section]` headers and `key = value` pairs,
// `#` starts a comment. Units live in the key names. Every key has a default,
// so an empty file is the full default scenario; unknown sections or keys are
// errors.
//
// [traffic] k_jam_vpkm=120 v_f_kmh=160 l_cov_m=1000 v_kmh=80
//           lambda_veh_s=<unset> flow_branch=uncongested n=<unset> population=point
// [mac]     cw_min=32 m=7 slot_us=50 sifs_us=10 difs_us=50 ack_us=50
//           header_bits=400 prop_delay_us=1 rate_bps=2000000 payload_bytes=1000 fp_tol=1e-10
// [queue]   k=50 lambda_pkt_s=1.5
// [sweep]   variable=v_kmh from=10 to=150 step=10
// [optimize] delay_bound_s=0.5 delay_metric=weighted m_lo=0 m_hi=10 sweep=false
// [sim]     horizon_slots=1000000 seed=1 replications=10
// [compare] tol_tau_pct=5 tol_pc_pct=5 tol_throughput_pct=5 tol_delay_pct=10

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "v2i/des_oracle.hpp"
#include "v2i/error.hpp"
#include "v2i/pipeline.hpp"
#include "v2i/retry_optimizer.hpp"
#include "v2i/units.hpp"

namespace v2i {

struct Scenario {
  struct Traffic {
    double k_jam_vpkm = 120.0;
    double v_f_kmh = 160.0;
    double l_cov_m = 1000.0;
    double v_kmh = 80.0;
    std::optional<double> lambda_veh_s;
    FlowBranch flow_branch = FlowBranch::kUncongested;
    std::optional<std::uint32_t> n;
    PopulationMode population = PopulationMode::kPoint;
    bool operator==(const Traffic&) const = default;
  } traffic;

  struct Mac {
    std::uint32_t cw_min = 32;
    std::uint32_t m = 7;
    double slot_us = 50.0;
    double sifs_us = 10.0;
    double difs_us = 50.0;
    double ack_us = 50.0;
    double header_bits = 400.0;
    double prop_delay_us = 1.0;
    double rate_bps = 2e6;
    double payload_bytes = 1000.0;
    double fp_tol = kDefaultFixedPointTol;
    bool operator==(const Mac&) const = default;
  } mac;

  struct Queue {
    std::uint32_t k = 50;
    double lambda_pkt_s = 1.5;
    bool operator==(const Queue&) const = default;
  } queue;

  struct Sweep {
    std::string variable = "v_kmh";
    double from = 10.0;
    double to = 150.0;
    double step = 10.0;
    bool operator==(const Sweep&) const = default;
  } sweep;

  struct Optimize {
    double delay_bound_s = 0.5;
    DelayMetric delay_metric = DelayMetric::kWeighted;
    std::uint32_t m_lo = 0;
    std::uint32_t m_hi = 10;
    bool sweep = false;
    bool operator==(const Optimize&) const = default;
  } optimize;

  struct Sim {
    std::uint64_t horizon_slots = 1'000'000;
    std::uint64_t seed = 1;
    std::uint32_t replications = 10;
    bool operator==(const Sim&) const = default;
  } sim;

  struct Compare {
    double tol_tau_pct = 5.0;
    double tol_pc_pct = 5.0;
    double tol_throughput_pct = 5.0;
    double tol_delay_pct = 10.0;
    bool operator==(const Compare&) const = default;
  } compare;

  bool operator==(const Scenario&) const = default;
};

/// Shortest text that parses back to the same double. Integral values below
/// 1e15 are written without an exponent.
inline std::string format_number(double x) {
  char buf[64];
  const bool integral = std::isfinite(x) && x == std::trunc(x) && std::abs(x) < 1e15;
  const auto res = integral ? std::to_chars(buf, buf + sizeof buf, x, std::chars_format::fixed)
                            : std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view text, std::string_view key) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, value);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw ScenarioError("invalid value '" + std::string(text) + "' for key '" + std::string(key) + "'");
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(value)) {
      throw ScenarioError("non-finite value for key '" + std::string(key) + "'");
    }
  }
  return value;
}

inline std::uint32_t parse_u32(std::string_view text, std::string_view key) {
  const auto v = parse_number<std::uint64_t>(text, key);
  if (v > 0xffffffffull) throw ScenarioError("value out of range for key '" + std::string(key) + "'");
  return static_cast<std::uint32_t>(v);
}

inline bool parse_bool(std::string_view text, std::string_view key) {
  if (text == "true") return true;
  if (text == "false") return false;
  throw ScenarioError("expected true/false for key '" + std::string(key) + "'");
}

template <typename Enum>
Enum parse_choice(std::string_view text, std::string_view key,
                  std::initializer_list<std::pair<std::string_view, Enum>> choices) {
  for (const auto& [name, value] : choices) {
    if (text == name) return value;
  }
  std::string allowed;
  for (const auto& c : choices) allowed += (allowed.empty() ? "" : "|") + std::string(c.first);
  throw ScenarioError("expected " + allowed + " for key '" + std::string(key) + "'");
}

inline std::string_view branch_name(FlowBranch b) {
  return b == FlowBranch::kUncongested ? "uncongested" : "congested";
}
inline std::string_view population_name(PopulationMode p) {
  return p == PopulationMode::kPoint ? "point" : "mixture";
}
inline std::string_view metric_name(DelayMetric d) { return d == DelayMetric::kRaw ? "raw" : "weighted"; }

struct KeyDef {
  std::string_view section;
  std::string_view key;
  bool sweepable;
  std::function<void(Scenario&, std::string_view)> set;
  std::function<std::optional<std::string>(const Scenario&)> get;  // nullopt: unset, omitted from echo
};

template <typename T>
std::optional<std::string> text_of(const T& v) {
  if constexpr (std::is_same_v<T, double>) {
    return format_number(v);
  } else {
    return std::to_string(v);
  }
}

// clang-format off
inline const std::vector<KeyDef>& key_table() {
  using S = Scenario;
  using SV = std::string_view;
  static const std::vector<KeyDef> table = {
    {"traffic", "k_jam_vpkm", true, [](S& s, SV v) { s.traffic.k_jam_vpkm = parse_number<double>(v, "k_jam_vpkm"); },
                                     [](const S& s) { return text_of(s.traffic.k_jam_vpkm); }},
    {"traffic", "v_f_kmh", true, [](S& s, SV v) { s.traffic.v_f_kmh = parse_number<double>(v, "v_f_kmh"); },
                                  [](const S& s) { return text_of(s.traffic.v_f_kmh); }},
    {"traffic", "l_cov_m", true, [](S& s, SV v) { s.traffic.l_cov_m = parse_number<double>(v, "l_cov_m"); },
                                  [](const S& s) { return text_of(s.traffic.l_cov_m); }},
    {"traffic", "v_kmh", true, [](S& s, SV v) { s.traffic.v_kmh = parse_number<double>(v, "v_kmh"); s.traffic.lambda_veh_s.reset(); },
                                [](const S& s) { return s.traffic.lambda_veh_s ? std::nullopt : text_of(s.traffic.v_kmh); }},
    {"traffic", "lambda_veh_s", true, [](S& s, SV v) { s.traffic.lambda_veh_s = parse_number<double>(v, "lambda_veh_s"); s.traffic.v_kmh = Scenario::Traffic{}.v_kmh; },
                                       [](const S& s) { return s.traffic.lambda_veh_s ? text_of(*s.traffic.lambda_veh_s) : std::nullopt; }},
    {"traffic", "flow_branch", false, [](S& s, SV v) { s.traffic.flow_branch = parse_choice<FlowBranch>(v, "flow_branch", {{"uncongested", FlowBranch::kUncongested}, {"congested", FlowBranch::kCongested}}); },
                                       [](const S& s) { return std::optional<std::string>(branch_name(s.traffic.flow_branch)); }},
    {"traffic", "n", true, [](S& s, SV v) { s.traffic.n = parse_u32(v, "n"); },
                            [](const S& s) { return s.traffic.n ? text_of(*s.traffic.n) : std::nullopt; }},
    {"traffic", "population", false, [](S& s, SV v) { s.traffic.population = parse_choice<PopulationMode>(v, "population", {{"point", PopulationMode::kPoint}, {"mixture", PopulationMode::kMixture}}); },
                                      [](const S& s) { return std::optional<std::string>(population_name(s.traffic.population)); }},

    {"mac", "cw_min", true, [](S& s, SV v) { s.mac.cw_min = parse_u32(v, "cw_min"); }, [](const S& s) { return text_of(s.mac.cw_min); }},
    {"mac", "m", true, [](S& s, SV v) { s.mac.m = parse_u32(v, "m"); }, [](const S& s) { return text_of(s.mac.m); }},
    {"mac", "slot_us", true, [](S& s, SV v) { s.mac.slot_us = parse_number<double>(v, "slot_us"); }, [](const S& s) { return text_of(s.mac.slot_us); }},
    {"mac", "sifs_us", true, [](S& s, SV v) { s.mac.sifs_us = parse_number<double>(v, "sifs_us"); }, [](const S& s) { return text_of(s.mac.sifs_us); }},
    {"mac", "difs_us", true, [](S& s, SV v) { s.mac.difs_us = parse_number<double>(v, "difs_us"); }, [](const S& s) { return text_of(s.mac.difs_us); }},
    {"mac", "ack_us", true, [](S& s, SV v) { s.mac.ack_us = parse_number<double>(v, "ack_us"); }, [](const S& s) { return text_of(s.mac.ack_us); }},
    {"mac", "header_bits", true, [](S& s, SV v) { s.mac.header_bits = parse_number<double>(v, "header_bits"); }, [](const S& s) { return text_of(s.mac.header_bits); }},
    {"mac", "prop_delay_us", true, [](S& s, SV v) { s.mac.prop_delay_us = parse_number<double>(v, "prop_delay_us"); }, [](const S& s) { return text_of(s.mac.prop_delay_us); }},
    {"mac", "rate_bps", true, [](S& s, SV v) { s.mac.rate_bps = parse_number<double>(v, "rate_bps"); }, [](const S& s) { return text_of(s.mac.rate_bps); }},
    {"mac", "payload_bytes", true, [](S& s, SV v) { s.mac.payload_bytes = parse_number<double>(v, "payload_bytes"); }, [](const S& s) { return text_of(s.mac.payload_bytes); }},
    {"mac", "fp_tol", false, [](S& s, SV v) { s.mac.fp_tol = parse_number<double>(v, "fp_tol"); }, [](const S& s) { return text_of(s.mac.fp_tol); }},

    {"queue", "k", true, [](S& s, SV v) { s.queue.k = parse_u32(v, "k"); }, [](const S& s) { return text_of(s.queue.k); }},
    {"queue", "lambda_pkt_s", true, [](S& s, SV v) { s.queue.lambda_pkt_s = parse_number<double>(v, "lambda_pkt_s"); }, [](const S& s) { return text_of(s.queue.lambda_pkt_s); }},

    {"sweep", "variable", false, [](S& s, SV v) { s.sweep.variable = std::string(v); }, [](const S& s) { return std::optional<std::string>(s.sweep.variable); }},
    {"sweep", "from", false, [](S& s, SV v) { s.sweep.from = parse_number<double>(v, "from"); }, [](const S& s) { return text_of(s.sweep.from); }},
    {"sweep", "to", false, [](S& s, SV v) { s.sweep.to = parse_number<double>(v, "to"); }, [](const S& s) { return text_of(s.sweep.to); }},
    {"sweep", "step", false, [](S& s, SV v) { s.sweep.step = parse_number<double>(v, "step"); }, [](const S& s) { return text_of(s.sweep.step); }},

    {"optimize", "delay_bound_s", false, [](S& s, SV v) { s.optimize.delay_bound_s = parse_number<double>(v, "delay_bound_s"); }, [](const S& s) { return text_of(s.optimize.delay_bound_s); }},
    {"optimize", "delay_metric", false, [](S& s, SV v) { s.optimize.delay_metric = parse_choice<DelayMetric>(v, "delay_metric", {{"weighted", DelayMetric::kWeighted}, {"raw", DelayMetric::kRaw}}); },
                                         [](const S& s) { return std::optional<std::string>(metric_name(s.optimize.delay_metric)); }},
    {"optimize", "m_lo", false, [](S& s, SV v) { s.optimize.m_lo = parse_u32(v, "m_lo"); }, [](const S& s) { return text_of(s.optimize.m_lo); }},
    {"optimize", "m_hi", false, [](S& s, SV v) { s.optimize.m_hi = parse_u32(v, "m_hi"); }, [](const S& s) { return text_of(s.optimize.m_hi); }},
    {"optimize", "sweep", false, [](S& s, SV v) { s.optimize.sweep = parse_bool(v, "sweep"); }, [](const S& s) { return std::optional<std::string>(s.optimize.sweep ? "true" : "false"); }},

    {"sim", "horizon_slots", false, [](S& s, SV v) { s.sim.horizon_slots = parse_number<std::uint64_t>(v, "horizon_slots"); }, [](const S& s) { return text_of(s.sim.horizon_slots); }},
    {"sim", "seed", false, [](S& s, SV v) { s.sim.seed = parse_number<std::uint64_t>(v, "seed"); }, [](const S& s) { return text_of(s.sim.seed); }},
    {"sim", "replications", false, [](S& s, SV v) { s.sim.replications = parse_u32(v, "replications"); }, [](const S& s) { return text_of(s.sim.replications); }},

    {"compare", "tol_tau_pct", false, [](S& s, SV v) { s.compare.tol_tau_pct = parse_number<double>(v, "tol_tau_pct"); }, [](const S& s) { return text_of(s.compare.tol_tau_pct); }},
    {"compare", "tol_pc_pct", false, [](S& s, SV v) { s.compare.tol_pc_pct = parse_number<double>(v, "tol_pc_pct"); }, [](const S& s) { return text_of(s.compare.tol_pc_pct); }},
    {"compare", "tol_throughput_pct", false, [](S& s, SV v) { s.compare.tol_throughput_pct = parse_number<double>(v, "tol_throughput_pct"); }, [](const S& s) { return text_of(s.compare.tol_throughput_pct); }},
    {"compare", "tol_delay_pct", false, [](S& s, SV v) { s.compare.tol_delay_pct = parse_number<double>(v, "tol_delay_pct"); }, [](const S& s) { return text_of(s.compare.tol_delay_pct); }},
  };
  return table;
}
// clang-format on

inline const KeyDef* find_key(std::string_view section, std::string_view key) {
  for (const auto& def : key_table()) {
    if (def.section == section && def.key == key) return &def;
  }
  return nullptr;
}

inline bool known_section(std::string_view section) {
  for (const auto& def : key_table()) {
    if (def.section == section) return true;
  }
  return false;
}

}  // namespace detail

/// Model inputs in SI units. Throws DomainError on out-of-range values.
inline ModelInputs to_model_inputs(const Scenario& s) {
  ModelInputs in;
  in.traffic.k_jam = units::per_km_to_per_m(s.traffic.k_jam_vpkm);
  in.traffic.v_free = units::kmh_to_mps(s.traffic.v_f_kmh);
  in.traffic.l_cov = s.traffic.l_cov_m;
  in.traffic.validate();
  in.v = s.traffic.lambda_veh_s ? speed_for_flow(in.traffic, *s.traffic.lambda_veh_s, s.traffic.flow_branch)
                                : units::kmh_to_mps(s.traffic.v_kmh);
  if (!(in.v > 0.0) || in.v > in.traffic.v_free) {
    throw DomainError("v_kmh must satisfy 0 < v_kmh <= v_f_kmh");
  }
  in.n_override = s.traffic.n;
  if (in.n_override && *in.n_override < 1) throw DomainError("n must be >= 1");
  in.population = s.traffic.population;

  in.mac.cw_min = s.mac.cw_min;
  in.mac.m = s.mac.m;
  in.mac.slot = units::us_to_s(s.mac.slot_us);
  in.mac.sifs = units::us_to_s(s.mac.sifs_us);
  in.mac.difs = units::us_to_s(s.mac.difs_us);
  in.mac.ack = units::us_to_s(s.mac.ack_us);
  in.mac.channel_rate = s.mac.rate_bps;
  in.mac.t_header = s.mac.header_bits / s.mac.rate_bps;
  in.mac.t_prop = units::us_to_s(s.mac.prop_delay_us);
  in.mac.payload_bits = units::bytes_to_bits(s.mac.payload_bytes);
  in.mac.validate();
  detail::require(s.mac.fp_tol > 0.0, "fp_tol must be > 0");
  in.tol = s.mac.fp_tol;

  in.queue.capacity_k = s.queue.k;
  in.queue.lambda_pkt = s.queue.lambda_pkt_s;
  in.queue.validate();
  return in;
}

inline OptimizationRequest to_optimization_request(const Scenario& s) {
  OptimizationRequest req;
  req.scenario = to_model_inputs(s);
  req.m_lo = s.optimize.m_lo;
  req.m_hi = s.optimize.m_hi;
  req.delay_bound = s.optimize.delay_bound_s;
  req.metric = s.optimize.delay_metric;
  req.validate();
  return req;
}

inline SimConfig to_sim_config(const Scenario& s, std::uint32_t n) {
  SimConfig cfg;
  cfg.n = n;
  cfg.mac = to_model_inputs(s).mac;
  cfg.horizon_slots = s.sim.horizon_slots;
  cfg.seed = s.sim.seed;
  cfg.replications = s.sim.replications;
  cfg.validate();
  return cfg;
}

inline Tolerances to_tolerances(const Scenario& s) {
  return {s.compare.tol_tau_pct / 100.0, s.compare.tol_pc_pct / 100.0, s.compare.tol_throughput_pct / 100.0,
          s.compare.tol_delay_pct / 100.0};
}

inline bool is_sweepable(std::string_view key) {
  for (const auto& def : detail::key_table()) {
    if (def.key == key) return def.sweepable;
  }
  return false;
}

/// Assigns a sweep value to the scenario key named `key`. Integer-valued keys
/// receive the value rounded to an integer.
inline void set_sweep_value(Scenario& s, std::string_view key, double value) {
  for (const auto& def : detail::key_table()) {
    if (def.key == key && def.sweepable) {
      const double r = std::round(value);
      const bool integral = std::abs(value - r) < 1e-9 * std::max(1.0, std::abs(value));
      if (integral && r >= 0.0) {
        def.set(s, std::to_string(static_cast<std::uint64_t>(r)));
      } else {
        def.set(s, format_number(value));
      }
      return;
    }
  }
  throw ScenarioError("sweep: '" + std::string(key) + "' is not a sweepable key");
}

inline std::vector<double> sweep_values(const Scenario::Sweep& sw) {
  std::vector<double> values;
  const double span = (sw.to - sw.from) / sw.step;
  const auto count = static_cast<std::size_t>(std::floor(span + 1e-9)) + 1;
  values.reserve(count);
  for (std::size_t i = 0; i < count; ++i) values.push_back(sw.from + static_cast<double>(i) * sw.step);
  return values;
}

/// Cross-key checks that the per-key parsers cannot do. Throws ScenarioError.
inline void validate_scenario(const Scenario& s) {
  try {
    to_model_inputs(s);
  } catch (const DomainError& e) {
    throw ScenarioError(std::string("unit violation: ") + e.what());
  }
  const auto check = [](bool ok, const char* what) {
    if (!ok) throw ScenarioError(what);
  };
  check(is_sweepable(s.sweep.variable), "sweep: variable is not a sweepable key");
  check(s.sweep.step > 0.0, "sweep: step must be > 0");
  check(s.sweep.to >= s.sweep.from, "sweep: to must be >= from");
  check(sweep_values(s.sweep).size() <= 100000, "sweep: more than 10^5 points");
  check(s.optimize.m_lo <= s.optimize.m_hi, "optimize: m_lo must be <= m_hi");
  check(s.optimize.m_hi <= OptimizationRequest::kMaxRetryLimit, "optimize: m_hi must be <= 20");
  check(s.optimize.delay_bound_s > 0.0, "optimize: delay_bound_s must be > 0");
  check(s.sim.horizon_slots >= SimConfig::kMinHorizon, "sim: horizon_slots must be >= 10000");
  check(s.sim.replications >= 1, "sim: replications must be >= 1");
  for (double t : {s.compare.tol_tau_pct, s.compare.tol_pc_pct, s.compare.tol_throughput_pct, s.compare.tol_delay_pct}) {
    check(t >= 0.0, "compare: tolerances must be >= 0");
  }
}

inline Scenario parse_scenario(std::istream& input) {
  Scenario s;
  std::string section;
  std::set<std::pair<std::string, std::string>> seen;
  bool v_given = false;
  bool lambda_given = false;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(input, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (line_no == 1 && line.substr(0, 3) == "\xEF\xBB\xBF") line.remove_prefix(3);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ScenarioError("malformed section header", line_no);
      section = std::string(detail::trim(line.substr(1, line.size() - 2)));
      if (!detail::known_section(section)) throw ScenarioError("unknown section [" + section + "]", line_no);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ScenarioError("expected key = value", line_no);
    const std::string key(detail::trim(line.substr(0, eq)));
    const std::string_view value = detail::trim(line.substr(eq + 1));
    if (section.empty()) throw ScenarioError("key '" + key + "' outside of a section", line_no);
    if (key.empty() || value.empty()) throw ScenarioError("expected key = value", line_no);
    const detail::KeyDef* def = detail::find_key(section, key);
    if (!def) throw ScenarioError("unknown key '" + key + "' in [" + section + "]", line_no);
    if (!seen.emplace(section, key).second) throw ScenarioError("duplicate key '" + key + "'", line_no);
    if (key == "v_kmh") v_given = true;
    if (key == "lambda_veh_s") lambda_given = true;
    if (v_given && lambda_given) throw ScenarioError("set either v_kmh or lambda_veh_s, not both", line_no);
    try {
      def->set(s, value);
    } catch (const ScenarioError& e) {
      throw ScenarioError(e.what(), line_no);
    }
  }
  validate_scenario(s);
  return s;
}

inline Scenario parse_scenario(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_scenario(in);
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file '" + path + "'");
  return parse_scenario(in);
}

/// Fully resolved scenario in the input format; parse_scenario(echo(s)) == s.
inline std::string echo_scenario(const Scenario& s) {
  std::string out;
  std::string_view current;
  for (const auto& def : detail::key_table()) {
    if (def.section != current) {
      if (!current.empty()) out += '\n';
      out += "[" + std::string(def.section) + "]\n";
      current = def.section;
    }
    if (auto text = def.get(s)) out += std::string(def.key) + " = " + *text + "\n";
  }
  return out;
}

/// 64-bit FNV-1a, rendered as 16 hex digits.
inline std::string scenario_hash(const Scenario& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : echo_scenario(s)) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) hex[static_cast<std::size_t>(i)] = kHex[h & 0xf];
  return hex;
}

}  // namespace v2i
