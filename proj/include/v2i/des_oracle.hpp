#pragma once

// Slotted simulator of n saturated DCF stations. Time advances in virtual
// slots: an idle slot lasts `slot`, a lone transmission T_suc, two or more
// simultaneous transmissions T_col. Every station that does not transmit in
// a virtual slot decrements its counter; freezing during busy periods is
// implicit in that clock.
//
// Random streams: each (seed, replication, station) triple owns a
// std::mt19937_64 seeded with
//   splitmix64(splitmix64(splitmix64(seed) ^ replication) ^ station)
// so replications are independent and results do not depend on scheduling.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "v2i/dcf_markov.hpp"
#include "v2i/error.hpp"
#include "v2i/mac_queue.hpp"

namespace v2i {

struct SimConfig {
  std::uint32_t n = 10;
  MacParams mac;
  std::uint64_t horizon_slots = 1'000'000;
  std::uint64_t seed = 1;
  std::uint32_t replications = 10;

  static constexpr std::uint64_t kMinHorizon = 10'000;

  void validate() const {
    mac.validate();
    detail::require(n >= 1, "sim: n must be >= 1");
    detail::require(horizon_slots >= kMinHorizon, "sim: horizon_slots must be >= 10^4");
    detail::require(replications >= 1, "sim: replications must be >= 1");
  }
};

/// Mean across replications and the half-width of its 95% confidence
/// interval (Student t). NaN half-width with a single replication.
struct Estimate {
  double mean = 0.0;
  double ci95 = 0.0;
};

struct CounterSupport {
  std::uint64_t draws = 0;
  std::uint64_t min = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t max = 0;
};

struct SlotCounts {
  std::uint64_t slots = 0;
  std::uint64_t idle = 0;
  std::uint64_t successes = 0;
  std::uint64_t collisions = 0;
  std::uint64_t attempts = 0;
  std::uint64_t collided_attempts = 0;
  std::uint64_t discards = 0;
  double elapsed = 0.0;    // s
  double delay_sum = 0.0;  // s, delivered packets only
  std::vector<CounterSupport> support;  // per backoff stage
};

struct SimReport {
  SimConfig config;
  Estimate tau;
  Estimate p_c;
  Estimate throughput;   // bits/s
  Estimate delay;        // s, head-of-line to end of successful slot
  Estimate discard_rate; // discarded / (delivered + discarded)
  std::vector<SlotCounts> replications;
};

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

constexpr std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t replication, std::uint64_t station) {
  return splitmix64(splitmix64(splitmix64(seed) ^ replication) ^ station);
}

// Two-sided 95% Student t quantiles for 1..30 degrees of freedom.
inline double t_quantile_975(std::uint32_t dof) {
  static constexpr std::array<double, 30> kTable = {
      12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
      2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
      2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};
  if (dof == 0) return std::numeric_limits<double>::quiet_NaN();
  return dof <= kTable.size() ? kTable[dof - 1] : 1.960;
}

inline Estimate summarize(const std::vector<double>& samples) {
  Estimate e;
  const double count = static_cast<double>(samples.size());
  for (double x : samples) e.mean += x;
  e.mean /= count;
  if (samples.size() < 2) {
    e.ci95 = std::numeric_limits<double>::quiet_NaN();
    return e;
  }
  double ss = 0.0;
  for (double x : samples) ss += (x - e.mean) * (x - e.mean);
  const double sd = std::sqrt(ss / (count - 1.0));
  e.ci95 = t_quantile_975(static_cast<std::uint32_t>(samples.size() - 1)) * sd / std::sqrt(count);
  return e;
}

struct Station {
  std::mt19937_64 rng;
  std::uint32_t stage = 0;
  std::uint64_t counter = 0;
  double hol_since = 0.0;
};

inline std::uint64_t draw_counter(Station& s, const MacParams& mac, CounterSupport& support) {
  const std::uint64_t window = static_cast<std::uint64_t>(mac.cw_min) << s.stage;
  std::uniform_int_distribution<std::uint64_t> dist(0, window - 1);
  const std::uint64_t c = dist(s.rng);
  ++support.draws;
  support.min = std::min(support.min, c);
  support.max = std::max(support.max, c);
  return c;
}

inline SlotCounts run_replication(const SimConfig& cfg, std::uint32_t replication) {
  const MacParams& mac = cfg.mac;
  const double t_suc = service_time(mac.payload_bits, mac.channel_rate) + mac.sifs + mac.ack + mac.difs + mac.slot;
  const double t_col = mac.t_header + mac.difs + mac.t_prop;

  SlotCounts c;
  c.support.resize(mac.m + 1);
  std::vector<Station> stations(cfg.n);
  for (std::uint32_t i = 0; i < cfg.n; ++i) {
    stations[i].rng.seed(stream_seed(cfg.seed, replication, i));
    stations[i].counter = draw_counter(stations[i], mac, c.support[0]);
  }

  std::vector<std::uint32_t> transmitters;
  transmitters.reserve(cfg.n);
  for (std::uint64_t slot = 0; slot < cfg.horizon_slots; ++slot) {
    transmitters.clear();
    for (std::uint32_t i = 0; i < cfg.n; ++i) {
      if (stations[i].counter == 0) {
        transmitters.push_back(i);
      } else {
        --stations[i].counter;
      }
    }
    c.attempts += transmitters.size();

    if (transmitters.empty()) {
      ++c.idle;
      c.elapsed += mac.slot;
    } else if (transmitters.size() == 1) {
      ++c.successes;
      c.elapsed += t_suc;
      Station& s = stations[transmitters.front()];
      c.delay_sum += c.elapsed - s.hol_since;
      s.hol_since = c.elapsed;
      s.stage = 0;
      s.counter = draw_counter(s, mac, c.support[0]);
    } else {
      ++c.collisions;
      c.elapsed += t_col;
      c.collided_attempts += transmitters.size();
      for (std::uint32_t i : transmitters) {
        Station& s = stations[i];
        if (s.stage == mac.m) {
          ++c.discards;
          s.stage = 0;
          s.hol_since = c.elapsed;
        } else {
          ++s.stage;
        }
        s.counter = draw_counter(s, mac, c.support[s.stage]);
      }
    }
  }
  c.slots = cfg.horizon_slots;
  return c;
}

}  // namespace detail

/// Replications run concurrently; the report is assembled in replication
/// order, so it does not depend on scheduling.
inline SimReport run_simulation(const SimConfig& cfg) {
  cfg.validate();
  std::vector<std::future<SlotCounts>> jobs;
  jobs.reserve(cfg.replications);
  for (std::uint32_t r = 0; r < cfg.replications; ++r) {
    jobs.push_back(std::async(std::launch::async, [&cfg, r] { return detail::run_replication(cfg, r); }));
  }

  SimReport report;
  report.config = cfg;
  std::vector<double> tau, p_c, thr, delay, discard;
  for (auto& job : jobs) {
    SlotCounts c = job.get();
    const double delivered = static_cast<double>(c.successes);
    tau.push_back(static_cast<double>(c.attempts) / (static_cast<double>(cfg.n) * static_cast<double>(c.slots)));
    p_c.push_back(c.attempts ? static_cast<double>(c.collided_attempts) / static_cast<double>(c.attempts) : 0.0);
    thr.push_back(delivered * cfg.mac.payload_bits / c.elapsed);
    delay.push_back(c.successes ? c.delay_sum / delivered : std::numeric_limits<double>::quiet_NaN());
    const double finished = delivered + static_cast<double>(c.discards);
    discard.push_back(finished > 0.0 ? static_cast<double>(c.discards) / finished : 0.0);
    report.replications.push_back(std::move(c));
  }
  report.tau = detail::summarize(tau);
  report.p_c = detail::summarize(p_c);
  report.throughput = detail::summarize(thr);
  report.delay = detail::summarize(delay);
  report.discard_rate = detail::summarize(discard);
  return report;
}

struct Tolerances {
  double tau = 0.05;
  double p_c = 0.05;
  double throughput = 0.05;
  double delay = 0.10;

  static Tolerances uniform(double rel) { return {rel, rel, rel, rel}; }
};

struct ComparisonRow {
  std::string metric;
  double analytic = 0.0;
  double simulated = 0.0;
  double ci95 = 0.0;
  double rel_error = 0.0;  // absolute error when the analytic value is 0
  double tolerance = 0.0;
  bool pass = false;
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;

  bool all_pass() const {
    return std::all_of(rows.begin(), rows.end(), [](const ComparisonRow& r) { return r.pass; });
  }
};

/// Analytic-vs-simulated table. Throughput is compared against the
/// saturation throughput and delay against the attempt-weighted access
/// delay, the two analytic quantities the simulator actually measures.
inline ComparisonTable compare(const SimReport& report, const FixedPoint& fp, const Performance& perf,
                               const Tolerances& tol = {}) {
  const SimConfig& cfg = report.config;
  if (fp.n != cfg.n || fp.cw_min != cfg.mac.cw_min || fp.m != cfg.mac.m) {
    throw ConfigMismatchError("compare: fixed point solved for (n=" + std::to_string(fp.n) +
                              ", cw_min=" + std::to_string(fp.cw_min) + ", m=" + std::to_string(fp.m) +
                              ") but simulation ran (n=" + std::to_string(cfg.n) +
                              ", cw_min=" + std::to_string(cfg.mac.cw_min) + ", m=" + std::to_string(cfg.mac.m) + ")");
  }
  const auto row = [](std::string name, double analytic, const Estimate& sim, double tolerance) {
    ComparisonRow r{std::move(name), analytic, sim.mean, sim.ci95, 0.0, tolerance, false};
    const double diff = std::abs(sim.mean - analytic);
    r.rel_error = analytic != 0.0 ? diff / std::abs(analytic) : diff;
    r.pass = r.rel_error <= tolerance;
    return r;
  };
  ComparisonTable table;
  table.rows.push_back(row("tau", fp.tau, report.tau, tol.tau));
  table.rows.push_back(row("p_c", fp.p_c, report.p_c, tol.p_c));
  table.rows.push_back(row("throughput", perf.s_classic, report.throughput, tol.throughput));
  table.rows.push_back(row("delay", perf.t_delay_weighted, report.delay, tol.delay));
  return table;
}

}  // namespace v2i
