#pragma once

// End-to-end evaluation: traffic state -> contending population -> backoff
// fixed point -> slot times -> queue -> throughput and delay.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include "v2i/dcf_markov.hpp"
#include "v2i/error.hpp"
#include "v2i/mac_queue.hpp"
#include "v2i/traffic_model.hpp"

namespace v2i {

enum class PopulationMode { kPoint, kMixture };

struct ModelInputs {
  TrafficParams traffic;
  double v = 80.0 / 3.6;                     // m/s
  std::optional<std::uint32_t> n_override;   // bypasses the traffic model's N
  PopulationMode population = PopulationMode::kPoint;
  MacParams mac;
  QueueParams queue;
  double tol = kDefaultFixedPointTol;
};

/// Everything computed for one contending population n.
struct MacEvaluation {
  FixedPoint fp;
  ChannelProbs cp;
  SlotTimes st;
  QueueModel queue;
  Performance perf;
  double attempts = 1.0;
};

/// Flat view of one operating point. In mixture mode every field after
/// `n_mean` is the P_N-weighted average over N >= 1 and `n` is E[N | N >= 1].
struct Metrics {
  double k = 0.0;
  double lambda_tag = 0.0;
  double n_mean = 0.0;
  double n = 0.0;
  double tau = 0.0;
  double p_c = 0.0;
  double p_tran = 0.0;
  double p_s = 0.0;
  double e_t_slot = 0.0;
  double t_suc = 0.0;
  double t_col = 0.0;
  double rho = 0.0;
  double p_block = 0.0;
  double lambda_eff = 0.0;
  double s = 0.0;
  double s_classic = 0.0;
  double t_delay = 0.0;
  double t_delay_weighted = 0.0;
  bool s_clamped = false;
};

inline MacEvaluation evaluate_mac(std::uint32_t n, const MacParams& mac, const QueueParams& queue,
                                  double tol = kDefaultFixedPointTol) {
  MacEvaluation e;
  e.fp = solve_fixed_point(n, mac, tol);
  e.cp = channel_probabilities(e.fp.tau, n);
  e.st = slot_times(mac, e.fp, e.cp);
  e.queue = queue_model(mac, e.fp, e.st, queue);
  const ThroughputResult s = throughput(mac, e.fp, e.cp, e.st, e.queue.p_block);
  const AccessDelay d = access_delay(e.fp, e.st);
  e.attempts = d.attempts;
  e.perf.throughput_s = s.s;
  e.perf.throughput_clamped = s.clamped;
  e.perf.s_classic = throughput_classic(mac, e.cp, e.st);
  e.perf.t_delay = d.raw;
  e.perf.t_delay_weighted = d.weighted;
  e.perf.payload_eff = effective_payload(mac, e.fp);
  return e;
}

namespace detail {

inline void accumulate(Metrics& acc, const MacEvaluation& e, double w) {
  acc.tau += w * e.fp.tau;
  acc.p_c += w * e.fp.p_c;
  acc.p_tran += w * e.cp.p_tran;
  acc.p_s += w * e.cp.p_s;
  acc.e_t_slot += w * e.st.e_t_slot;
  acc.t_suc += w * e.st.t_suc;
  acc.t_col += w * e.st.t_col;
  acc.rho += w * e.queue.rho;
  acc.p_block += w * e.queue.p_block;
  acc.lambda_eff += w * e.queue.lambda_eff;
  acc.s += w * e.perf.throughput_s;
  acc.s_classic += w * e.perf.s_classic;
  acc.t_delay += w * e.perf.t_delay;
  acc.t_delay_weighted += w * e.perf.t_delay_weighted;
  acc.s_clamped = acc.s_clamped || e.perf.throughput_clamped;
}

inline constexpr double kNegligibleMass = 1e-15;

}  // namespace detail

/// Contending stations handed to the MAC model in point mode.
inline std::uint32_t point_population(const TrafficState& ts) {
  const double n = std::round(ts.n_mean);
  if (n < 1.0) throw DomainError("no vehicles under coverage at this speed (round(N_mean) = 0)");
  return static_cast<std::uint32_t>(n);
}

inline Metrics evaluate(const ModelInputs& in) {
  Metrics out;
  const TrafficState ts = traffic_state(in.traffic, in.v);
  out.k = ts.k;
  out.lambda_tag = ts.lambda_tag;
  out.n_mean = ts.n_mean;

  if (in.n_override || in.population == PopulationMode::kPoint) {
    const std::uint32_t n = in.n_override ? *in.n_override : point_population(ts);
    if (n < 1) throw DomainError("n must be >= 1");
    out.n = n;
    detail::accumulate(out, evaluate_mac(n, in.mac, in.queue, in.tol), 1.0);
    return out;
  }

  const PopulationDistribution dist = erlang_population(ts.offered_load(), ts.c_road);
  double included = 0.0;
  for (std::size_t n = 1; n < dist.probs.size(); ++n) {
    if (dist.probs[n] >= detail::kNegligibleMass) included += dist.probs[n];
  }
  if (!(included > 0.0)) throw DomainError("no vehicles under coverage at this speed (P_0 = 1)");
  for (std::size_t n = 1; n < dist.probs.size(); ++n) {
    if (dist.probs[n] < detail::kNegligibleMass) continue;
    const double w = dist.probs[n] / included;
    out.n += w * static_cast<double>(n);
    detail::accumulate(out, evaluate_mac(static_cast<std::uint32_t>(n), in.mac, in.queue, in.tol), w);
  }
  return out;
}

}  // namespace v2i
