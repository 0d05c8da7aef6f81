#pragma once

// M/G/1/K station queue on top of the backoff fixed point: slot-duration
// accounting, Poisson arrival thinning, blocking, throughput and access delay.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "v2i/dcf_markov.hpp"
#include "v2i/error.hpp"

namespace v2i {

struct QueueParams {
  std::uint32_t capacity_k = 50;  // packets
  double lambda_pkt = 1.5;        // packets/s

  void validate() const {
    detail::require(capacity_k >= 1, "queue: capacity_k must be >= 1");
    detail::require(lambda_pkt >= 0.0 && std::isfinite(lambda_pkt), "queue: lambda_pkt must be >= 0");
  }
};

struct SlotTimes {
  double t_suc = 0.0;
  double t_col = 0.0;
  double e_t_slot = 0.0;
};

struct ArrivalThinning {
  double p_arrival = 0.0;
  double lambda_eff = 0.0;
};

struct QueueDistribution {
  std::vector<double> pi;  // 0..K
  double p_block = 0.0;
};

struct QueueModel {
  double rho = 0.0;
  std::vector<double> pi;
  double p_block = 0.0;
  double e_service = 0.0;
  double p_arrival = 0.0;
  double lambda_eff = 0.0;
};

struct ThroughputResult {
  double s = 0.0;          // bits/s
  bool clamped = false;    // raw value fell outside [0, channel_rate]
};

struct AccessDelay {
  double raw = 0.0;               // one transmission stage
  double attempts = 1.0;          // expected attempts per packet, discards included
  double weighted = 0.0;          // raw * attempts / tau
};

struct Performance {
  double throughput_s = 0.0;
  bool throughput_clamped = false;
  double s_classic = 0.0;
  double t_delay = 0.0;
  double t_delay_weighted = 0.0;
  double payload_eff = 0.0;
};

inline double effective_payload(const MacParams& mac, const FixedPoint& fp) {
  return mac.payload_bits * fp.tau * (1.0 - fp.p_c);
}

inline double service_time(double payload_bits, double channel_rate) {
  if (!(channel_rate > 0.0)) throw DomainError("service_time: channel_rate must be > 0");
  if (!(payload_bits >= 0.0)) throw DomainError("service_time: payload must be >= 0");
  return payload_bits / channel_rate;
}

/// T_suc carries the full payload airtime; the tau(1-p_c)-thinned payload
/// only enters the throughput numerator.
inline SlotTimes slot_times(const MacParams& mac, const FixedPoint& /*fp*/, const ChannelProbs& cp) {
  mac.validate();
  SlotTimes st;
  st.t_suc = service_time(mac.payload_bits, mac.channel_rate) + mac.sifs + mac.ack + mac.difs + mac.slot;
  st.t_col = mac.t_header + mac.difs + mac.t_prop;
  st.e_t_slot = (1.0 - cp.p_tran) * mac.slot + cp.p_tran * cp.p_s * st.t_suc +
                cp.p_tran * (1.0 - cp.p_s) * st.t_col;
  return st;
}

/// Probability of 1..K Poisson arrivals during one mean slot, and the
/// one-shot thinned rate P_lambda * lambda.
inline ArrivalThinning arrival_thinning(const QueueParams& q, double e_t_slot) {
  q.validate();
  if (!(e_t_slot > 0.0)) throw DomainError("arrival_thinning: e_t_slot must be > 0");
  ArrivalThinning out;
  const double x = q.lambda_pkt * e_t_slot;
  if (x == 0.0) return out;
  const double log_x = std::log(x);
  double sum = 0.0;
  for (std::uint32_t k = 1; k <= q.capacity_k; ++k) {
    const double kd = static_cast<double>(k);
    sum += std::exp(kd * log_x - x - std::lgamma(kd + 1.0));
  }
  out.p_arrival = std::min(1.0, sum);
  out.lambda_eff = out.p_arrival * q.lambda_pkt;
  return out;
}

inline constexpr double kUnitLoadBand = 1e-9;

/// pi(k) = (1-rho) rho^k / (1-rho^{K+1}); uniform limit at rho = 1. For
/// rho > 1 the equivalent form in 1/rho avoids overflow.
inline QueueDistribution queue_stationary(double rho, std::uint32_t capacity_k) {
  if (!(rho >= 0.0) || !std::isfinite(rho)) throw DomainError("queue_stationary: rho must be finite and >= 0");
  if (capacity_k < 1) throw DomainError("queue_stationary: K must be >= 1");
  const std::size_t size = static_cast<std::size_t>(capacity_k) + 1;
  QueueDistribution out;
  out.pi.assign(size, 0.0);
  const double kp1 = static_cast<double>(size);

  if (std::abs(rho - 1.0) < kUnitLoadBand) {
    std::fill(out.pi.begin(), out.pi.end(), 1.0 / kp1);
  } else if (rho == 0.0) {
    out.pi[0] = 1.0;
  } else if (rho < 1.0) {
    const double norm = (1.0 - rho) / -std::expm1(kp1 * std::log(rho));
    for (std::size_t k = 0; k < size; ++k) out.pi[k] = norm * std::pow(rho, static_cast<double>(k));
  } else {
    const double r = 1.0 / rho;
    const double norm = (1.0 - r) / -std::expm1(kp1 * std::log(r));
    for (std::size_t k = 0; k < size; ++k) {
      out.pi[k] = norm * std::pow(r, static_cast<double>(capacity_k - k));
    }
  }
  out.p_block = out.pi.back();
  return out;
}

/// Queue state for a station: rho = lambda_eff * E[T_s], E[T_s] = L_eff / C.
inline QueueModel queue_model(const MacParams& mac, const FixedPoint& fp, const SlotTimes& st,
                              const QueueParams& q) {
  QueueModel qm;
  const ArrivalThinning thin = arrival_thinning(q, st.e_t_slot);
  qm.p_arrival = thin.p_arrival;
  qm.lambda_eff = thin.lambda_eff;
  qm.e_service = service_time(effective_payload(mac, fp), mac.channel_rate);
  qm.rho = qm.lambda_eff * qm.e_service;
  QueueDistribution dist = queue_stationary(qm.rho, q.capacity_k);
  qm.pi = std::move(dist.pi);
  qm.p_block = dist.p_block;
  return qm;
}

/// Network throughput
///   S = (1-P_b)(1-p_c) L P_tran /
///       [ (1-P_tran) E[T_slot] + (P_s/P_tran) T_suc + p_c/(1-p_c) T_col + (T_col + SIFS + ACK) ]
/// with L the effective payload. Clamped to [0, channel_rate].
inline ThroughputResult throughput(const MacParams& mac, const FixedPoint& fp, const ChannelProbs& cp,
                                   const SlotTimes& st, double p_block) {
  if (!(p_block >= 0.0 && p_block <= 1.0)) throw DomainError("throughput: p_block must be in [0, 1]");
  ThroughputResult out;
  if (cp.p_tran == 0.0 || p_block == 1.0 || fp.p_c >= 1.0) return out;

  const double numerator = (1.0 - p_block) * (1.0 - fp.p_c) * effective_payload(mac, fp) * cp.p_tran;
  const double denominator = (1.0 - cp.p_tran) * st.e_t_slot + (cp.p_s / cp.p_tran) * st.t_suc +
                             fp.p_c / (1.0 - fp.p_c) * st.t_col + (st.t_col + mac.sifs + mac.ack);
  if (!(denominator > 0.0)) throw DomainError("throughput: degenerate denominator");

  const double raw = numerator / denominator;
  out.s = std::clamp(raw, 0.0, mac.channel_rate);
  out.clamped = out.s != raw;
  return out;
}

/// Saturation throughput P_s P_tran E[L] / E[T_slot]. Not part of the
/// queueing model; reported alongside it as a sanity reference.
inline double throughput_classic(const MacParams& mac, const ChannelProbs& cp, const SlotTimes& st) {
  if (!(st.e_t_slot > 0.0)) throw DomainError("throughput_classic: e_t_slot must be > 0");
  return cp.p_s * cp.p_tran * mac.payload_bits / st.e_t_slot;
}

/// T_delay = (1-tau) E[T_slot] + tau [ (1-p_c) T_suc + p_c T_col ], plus the
/// attempt-weighted variant T_delay * (1 - p_c^{m+1}) / ((1-p_c) tau).
inline AccessDelay access_delay(const FixedPoint& fp, const SlotTimes& st) {
  AccessDelay d;
  d.raw = (1.0 - fp.tau) * st.e_t_slot + fp.tau * ((1.0 - fp.p_c) * st.t_suc + fp.p_c * st.t_col);
  d.attempts = fp.p_c < 1.0 ? detail::geometric_sum(fp.p_c, fp.m + 1) : static_cast<double>(fp.m + 1);
  d.weighted = fp.tau > 0.0 ? d.raw * d.attempts / fp.tau : std::numeric_limits<double>::infinity();
  return d;
}

}  // namespace v2i
