#pragma once

// Two-dimensional backoff chain of a saturated 802.11 DCF station with a
// finite retry limit: stage j in 0..m, counter i in 0..CW_j-1, CW_j = 2^j CW_min.
// A packet still colliding at stage m is discarded and the station restarts
// at stage 0, so b_{j,0} = p_c^j b_{0,0} for every j <= m.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <vector>

#include "v2i/error.hpp"

namespace v2i {

struct MacParams {
  std::uint32_t cw_min = 32;
  std::uint32_t m = 7;
  double slot = 50e-6;
  double sifs = 10e-6;
  double difs = 50e-6;
  double ack = 50e-6;
  double t_header = 200e-6;
  double t_prop = 1e-6;
  double channel_rate = 2e6;  // bits/s
  double payload_bits = 8000.0;

  static constexpr std::uint32_t kMaxStage = 30;
  static constexpr std::uint32_t kMaxCwMin = 1u << 20;

  void validate() const {
    detail::require(cw_min >= 2 && cw_min <= kMaxCwMin, "mac: cw_min must be in [2, 2^20]");
    detail::require(m <= kMaxStage, "mac: m must be <= 30");
    for (double d : {slot, sifs, difs, ack, t_header, t_prop}) {
      detail::require(d >= 0.0 && std::isfinite(d), "mac: durations must be finite and >= 0");
    }
    detail::require(channel_rate > 0.0 && std::isfinite(channel_rate), "mac: channel_rate must be > 0");
    detail::require(payload_bits > 0.0 && std::isfinite(payload_bits), "mac: payload_bits must be > 0");
  }

  double window(std::uint32_t stage) const { return std::ldexp(static_cast<double>(cw_min), static_cast<int>(stage)); }

  friend bool operator==(const MacParams&, const MacParams&) = default;
};

struct FixedPoint {
  double tau = 0.0;
  double p_c = 0.0;
  int iterations = 0;
  double residual = 0.0;
  // Configuration the point was solved for.
  std::uint32_t n = 0;
  std::uint32_t cw_min = 0;
  std::uint32_t m = 0;
};

struct ChannelProbs {
  double p_tran = 0.0;
  double p_s = 1.0;
  double p_idle = 1.0;
};

/// Stationary b_{j,i}. `stages[j][i]` is the probability of (stage j, counter i).
struct ChainDistribution {
  double p_c = 0.0;
  std::vector<std::vector<double>> stages;

  double at(std::size_t j, std::size_t i) const { return stages.at(j).at(i); }
  double head(std::size_t j) const { return stages.at(j).front(); }

  /// Sum over j of b_{j,0}: the per-slot transmission probability.
  double head_mass() const {
    double s = 0.0;
    for (const auto& st : stages) s += st.front();
    return s;
  }

  double total_mass() const {
    double s = 0.0;
    for (const auto& st : stages) s += std::accumulate(st.begin(), st.end(), 0.0);
    return s;
  }
};

namespace detail {

inline constexpr double kHalfSingularityBand = 1e-9;

// sum_{j=0}^{count-1} x^j for x >= 0. Within the band around x = 1 the
// closed form is 0/0; use the first-order expansion about 1 instead.
inline double geometric_sum(double x, std::uint32_t count) {
  if (count == 0) return 0.0;
  if (x == 0.0) return 1.0;
  const double c = static_cast<double>(count);
  const double d = x - 1.0;
  if (std::abs(d) < kHalfSingularityBand) return c + 0.5 * c * (c - 1.0) * d;
  return std::expm1(c * std::log1p(d)) / d;
}

inline void check_pc(double p_c) {
  if (!(p_c >= 0.0 && p_c < 1.0)) throw DomainError("collision probability must be in [0, 1)");
}

}  // namespace detail

/// b_{0,0} of the finite-retry chain:
///   2(1-2p)(1-p) / [ CW_min (1-(2p)^{m+1}) (1-p) + (1-2p)(1-p^{m+1}) ]
/// The removable singularity at p = 1/2 is taken through its limit.
inline double b00(double p_c, const MacParams& mac) {
  mac.validate();
  detail::check_pc(p_c);
  const double w = static_cast<double>(mac.cw_min);
  return 2.0 / (w * detail::geometric_sum(2.0 * p_c, mac.m + 1) +
                detail::geometric_sum(p_c, mac.m + 1));
}

/// Bianchi's closed form in which stage m keeps retrying forever:
///   2(1-2p)(1-p) / [ (1-2p)(CW_min+1) + p CW_min (1-(2p)^m) ]
/// Reference only; the pipeline uses the finite-retry b00().
inline double b00_absorbing(double p_c, const MacParams& mac) {
  mac.validate();
  detail::check_pc(p_c);
  const double w = static_cast<double>(mac.cw_min);
  return 2.0 * (1.0 - p_c) / ((w + 1.0) + p_c * w * detail::geometric_sum(2.0 * p_c, mac.m));
}

/// Total probability that the counter reaches zero in some stage.
inline double tau_of_pc(double p_c, const MacParams& mac) {
  return b00(p_c, mac) * detail::geometric_sum(p_c, mac.m + 1);
}

inline double pc_of_tau(double tau, std::uint32_t n) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw DomainError("pc_of_tau: tau must be in [0, 1]");
  if (n < 1) throw DomainError("pc_of_tau: n must be >= 1");
  if (n == 1) return 0.0;
  return -std::expm1(static_cast<double>(n - 1) * std::log1p(-tau));
}

inline ChannelProbs channel_probabilities(double tau, std::uint32_t n) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw DomainError("channel_probabilities: tau must be in [0, 1]");
  if (n < 1) throw DomainError("channel_probabilities: n must be >= 1");
  ChannelProbs cp;
  if (tau == 0.0) return cp;  // p_s -> 1 as tau -> 0
  const double nd = static_cast<double>(n);
  const double log_idle = std::log1p(-tau);
  cp.p_tran = -std::expm1(nd * log_idle);
  cp.p_idle = 1.0 - cp.p_tran;
  const double single = n == 1 ? tau : nd * tau * std::exp((nd - 1.0) * log_idle);
  cp.p_s = std::min(1.0, single / cp.p_tran);
  return cp;
}

inline constexpr double kDefaultFixedPointTol = 1e-10;
inline constexpr double kBracketEpsilon = 1e-12;
inline constexpr int kMaxBisectionIterations = 200;

namespace detail {

inline double fixed_point_gap(double p, std::uint32_t n, const MacParams& mac) {
  return p - pc_of_tau(tau_of_pc(p, mac), n);
}

inline FixedPoint degenerate_point(std::uint32_t n, const MacParams& mac) {
  return {tau_of_pc(0.0, mac), 0.0, 0, 0.0, n, mac.cw_min, mac.m};
}

}  // namespace detail

/// Root of g(p) = p - (1 - (1 - tau(p))^{n-1}) on [0, 1 - 1e-12] by bisection.
/// g is increasing with slope >= 1, so |g| <= tol also bounds the error in p.
inline FixedPoint solve_fixed_point(std::uint32_t n, const MacParams& mac,
                                    double tol = kDefaultFixedPointTol) {
  mac.validate();
  if (n < 1) throw DomainError("solve_fixed_point: n must be >= 1");
  if (!(tol > 0.0)) throw DomainError("solve_fixed_point: tol must be > 0");
  if (n == 1) return detail::degenerate_point(n, mac);

  double lo = 0.0;
  double hi = 1.0 - kBracketEpsilon;
  const double g_lo = detail::fixed_point_gap(lo, n, mac);
  const double g_hi = detail::fixed_point_gap(hi, n, mac);
  if (g_lo > 0.0 || g_hi <= 0.0) {
    throw ConvergenceError("solve_fixed_point: root not bracketed");
  }
  if (g_lo == 0.0) return {tau_of_pc(lo, mac), lo, 0, 0.0, n, mac.cw_min, mac.m};

  const auto solved = [&](double p, int it, double gap) {
    return FixedPoint{tau_of_pc(p, mac), p, it, std::abs(gap), n, mac.cw_min, mac.m};
  };
  double mid = lo;
  double g_mid = g_lo;
  for (int it = 1; it <= kMaxBisectionIterations; ++it) {
    mid = 0.5 * (lo + hi);
    g_mid = detail::fixed_point_gap(mid, n, mac);
    if (std::abs(g_mid) <= tol && hi - lo <= tol) return solved(mid, it, g_mid);
    if (mid <= lo || mid >= hi) {
      // Bracket exhausted at double precision.
      if (std::abs(g_mid) <= tol) return solved(mid, it, g_mid);
      break;
    }
    (g_mid > 0.0 ? hi : lo) = mid;
  }
  throw ConvergenceError("solve_fixed_point: residual above tolerance after bisection");
}

/// Damped Picard iteration p <- (1-a) p + a h(p). Usually a few times faster
/// than bisection; falls back to solve_fixed_point() if it stalls.
inline FixedPoint solve_fixed_point_picard(std::uint32_t n, const MacParams& mac,
                                           double tol = kDefaultFixedPointTol,
                                           double damping = 0.5, int max_iterations = 500) {
  mac.validate();
  if (n < 1) throw DomainError("solve_fixed_point_picard: n must be >= 1");
  if (!(tol > 0.0)) throw DomainError("solve_fixed_point_picard: tol must be > 0");
  if (!(damping > 0.0 && damping <= 1.0)) throw DomainError("solve_fixed_point_picard: damping in (0, 1]");
  if (n == 1) return detail::degenerate_point(n, mac);

  double p = 0.0;
  for (int it = 1; it <= max_iterations; ++it) {
    const double mapped = pc_of_tau(tau_of_pc(p, mac), n);
    p = std::min(1.0 - kBracketEpsilon, (1.0 - damping) * p + damping * mapped);
    const double gap = std::abs(detail::fixed_point_gap(p, n, mac));
    if (gap <= tol) return {tau_of_pc(p, mac), p, it, gap, n, mac.cw_min, mac.m};
  }
  return solve_fixed_point(n, mac, tol);
}

/// Largest chain that chain_stationary() will materialize.
inline constexpr std::uint64_t kMaxChainStates = 1ull << 26;

/// Full b_{j,i} table: b_{j,i} = (CW_j - i) / CW_j * b_{j,0}.
inline ChainDistribution chain_stationary(double p_c, const MacParams& mac) {
  mac.validate();
  detail::check_pc(p_c);
  const std::uint64_t states = static_cast<std::uint64_t>(mac.cw_min) * ((2ull << mac.m) - 1);
  if (states > kMaxChainStates) throw DomainError("chain_stationary: chain too large to materialize");

  ChainDistribution chain;
  chain.p_c = p_c;
  chain.stages.resize(mac.m + 1);
  double head = b00(p_c, mac);
  for (std::uint32_t j = 0; j <= mac.m; ++j) {
    const std::uint64_t w = static_cast<std::uint64_t>(mac.cw_min) << j;
    const double wd = static_cast<double>(w);
    auto& row = chain.stages[j];
    row.resize(w);
    for (std::uint64_t i = 0; i < w; ++i) {
      row[i] = (wd - static_cast<double>(i)) / wd * head;
    }
    head *= p_c;
  }
  return chain;
}

}  // namespace v2i
