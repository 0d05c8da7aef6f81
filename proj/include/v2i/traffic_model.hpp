#pragma once

// Greenshields traffic under one AP: flow, density, sojourn time and the
// Erlang-loss (M/D/C/C) population of vehicles inside the coverage range.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "v2i/error.hpp"

namespace v2i {

struct TrafficParams {
  double k_jam = 0.12;          // vehicles/m
  double v_free = 160.0 / 3.6;  // m/s
  double l_cov = 1000.0;        // m

  void validate() const {
    detail::require(k_jam > 0.0 && std::isfinite(k_jam), "traffic: k_jam must be > 0");
    detail::require(v_free > 0.0 && std::isfinite(v_free), "traffic: v_free must be > 0");
    detail::require(l_cov > 0.0 && std::isfinite(l_cov), "traffic: l_cov must be > 0");
  }
};

struct TrafficState {
  double v = 0.0;           // m/s
  double k = 0.0;           // vehicles/m
  double lambda_tag = 0.0;  // vehicles/s
  double t_sojourn = 0.0;   // s
  double n_mean = 0.0;
  double c_road_real = 0.0;
  std::size_t c_road = 0;   // ceil(k_jam * l_cov)

  /// Offered load of the Erlang-loss population model.
  double offered_load() const { return lambda_tag * t_sojourn; }
};

struct PopulationDistribution {
  std::vector<double> probs;  // index = vehicle count, 0..C_road

  std::size_t capacity() const { return probs.empty() ? 0 : probs.size() - 1; }
};

enum class FlowBranch { kUncongested, kCongested };

namespace detail {

// k_jam * L is often a decimal product such as 0.12 * 1000 that lands one ulp
// above the integer; don't let that bump the capacity.
inline std::size_t ceil_capacity(double c_real) {
  const double snapped = std::round(c_real);
  if (std::abs(c_real - snapped) <= 1e-9 * std::max(1.0, c_real)) {
    return static_cast<std::size_t>(snapped);
  }
  return static_cast<std::size_t>(std::ceil(c_real));
}

}  // namespace detail

inline TrafficState traffic_state(const TrafficParams& params, double v) {
  params.validate();
  if (!(v > 0.0) || v > params.v_free) {
    throw DomainError("traffic_state: speed must satisfy 0 < v <= v_free");
  }
  TrafficState s;
  s.v = v;
  s.k = params.k_jam * (1.0 - v / params.v_free);
  s.lambda_tag = s.k * s.v;
  s.t_sojourn = params.l_cov / v;
  s.n_mean = s.lambda_tag * s.t_sojourn;
  s.c_road_real = params.k_jam * params.l_cov;
  s.c_road = detail::ceil_capacity(s.c_road_real);
  return s;
}

/// Inverts lambda = k_jam * v * (1 - v / v_free). Flows above the capacity
/// flow k_jam * v_free / 4 have no solution.
inline double speed_for_flow(const TrafficParams& params, double lambda_tag,
                             FlowBranch branch = FlowBranch::kUncongested) {
  params.validate();
  const double q_max = params.k_jam * params.v_free / 4.0;
  if (!(lambda_tag > 0.0) || lambda_tag > q_max * (1.0 + 1e-12)) {
    throw DomainError("speed_for_flow: flow must satisfy 0 < lambda <= k_jam * v_free / 4");
  }
  const double disc = std::sqrt(std::max(0.0, 1.0 - lambda_tag / q_max));
  const double half = params.v_free / 2.0;
  return branch == FlowBranch::kUncongested ? half * (1.0 + disc) : half * (1.0 - disc);
}

/// Truncated-Poisson (Erlang loss) occupancy for offered load `a` and
/// `capacity` servers, evaluated in log space.
inline PopulationDistribution erlang_population(double offered_load, std::size_t capacity) {
  if (!(offered_load >= 0.0) || !std::isfinite(offered_load)) {
    throw DomainError("erlang_population: offered load must be finite and >= 0");
  }
  if (capacity < 1) throw DomainError("erlang_population: capacity must be >= 1");

  PopulationDistribution dist;
  dist.probs.assign(capacity + 1, 0.0);
  if (offered_load == 0.0) {
    dist.probs[0] = 1.0;
    return dist;
  }
  const double log_a = std::log(offered_load);
  std::vector<double> log_w(capacity + 1);
  for (std::size_t n = 0; n <= capacity; ++n) {
    const double nd = static_cast<double>(n);
    log_w[n] = nd * log_a - std::lgamma(nd + 1.0);
  }
  const double peak = *std::max_element(log_w.begin(), log_w.end());
  double total = 0.0;
  for (std::size_t n = 0; n <= capacity; ++n) {
    dist.probs[n] = std::exp(log_w[n] - peak);
    total += dist.probs[n];
  }
  for (double& p : dist.probs) p /= total;
  return dist;
}

inline PopulationDistribution population_distribution(const TrafficParams& params, double v) {
  const TrafficState s = traffic_state(params, v);
  return erlang_population(s.offered_load(), s.c_road);
}

inline double expected_network_size(const PopulationDistribution& dist) {
  double mean = 0.0;
  for (std::size_t n = 0; n < dist.probs.size(); ++n) {
    mean += static_cast<double>(n) * dist.probs[n];
  }
  return mean;
}

}  // namespace v2i
