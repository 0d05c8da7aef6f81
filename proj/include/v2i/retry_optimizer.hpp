#pragma once

// Retry-limit selection: evaluate every m in [m_lo, m_hi] through the full
// pipeline and keep the throughput maximizer among those meeting the delay
// bound. Ties go to the smaller m.

#include <cstdint>
#include <string>
#include <vector>

#include "v2i/error.hpp"
#include "v2i/pipeline.hpp"

namespace v2i {

enum class DelayMetric { kRaw, kWeighted };

struct OptimizationRequest {
  ModelInputs scenario;  // scenario.mac.m is ignored
  std::uint32_t m_lo = 0;
  std::uint32_t m_hi = 10;
  double delay_bound = 0.5;  // s
  DelayMetric metric = DelayMetric::kWeighted;

  static constexpr std::uint32_t kMaxRetryLimit = 20;

  void validate() const {
    detail::require(m_lo <= m_hi, "optimize: m_lo must be <= m_hi");
    detail::require(m_hi <= kMaxRetryLimit, "optimize: m_hi must be <= 20");
    detail::require(delay_bound > 0.0, "optimize: delay_bound must be > 0");
  }
};

struct RetryRow {
  std::uint32_t m = 0;
  Metrics metrics;
  double delay = 0.0;  // the metric checked against the bound
  bool feasible = false;
};

struct OptimizationResult {
  std::uint32_t m_star = 0;
  bool feasible = false;
  std::vector<RetryRow> per_m;

  const RetryRow& best() const {
    for (const auto& row : per_m) {
      if (row.m == m_star) return row;
    }
    throw std::logic_error("optimize: m_star missing from per_m");
  }
};

inline double constrained_delay(const Metrics& metrics, DelayMetric metric) {
  return metric == DelayMetric::kRaw ? metrics.t_delay : metrics.t_delay_weighted;
}

inline OptimizationResult optimize_retry(const OptimizationRequest& req) {
  req.validate();
  OptimizationResult out;
  out.per_m.reserve(req.m_hi - req.m_lo + 1);

  for (std::uint32_t m = req.m_lo; m <= req.m_hi; ++m) {
    ModelInputs in = req.scenario;
    in.mac.m = m;
    RetryRow row;
    row.m = m;
    try {
      row.metrics = evaluate(in);
    } catch (const ConvergenceError& e) {
      throw ConvergenceError("optimize: m = " + std::to_string(m) + ": " + e.what());
    }
    row.delay = constrained_delay(row.metrics, req.metric);
    row.feasible = row.delay <= req.delay_bound;
    out.per_m.push_back(row);
  }

  const RetryRow* best = nullptr;
  for (const auto& row : out.per_m) {
    if (row.feasible && (!best || row.metrics.s > best->metrics.s)) best = &row;
  }
  out.feasible = best != nullptr;
  if (!best) {
    for (const auto& row : out.per_m) {
      if (!best || row.delay < best->delay) best = &row;
    }
  }
  out.m_star = best->m;
  return out;
}

}  // namespace v2i
