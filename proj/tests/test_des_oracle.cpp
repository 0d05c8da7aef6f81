#include <gtest/gtest.h>

#include "v2i/des_oracle.hpp"
#include "v2i/pipeline.hpp"

namespace {

v2i::SimConfig config(std::uint32_t n, std::uint64_t horizon = 100'000, std::uint32_t reps = 4) {
  v2i::SimConfig c;
  c.n = n;
  c.horizon_slots = horizon;
  c.replications = reps;
  return c;
}

TEST(Simulation, LoneStationNeverCollides) {
  const auto rep = v2i::run_simulation(config(1));
  EXPECT_EQ(rep.p_c.mean, 0.0);
  EXPECT_NEAR(rep.tau.mean, 2.0 / 33.0, 0.002);
  for (const auto& c : rep.replications) EXPECT_EQ(c.collisions, 0u);
}

TEST(Simulation, SameSeedSameResult) {
  const auto a = v2i::run_simulation(config(7));
  const auto b = v2i::run_simulation(config(7));
  EXPECT_EQ(a.tau.mean, b.tau.mean);
  EXPECT_EQ(a.throughput.mean, b.throughput.mean);
  for (std::size_t r = 0; r < a.replications.size(); ++r) {
    EXPECT_EQ(a.replications[r].attempts, b.replications[r].attempts);
  }
  auto other = config(7);
  other.seed = 2;
  EXPECT_NE(v2i::run_simulation(other).tau.mean, a.tau.mean);
}

TEST(Simulation, SlotConservation) {
  const auto rep = v2i::run_simulation(config(12));
  for (const auto& c : rep.replications) {
    EXPECT_EQ(c.idle + c.successes + c.collisions, c.slots);
    EXPECT_EQ(c.attempts, c.successes + c.collided_attempts);
    EXPECT_GE(c.collided_attempts, 2 * c.collisions);
  }
}

TEST(Simulation, CounterDrawsStayInWindow) {
  auto cfg = config(30);
  cfg.mac.m = 3;
  const auto rep = v2i::run_simulation(cfg);
  for (const auto& c : rep.replications) {
    for (std::uint32_t j = 0; j < c.support.size(); ++j) {
      const auto& s = c.support[j];
      ASSERT_GT(s.draws, 0u) << "stage " << j;
      EXPECT_EQ(s.min, 0u);
      EXPECT_LE(s.max, (std::uint64_t{32} << j) - 1);
    }
  }
}

TEST(Simulation, TauShrinksWithWindow) {
  double prev = 1.0;
  for (std::uint32_t w : {8u, 16u, 32u, 64u, 128u}) {
    auto cfg = config(10);
    cfg.mac.cw_min = w;
    const double tau = v2i::run_simulation(cfg).tau.mean;
    EXPECT_LT(tau, prev);
    prev = tau;
  }
}

TEST(Simulation, TracksFixedPoint) {
  const auto rep = v2i::run_simulation(config(10, 200'000, 4));
  const auto fp = v2i::solve_fixed_point(10, v2i::MacParams{});
  EXPECT_NEAR(rep.tau.mean, fp.tau, 0.05 * fp.tau);
  EXPECT_NEAR(rep.p_c.mean, fp.p_c, 0.05 * fp.p_c);
  EXPECT_GT(rep.tau.ci95, 0.0);
}

TEST(Simulation, RejectsBadConfig) {
  EXPECT_THROW(v2i::run_simulation(config(0)), v2i::DomainError);
  EXPECT_THROW(v2i::run_simulation(config(3, 10)), v2i::DomainError);
  EXPECT_THROW(v2i::run_simulation(config(3, 100'000, 0)), v2i::DomainError);
}

TEST(Simulation, StudentQuantiles) {
  EXPECT_DOUBLE_EQ(v2i::detail::t_quantile_975(9), 2.262);
  EXPECT_DOUBLE_EQ(v2i::detail::t_quantile_975(500), 1.960);
  const auto e = v2i::detail::summarize({1.0, 2.0, 3.0});
  EXPECT_DOUBLE_EQ(e.mean, 2.0);
  EXPECT_NEAR(e.ci95, 4.303 / std::sqrt(3.0), 1e-12);
  EXPECT_TRUE(std::isnan(v2i::detail::summarize({1.0}).ci95));
}

TEST(Compare, IdenticalValuesHaveZeroError) {
  v2i::SimReport rep;
  rep.config = config(10);
  const auto e = v2i::evaluate_mac(10, rep.config.mac, v2i::QueueParams{});
  rep.tau.mean = e.fp.tau;
  rep.p_c.mean = e.fp.p_c;
  rep.throughput.mean = e.perf.s_classic;
  rep.delay.mean = e.perf.t_delay_weighted;
  const auto table = v2i::compare(rep, e.fp, e.perf);
  ASSERT_EQ(table.rows.size(), 4u);
  for (const auto& row : table.rows) {
    EXPECT_EQ(row.rel_error, 0.0) << row.metric;
    EXPECT_TRUE(row.pass);
  }
  EXPECT_TRUE(table.all_pass());
}

TEST(Compare, ZeroAnalyticUsesAbsoluteError) {
  v2i::SimReport rep;
  rep.config = config(1);
  const auto e = v2i::evaluate_mac(1, rep.config.mac, v2i::QueueParams{});
  rep.p_c.mean = 0.01;
  const auto table = v2i::compare(rep, e.fp, e.perf);
  EXPECT_NEAR(table.rows[1].rel_error, 0.01, 1e-15);
}

TEST(Compare, MismatchedConfigurationThrows) {
  v2i::SimReport rep;
  rep.config = config(10);
  const auto fp = v2i::solve_fixed_point(11, rep.config.mac);
  EXPECT_THROW(v2i::compare(rep, fp, {}), v2i::ConfigMismatchError);
  auto mac = rep.config.mac;
  mac.m = 3;
  EXPECT_THROW(v2i::compare(rep, v2i::solve_fixed_point(10, mac), {}), v2i::ConfigMismatchError);
}

TEST(StreamSeeds, DistinctPerStationAndReplication) {
  EXPECT_NE(v2i::detail::stream_seed(1, 0, 0), v2i::detail::stream_seed(1, 0, 1));
  EXPECT_NE(v2i::detail::stream_seed(1, 0, 1), v2i::detail::stream_seed(1, 1, 0));
  EXPECT_NE(v2i::detail::stream_seed(1, 0, 0), v2i::detail::stream_seed(2, 0, 0));
}

}  // namespace
