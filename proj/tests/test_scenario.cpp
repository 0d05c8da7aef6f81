#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "v2i/scenario.hpp"

namespace {

using v2i::Scenario;

TEST(ParseScenario, EmptyFileIsDefaults) {
  EXPECT_EQ(v2i::parse_scenario(""), Scenario{});
  EXPECT_EQ(v2i::parse_scenario("# nothing here\n\n   \n"), Scenario{});
}

TEST(ParseScenario, DefaultsMatchModelDefaults) {
  const auto in = v2i::to_model_inputs(Scenario{});
  const v2i::ModelInputs ref;
  EXPECT_NEAR(in.traffic.k_jam, ref.traffic.k_jam, 1e-15);
  EXPECT_NEAR(in.traffic.v_free, ref.traffic.v_free, 1e-12);
  EXPECT_NEAR(in.v, ref.v, 1e-12);
  EXPECT_NEAR(in.mac.t_header, ref.mac.t_header, 1e-18);
  EXPECT_NEAR(in.mac.payload_bits, 8000.0, 0.0);
  EXPECT_EQ(in.mac.cw_min, 32u);
  EXPECT_EQ(in.queue.capacity_k, 50u);
}

TEST(ParseScenario, Overrides) {
  const auto s = v2i::parse_scenario(
      "\xEF\xBB\xBF[mac]\n"
      "cw_min = 64   # doubled\n"
      "rate_bps=1e6\n"
      "[traffic]\n"
      "  n = 12\n"
      "population = mixture\n"
      "[optimize]\n"
      "delay_metric = raw\n"
      "sweep = true\n");
  EXPECT_EQ(s.mac.cw_min, 64u);
  EXPECT_EQ(s.mac.rate_bps, 1e6);
  EXPECT_EQ(s.traffic.n, 12u);
  EXPECT_EQ(s.traffic.population, v2i::PopulationMode::kMixture);
  EXPECT_EQ(s.optimize.delay_metric, v2i::DelayMetric::kRaw);
  EXPECT_TRUE(s.optimize.sweep);
}

std::size_t error_line(std::string_view text) {
  try {
    v2i::parse_scenario(text);
  } catch (const v2i::ScenarioError& e) {
    return e.line();
  }
  ADD_FAILURE() << "no error for: " << text;
  return 0;
}

TEST(ParseScenario, ErrorsCarryLineNumbers) {
  EXPECT_EQ(error_line("[mac]\ncw_min = 32\nwindow = 8\n"), 3u);
  EXPECT_EQ(error_line("\n[radio]\n"), 2u);
  EXPECT_EQ(error_line("[mac]\ncw_min = 3x\n"), 2u);
  EXPECT_EQ(error_line("cw_min = 8\n"), 1u);
  EXPECT_EQ(error_line("[mac]\ncw_min = 8\ncw_min = 16\n"), 3u);
  EXPECT_EQ(error_line("[mac]\ncw_min\n"), 2u);
  EXPECT_EQ(error_line("[mac\n"), 1u);
  EXPECT_EQ(error_line("[traffic]\nv_kmh = 50\nlambda_veh_s = 1\n"), 3u);
  EXPECT_EQ(error_line("[optimize]\nsweep = yes\n"), 2u);
  EXPECT_EQ(error_line("[traffic]\npopulation = all\n"), 2u);
  EXPECT_EQ(error_line("[mac]\nrate_bps = inf\n"), 2u);
}

TEST(ParseScenario, UnknownKeyMessageNamesTheKey) {
  try {
    v2i::parse_scenario("[mac]\nwindow = 8\n");
    FAIL();
  } catch (const v2i::ScenarioError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("window"), std::string::npos);
  }
}

TEST(ParseScenario, UnitViolations) {
  EXPECT_THROW(v2i::parse_scenario("[traffic]\nv_kmh = 200\n"), v2i::ScenarioError);
  EXPECT_THROW(v2i::parse_scenario("[traffic]\nv_kmh = 0\n"), v2i::ScenarioError);
  EXPECT_THROW(v2i::parse_scenario("[traffic]\nlambda_veh_s = 2\n"), v2i::ScenarioError);
  EXPECT_THROW(v2i::parse_scenario("[mac]\ncw_min = 1\n"), v2i::ScenarioError);
  EXPECT_THROW(v2i::parse_scenario("[mac]\nrate_bps = -5\n"), v2i::ScenarioError);
  EXPECT_THROW(v2i::parse_scenario("[sweep]\nvariable = fp_tol\n"), v2i::ScenarioError);
  EXPECT_THROW(v2i::parse_scenario("[sweep]\nstep = 0\n"), v2i::ScenarioError);
  EXPECT_THROW(v2i::parse_scenario("[optimize]\nm_hi = 21\n"), v2i::ScenarioError);
  EXPECT_THROW(v2i::parse_scenario("[sim]\nhorizon_slots = 10\n"), v2i::ScenarioError);
  EXPECT_THROW(v2i::parse_scenario("[traffic]\nn = 0\n"), v2i::ScenarioError);
}

TEST(ParseScenario, FlowInputSelectsBranch) {
  const auto up = v2i::to_model_inputs(v2i::parse_scenario("[traffic]\nlambda_veh_s = 1\n"));
  const auto down = v2i::to_model_inputs(
      v2i::parse_scenario("[traffic]\nlambda_veh_s = 1\nflow_branch = congested\n"));
  EXPECT_GT(up.v, up.traffic.v_free / 2.0);
  EXPECT_LT(down.v, down.traffic.v_free / 2.0);
  EXPECT_NEAR(v2i::traffic_state(up.traffic, up.v).lambda_tag, 1.0, 1e-12);
  EXPECT_NEAR(v2i::traffic_state(down.traffic, down.v).lambda_tag, 1.0, 1e-12);
}

TEST(EchoScenario, RoundTrips) {
  const char* texts[] = {
      "",
      "[traffic]\nlambda_veh_s = 0.7\nflow_branch = congested\n[mac]\npayload_bytes = 1500.5\nfp_tol = 1e-12\n",
      "[traffic]\nn = 33\npopulation = mixture\n[sweep]\nvariable = rate_bps\nfrom = 1e5\nto = 2e6\nstep = 1e5\n",
      "[mac]\nslot_us = 0.1\nsifs_us = 0.30000000000000004\n[sim]\nseed = 18446744073709551615\n",
  };
  for (const char* text : texts) {
    const Scenario s = v2i::parse_scenario(text);
    const std::string echo = v2i::echo_scenario(s);
    EXPECT_EQ(v2i::parse_scenario(echo), s) << echo;
    EXPECT_EQ(v2i::echo_scenario(v2i::parse_scenario(echo)), echo);
  }
}

TEST(EchoScenario, HashFollowsContent) {
  const Scenario a;
  Scenario b;
  b.mac.cw_min = 64;
  EXPECT_EQ(v2i::scenario_hash(a), v2i::scenario_hash(Scenario{}));
  EXPECT_NE(v2i::scenario_hash(a), v2i::scenario_hash(b));
  EXPECT_EQ(v2i::scenario_hash(a).size(), 16u);
}

TEST(Sweep, ValuesIncludeEndpoint) {
  Scenario::Sweep sw;
  const auto v = v2i::sweep_values(sw);
  ASSERT_EQ(v.size(), 15u);
  EXPECT_EQ(v.front(), 10.0);
  EXPECT_EQ(v.back(), 150.0);
  sw.from = 0.1;
  sw.to = 0.3;
  sw.step = 0.1;
  EXPECT_EQ(v2i::sweep_values(sw).size(), 3u);
}

TEST(Sweep, SetValue) {
  Scenario s;
  v2i::set_sweep_value(s, "cw_min", 48.0);
  EXPECT_EQ(s.mac.cw_min, 48u);
  v2i::set_sweep_value(s, "rate_bps", 1.5e6);
  EXPECT_EQ(s.mac.rate_bps, 1.5e6);
  v2i::set_sweep_value(s, "lambda_pkt_s", 0.25);
  EXPECT_EQ(s.queue.lambda_pkt_s, 0.25);
  v2i::set_sweep_value(s, "n", 17.0);
  EXPECT_EQ(s.traffic.n, 17u);
  EXPECT_THROW(v2i::set_sweep_value(s, "seed", 3.0), v2i::ScenarioError);
  EXPECT_THROW(v2i::set_sweep_value(s, "cw_min", 2.5), v2i::ScenarioError);
}

TEST(Conversions, SimAndTolerances) {
  const auto s = v2i::parse_scenario("[sim]\nseed = 9\nreplications = 3\n[compare]\ntol_delay_pct = 20\n");
  const auto cfg = v2i::to_sim_config(s, 4);
  EXPECT_EQ(cfg.n, 4u);
  EXPECT_EQ(cfg.seed, 9u);
  EXPECT_EQ(cfg.replications, 3u);
  EXPECT_NEAR(v2i::to_tolerances(s).delay, 0.2, 1e-15);
  EXPECT_NEAR(v2i::to_tolerances(s).tau, 0.05, 1e-15);
}

TEST(FormatNumber, ShortestRoundTrip) {
  EXPECT_EQ(v2i::format_number(0.1), "0.1");
  EXPECT_EQ(v2i::format_number(2e6), "2000000");
  EXPECT_EQ(v2i::format_number(1e20), "1e+20");
  EXPECT_EQ(v2i::format_number(2.5e-7), "2.5e-07");
  EXPECT_EQ(v2i::format_number(150.0), "150");
  for (double x : {1.0 / 3.0, 2.7096265553844758623e-7, 1e300, -4.5}) {
    EXPECT_EQ(std::stod(v2i::format_number(x)), x);
  }
}

}  // namespace
