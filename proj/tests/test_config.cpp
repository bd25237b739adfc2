#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "cfisac/config.hpp"
#include "cfisac/metrics.hpp"

using namespace cfisac;

TEST(Config, TextDefaults) {
  const auto c = text_defaults();
  EXPECT_EQ(c.num_aps, 32);
  EXPECT_EQ(c.num_sensing_aps, 2);
  EXPECT_EQ(c.num_ues, 8);
  EXPECT_EQ(c.antennas, 4);
  EXPECT_DOUBLE_EQ(c.r_min, 1.0);
  EXPECT_NEAR(linear_to_db(c.gamma_sen), 6.0, 1e-12);
  EXPECT_NEAR(10.0 * std::log10(c.noise_power) + 30.0, -94.0, 1e-9);
  EXPECT_EQ(c.tau, 200);
  EXPECT_EQ(c.tau_d, 190);
  EXPECT_EQ(c.max_ccp_iterations, 50);
  EXPECT_DOUBLE_EQ(c.ccp_tolerance, 1e-3);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, FigureDefaults) {
  const auto c = figure_defaults();
  EXPECT_DOUBLE_EQ(c.r_min, 2.0);
  EXPECT_NEAR(linear_to_db(c.gamma_sen), 2.0, 1e-12);
  EXPECT_NEAR(linear_to_db(c.rcs_variance), 2.0, 1e-12);
  EXPECT_THROW(preset("nope"), Error);
}

TEST(Config, StaticAndFronthaulAnchors) {
  const auto c = figure_defaults();
  EXPECT_DOUBLE_EQ(c.p0(), 1.625);
  AllocationState s;
  s.rho = Vec::Zero(32 * 8);
  s.alpha = Vec::Ones(32);
  CommStatistics stats;
  const auto p = total_power(s, std::vector<double>(8, 2.0), c, stats);
  EXPECT_EQ(p.static_power, 52.0);
  EXPECT_NEAR(p.fronthaul_traffic, 2.56, 1e-12);
  EXPECT_EQ(p.transmit, 0.0);
}

TEST(Config, JsonOverlay) {
  const auto j = nlohmann::json::parse(R"({"K": 6, "U": 3, "gamma_sen_db": 4, "precoder": "RZF"})");
  const NetworkConfig c = apply_json(text_defaults(), j);
  EXPECT_EQ(c.num_aps, 6);
  EXPECT_EQ(c.num_ues, 3);
  EXPECT_NEAR(c.gamma_sen, db_to_linear(4.0), 1e-12);
  EXPECT_EQ(c.precoder, Precoder::kRzf);
  EXPECT_THROW(apply_json(text_defaults(), nlohmann::json::parse(R"({"bogus": 1})")), Error);
}

TEST(Config, JsonRoundTrip) {
  auto c = figure_defaults();
  c.num_aps = 7;
  c.master_seed = 99;
  const auto back = apply_json(text_defaults(), to_json(c));
  EXPECT_EQ(back.num_aps, 7);
  EXPECT_EQ(back.master_seed, 99u);
  EXPECT_DOUBLE_EQ(back.r_min, c.r_min);
  EXPECT_DOUBLE_EQ(back.gamma_sen, c.gamma_sen);
}

TEST(Config, ValidateRejects) {
  auto c = text_defaults();
  c.tau_d = 300;
  EXPECT_THROW(c.validate(), Error);
  c = text_defaults();
  c.epsilon = 0.6;
  EXPECT_THROW(c.validate(), Error);
  c = text_defaults();
  c.num_ues = 0;
  EXPECT_THROW(c.validate(), Error);
  c = text_defaults();
  c.p_max = -1.0;
  EXPECT_THROW(c.validate(), Error);
}
