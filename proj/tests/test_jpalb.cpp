#include <gtest/gtest.h>

#include <cmath>

#include "cfisac/harness.hpp"
#include "cfisac/jpalb.hpp"
#include "test_util.hpp"

using namespace cfisac;

namespace {

void expect_feasible(const SolveReport& rep, const NetworkConfig& cfg) {
  for (double r : rep.achieved_rates) EXPECT_GE(r, cfg.r_min - 1e-4);
  EXPECT_GE(rep.achieved_sensing_sinr, cfg.gamma_sen * (1.0 - 1e-4));
  for (double s : rep.constraint_slacks.power) EXPECT_GE(s, -1e-6);
}

void expect_non_increasing(const std::vector<double>& trace) {
  for (std::size_t c = 1; c < trace.size(); ++c) EXPECT_LE(trace[c], trace[c - 1] + 1e-6) << "iteration " << c;
}

}  // namespace

TEST(Initialization, FeasibleForRatesAndSensing) {
  const auto cfg = test::small_config();
  for (int s = 0; s < 3; ++s) {
    const auto in = prepare_setup(cfg, s);
    const auto init = initialize_feasible(in.stats, in.forms, cfg);
    ASSERT_TRUE(init.has_value());
    EXPECT_TRUE((init->alpha.array() == 1.0).all());
    for (double g : comm_sinr(*init, in.stats, cfg.noise_power)) EXPECT_GE(g, gamma_threshold(cfg) * (1.0 - 1e-6));
    EXPECT_GE(sensing_sinr(*init, in.forms, cfg), cfg.gamma_sen * (1.0 - 1e-9));
  }
}

TEST(Initialization, UnreachableRateIsReported) {
  auto cfg = test::small_config();
  const auto in = prepare_setup(cfg, 0);
  cfg.r_min = 30.0;
  EXPECT_FALSE(initialize_feasible(in.stats, in.forms, cfg).has_value());
  const auto rep = run_jpalb(in.stats, in.forms, cfg);
  EXPECT_EQ(rep.status, RunStatus::kInfeasible);
  EXPECT_EQ(run_nlb(in.stats, in.forms, cfg).status, RunStatus::kInfeasible);
}

TEST(Jpalb, SingleApStaysOn) {
  const auto cfg = test::small_config(1, 1, 2);
  const auto in = prepare_setup(cfg, 0);
  const auto rep = run_jpalb(in.stats, in.forms, cfg);
  ASSERT_EQ(rep.status, RunStatus::kConverged) << rep.message;
  EXPECT_EQ(rep.active_aps, std::vector<int>{0});
  EXPECT_DOUBLE_EQ(rep.final_state.alpha(0), 1.0);
  expect_feasible(rep, cfg);
}

TEST(Jpalb, FeasibleBinaryAndDescending) {
  const auto cfg = test::small_config(6, 2, 2);
  for (int s = 0; s < 3; ++s) {
    const auto in = prepare_setup(cfg, s);
    const auto rep = run_jpalb(in.stats, in.forms, cfg);
    ASSERT_EQ(rep.status, RunStatus::kConverged) << rep.message;
    ASSERT_FALSE(rep.objective_trace.empty());
    expect_non_increasing(rep.objective_trace);
    expect_feasible(rep, cfg);
    for (int k = 0; k < 6; ++k) {
      const double a = rep.final_state.alpha(k);
      EXPECT_TRUE(a == 0.0 || a == 1.0);
      if (a == 0.0) {
        EXPECT_EQ(rep.final_state.rho.segment(k * 2, 2).norm(), 0.0);
      }
    }
    EXPECT_EQ(static_cast<int>(rep.active_aps.size()), static_cast<int>(rep.final_state.alpha.sum()));
    EXPECT_NEAR(rep.power.total, rep.power.transmit + rep.power.static_power + rep.power.fronthaul_traffic, 1e-12);
  }
}

TEST(Jpalb, NeverWorseThanAllOn) {
  const auto cfg = test::small_config(6, 2, 2);
  for (int s = 0; s < 3; ++s) {
    const auto in = prepare_setup(cfg, s);
    const auto j = run_jpalb(in.stats, in.forms, cfg);
    const auto n = run_nlb(in.stats, in.forms, cfg);
    ASSERT_EQ(n.status, RunStatus::kConverged) << n.message;
    EXPECT_EQ(n.active_aps.size(), 6u);
    expect_non_increasing(n.objective_trace);
    expect_feasible(n, cfg);
    EXPECT_LE(j.power.total, n.power.total * (1.0 + 1e-6));
  }
}

TEST(Oracle, BoundsJpalbAndAllOn) {
  const auto cfg = test::small_config(4, 2, 2);
  for (int s = 0; s < 2; ++s) {
    const auto in = prepare_setup(cfg, s);
    const auto o = enumerate_oracle(in.stats, in.forms, cfg);
    const auto j = run_jpalb(in.stats, in.forms, cfg);
    const auto n = run_nlb(in.stats, in.forms, cfg);
    ASSERT_NE(o.status, RunStatus::kInfeasible);
    EXPECT_LE(o.power.total, n.power.total * (1.0 + 1e-6));
    EXPECT_LE(o.power.total, j.power.total * (1.0 + 1e-6));
    expect_feasible(o, cfg);
  }
}

TEST(Oracle, RejectsLargeNetworks) {
  const auto cfg = test::small_config(11, 1, 1);
  CommStatistics stats;
  stats.num_aps = 11;
  stats.num_ues = 1;
  EXPECT_THROW(enumerate_oracle(stats, SensingForms{}, cfg), Error);
}

TEST(Certify, PassesOnOwnStatisticsAndFailsWhenStarved) {
  const auto cfg = test::small_config(4, 2, 2);
  const auto in = prepare_setup(cfg, 1);
  const auto rep = run_jpalb(in.stats, in.forms, cfg);
  ASSERT_EQ(rep.status, RunStatus::kConverged);
  const auto own = certify(rep.final_state, in.stats, in.forms, cfg);
  EXPECT_TRUE(own.passed);
  EXPECT_GE(own.min_rate_margin, -1e-4);
  const auto v = prepare_verification(cfg, in);
  const auto fresh = certify(rep.final_state, v.stats, v.forms, cfg);
  EXPECT_EQ(fresh.rates.size(), 2u);
  AllocationState halved = rep.final_state;
  halved.rho *= 0.3;
  EXPECT_FALSE(certify(halved, in.stats, in.forms, cfg).passed);
}

TEST(Jpalb, Deterministic) {
  const auto cfg = test::small_config(5, 2, 2);
  const auto in = prepare_setup(cfg, 2);
  const auto a = run_jpalb(in.stats, in.forms, cfg);
  const auto b = run_jpalb(in.stats, in.forms, cfg);
  EXPECT_EQ(a.active_aps, b.active_aps);
  EXPECT_EQ(a.power.total, b.power.total);
  EXPECT_EQ(a.objective_trace, b.objective_trace);
}
