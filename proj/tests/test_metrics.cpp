#include <gtest/gtest.h>

#include <cmath>

#include "cfisac/linalg.hpp"
#include "cfisac/metrics.hpp"
#include "cfisac/propagation.hpp"
#include "cfisac/rng.hpp"
#include "oracles.hpp"

using namespace cfisac;

using test::qinv_bisection;

TEST(Urllc, QinvMatchesBisection) {
  for (double eps : {1e-3, 1e-5, 1e-7, 0.3}) {
    const double x = qinv(eps);
    EXPECT_NEAR(x, qinv_bisection(eps), 1e-9 * std::abs(x));
    EXPECT_NEAR(q_function(x), eps, 1e-12 * std::max(eps, 1e-300) + 1e-18);
  }
  EXPECT_NEAR(qinv(1e-5), 4.264890793922825, 1e-9);
  EXPECT_THROW(qinv(0.0), Error);
  EXPECT_THROW(qinv(1.0), Error);
}

TEST(Urllc, GammaThresholdValues) {
  auto cfg = text_defaults();
  // Closed form evaluated independently in double precision.
  EXPECT_NEAR(gamma_threshold(cfg), 1.8264918371162708, 1e-12);
  cfg.r_min = 0.0;
  EXPECT_NEAR(gamma_threshold(cfg), std::expm1(qinv(cfg.epsilon) / std::sqrt(190.0)), 1e-14);
  for (double r : {0.0, 0.5, 1.0, 2.0, 3.5}) {
    cfg.r_min = r;
    const double g = gamma_threshold(cfg);
    EXPECT_NEAR(rate_lower_bound(g, cfg), r, 1e-10);
    // The dispersion is below 1, so the exact rate is above the bound.
    EXPECT_GE(urllc_rate(g, cfg), r);
  }
}

TEST(Urllc, RateIncreasing) {
  const auto cfg = text_defaults();
  double prev = urllc_rate(0.1, cfg);
  for (double g = 0.2; g < 100.0; g *= 1.5) {
    const double r = urllc_rate(g, cfg);
    EXPECT_GT(r, prev);
    prev = r;
  }
}

TEST(CommStatistics, SinrMatchesDirectMonteCarloRatio) {
  // With MRT, h^H w is real, so the closed form equals the sample ratio.
  EXPECT_LT(test::sinr_identity_error(), 1e-9);
}

TEST(CommStatistics, ShapesAndPsd) {
  const auto cfg = test::small_config(4, 3, 2);
  const auto scn = generate_scenario(cfg, 2);
  const auto stats = comm_statistics(scn, cfg, 9);
  ASSERT_EQ(stats.b.size(), 3u);
  for (int i = 0; i < 3; ++i) {
    EXPECT_TRUE((stats.b[i].array() > 0.0).all());
    for (int j = 0; j < 3; ++j) {
      EXPECT_GE(min_eigenvalue(stats.C[i][j]), -1e-12 * stats.C[i][j].norm());
      const Mat re = stats.C[i][j].real();
      EXPECT_NEAR((stats.sqrtC[i][j] * stats.sqrtC[i][j] - re).norm(), 0.0, 1e-9 * (1.0 + re.norm()));
    }
  }
}

using test::SensingFixture;

TEST(Sensing, ExpectationModeMatchesSymbolAverage) {
  const auto err = test::expectation_mode_error(2000);
  EXPECT_LT(err.a, 0.02);
  EXPECT_LT(err.b, 0.02);
}

TEST(Sensing, QuadraticFormMatchesSignalLevelSimulation) {
  EXPECT_NEAR(test::signal_level_sensing_ratio(5000), 1.0, 0.05);
}

TEST(Sensing, FormsArePsdAndDimensionChecked) {
  SensingFixture f;
  const auto forms = sensing_matrices(f.scn, f.pre, f.symbols, f.cfg);
  ASSERT_EQ(forms.A.size(), 3u);
  for (int k = 0; k < 3; ++k) {
    EXPECT_GE(min_eigenvalue(forms.A[k]), -1e-12 * forms.A[k].norm());
    EXPECT_GE(min_eigenvalue(forms.B[k]), -1e-12 * forms.B[k].norm());
  }
  EXPECT_NEAR(forms.noise_floor, 190.0 * 2 * 2 * f.cfg.noise_power, 1e-24);
  PrecoderSet bad = f.pre;
  bad.per_ap.pop_back();
  EXPECT_THROW(sensing_matrices(f.scn, bad, f.symbols, f.cfg), Error);
  SymbolBlock short_block = f.symbols;
  short_block.per_instant.pop_back();
  EXPECT_THROW(sensing_matrices(f.scn, f.pre, short_block, f.cfg), Error);
}

TEST(Power, BreakdownAndAlphaScaling) {
  auto cfg = text_defaults();
  cfg.num_aps = 3;
  cfg.num_ues = 2;
  AllocationState s;
  s.rho = Vec::Constant(6, 0.5);
  s.alpha = Vec::Zero(3);
  s.alpha(1) = 1.0;
  CommStatistics stats;
  stats.G.assign(3, Vec::Constant(2, 2.0));
  const auto p = total_power(s, {1.0, -0.5}, cfg, stats);
  EXPECT_NEAR(p.transmit, cfg.pa_inefficiency * 2 * 0.25 * 4.0, 1e-12);
  EXPECT_NEAR(p.static_power, cfg.p0(), 1e-12);
  EXPECT_NEAR(p.fronthaul_traffic, 20e6 * 0.25e-9 * 1.0, 1e-12);
  EXPECT_NEAR(p.total, p.transmit + p.static_power + p.fronthaul_traffic, 1e-12);
}
