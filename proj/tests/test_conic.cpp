#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "cfisac/conic.hpp"
#include "cfisac/jpalb.hpp"
#include "cfisac/rng.hpp"
#include "test_util.hpp"

using namespace cfisac;

TEST(ConicSolve, BoundedQuadratic) {
  ConicProblem p(1);
  p.Q(0, 0) = 1.0;
  p.lower(0) = 3.0;
  const auto sol = solve(p);
  ASSERT_EQ(sol.status, SolveStatus::kOptimal);
  EXPECT_NEAR(sol.objective_value, 9.0, 1e-6);
  EXPECT_NEAR(sol.x(0), 3.0, 1e-6);
  EXPECT_LE(sol.max_primal_residual, 1e-7);
}

TEST(ConicSolve, NormOfConstantVector) {
  ConicProblem p(1);
  p.q(0) = 1.0;
  SocConstraint s;
  s.F = Mat::Zero(2, 1);
  s.g = Vec(2);
  s.g << 3.0, 4.0;
  s.c = Vec::Ones(1);
  p.socs.push_back(s);
  const auto sol = solve(p);
  ASSERT_EQ(sol.status, SolveStatus::kOptimal);
  EXPECT_NEAR(sol.x(0), 5.0, 1e-6);
}

TEST(ConicSolve, LinearProgramWithEquality) {
  // min -x - y  s.t. x + y = 2, x - y <= 1, y <= 1.5, x, y >= 0
  ConicProblem p(2);
  p.q << -1.0, -2.0;
  p.linear.push_back({{{0, 1.0}, {1, 1.0}}, Relation::kEqual, 2.0});
  p.linear.push_back({{{0, 1.0}, {1, -1.0}}, Relation::kLessEqual, 1.0});
  p.lower.setZero();
  p.upper(1) = 1.5;
  const auto sol = solve(p);
  ASSERT_EQ(sol.status, SolveStatus::kOptimal);
  EXPECT_NEAR(sol.x(0), 0.5, 1e-6);
  EXPECT_NEAR(sol.x(1), 1.5, 1e-6);
}

TEST(ConicSolve, DetectsInfeasibility) {
  ConicProblem p(1);
  p.q(0) = 1.0;
  p.upper(0) = 1.0;
  p.linear.push_back({{{0, -1.0}}, Relation::kLessEqual, -2.0});
  EXPECT_EQ(solve(p).status, SolveStatus::kInfeasible);

  // ||x|| <= 1 and x_0 >= 2.
  ConicProblem c(2);
  c.Q.setIdentity();
  SocConstraint s;
  s.F = Mat::Identity(2, 2);
  s.g = Vec::Zero(2);
  s.c = Vec::Zero(2);
  s.d = 1.0;
  c.socs.push_back(s);
  c.lower(0) = 2.0;
  EXPECT_EQ(solve(c).status, SolveStatus::kInfeasible);
}

TEST(ConicSolve, RandomFeasibleSocpsMeetResidualTolerance) {
  Rng rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 6;
    ConicProblem p(n);
    Mat L = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) L(i, j) = rng.uniform(-1.0, 1.0);
    p.Q = L.transpose() * L / n;
    for (int j = 0; j < n; ++j) p.q(j) = rng.uniform(-1.0, 1.0);
    Vec x0 = Vec::Zero(n);  // strictly feasible by construction
    for (int c = 0; c < 3; ++c) {
      SocConstraint s;
      s.F = Mat::Zero(3, n);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < n; ++j) s.F(i, j) = rng.uniform(-1.0, 1.0);
      s.g = Vec::Zero(3);
      for (int i = 0; i < 3; ++i) s.g(i) = rng.uniform(-0.5, 0.5);
      s.c = Vec::Zero(n);
      for (int j = 0; j < n; ++j) s.c(j) = rng.uniform(-0.2, 0.2);
      s.d = s.g.norm() + rng.uniform(0.1, 1.0);
      p.socs.push_back(s);
    }
    p.lower = Vec::Constant(n, -3.0);
    p.upper = Vec::Constant(n, 3.0);
    ASSERT_LE(p.max_violation(x0), 0.0);
    const auto sol = solve(p);
    ASSERT_EQ(sol.status, SolveStatus::kOptimal) << "trial " << trial;
    EXPECT_LE(sol.max_primal_residual, 1e-7);
    EXPECT_NEAR(sol.max_primal_residual, p.max_violation(sol.x), 1e-15);
    EXPECT_LE(sol.objective_value, p.objective(x0) + 1e-7);
  }
}

TEST(ConicSolve, RejectsMalformedProblems) {
  ConicProblem p(2);
  p.Q(0, 0) = -1.0;
  EXPECT_THROW(solve(p), Error);
  ConicProblem b(1);
  b.lower(0) = 2.0;
  b.upper(0) = 1.0;
  EXPECT_THROW(solve(b), Error);
  ConicProblem q(2);
  SocConstraint s;
  s.F = Mat::Zero(1, 3);
  s.g = Vec::Zero(1);
  s.c = Vec::Zero(2);
  q.socs.push_back(s);
  EXPECT_THROW(solve(q), Error);
}

namespace {

struct SubproblemFixture {
  NetworkConfig cfg;
  CommStatistics stats;
  SensingForms forms;
  AllocationState prev;
  SubproblemFixture() {
    cfg = test::small_config(4, 2, 2);
    const auto scn = generate_scenario(cfg, 3);
    stats = comm_statistics(scn, cfg, 5);
    forms = sensing_matrices(scn, precode(draw_channels(scn, cfg, 6), cfg), SymbolBlock{}, cfg);
    prev = *initialize_feasible(stats, forms, cfg);
  }
};

double cone_gap(const SocConstraint& s, const Vec& x) {
  return s.c.dot(x) + s.d - (s.F * x + s.g).norm();
}

}  // namespace

TEST(Subproblem, ConstraintCensus) {
  SubproblemFixture f;
  const auto sub = assemble_subproblem(f.stats, f.forms, f.prev, f.cfg);
  EXPECT_EQ(sub.layout.num_vars(), 4 * 2 + 4);
  EXPECT_EQ(sub.problem.socs.size(), 2u + 1u + 4u);
  EXPECT_EQ(sub.problem.linear.size(), 2u);
  SubproblemOptions opts;
  opts.enforce_binary_restriction = true;
  EXPECT_EQ(assemble_subproblem(f.stats, f.forms, f.prev, f.cfg, opts).problem.linear.size(), 2u + 4u);
  opts = {};
  opts.optimize_alpha = false;
  opts.active_aps = {2, 0};
  const auto fixed = assemble_subproblem(f.stats, f.forms, f.prev, f.cfg, opts);
  EXPECT_EQ(fixed.layout.num_vars(), 2 * 2);
  EXPECT_EQ(fixed.problem.socs.size(), 2u + 1u + 2u);
  EXPECT_NO_THROW(fixed.problem.validate());
}

TEST(Subproblem, ObjectiveMajorizesPenalizedPower) {
  SubproblemFixture f;
  Rng rng(9);
  for (int t = 0; t < 50; ++t) {
    AllocationState prev = f.prev;
    for (int k = 0; k < 4; ++k) prev.alpha(k) = rng.uniform();
    const auto sub = assemble_subproblem(f.stats, f.forms, prev, f.cfg);
    const double mu = f.cfg.binary_penalty_weight;
    EXPECT_NEAR(sub.problem.objective(sub.layout.pack(prev)),
                model_power(prev, f.stats, f.cfg) + binary_gap(prev.alpha, mu), 1e-9);
    AllocationState other = prev;
    for (int k = 0; k < 4; ++k) other.alpha(k) = rng.uniform();
    EXPECT_GE(sub.problem.objective(sub.layout.pack(other)) + 1e-12,
              model_power(other, f.stats, f.cfg) + binary_gap(other.alpha, mu));
  }
}

TEST(Subproblem, PackUnpackRoundTrip) {
  SubproblemFixture f;
  const auto sub = assemble_subproblem(f.stats, f.forms, f.prev, f.cfg);
  const auto back = sub.layout.unpack(sub.layout.pack(f.prev));
  EXPECT_NEAR((back.rho - f.prev.rho).norm(), 0.0, 1e-15);
  EXPECT_NEAR((back.alpha - f.prev.alpha).norm(), 0.0, 1e-15);
}

TEST(Subproblem, RateConesMatchSinrThreshold) {
  SubproblemFixture f;
  const auto sub = assemble_subproblem(f.stats, f.forms, f.prev, f.cfg);
  const double th = gamma_threshold(f.cfg);
  Rng rng(10);
  int checked = 0;
  for (int t = 0; t < 400; ++t) {
    AllocationState s = f.prev;
    for (int j = 0; j < s.rho.size(); ++j) s.rho(j) *= rng.uniform(0.2, 2.0);
    const Vec x = sub.layout.pack(s);
    const auto sinr = comm_sinr(s, f.stats, f.cfg.noise_power);
    for (int i = 0; i < 2; ++i) {
      const double margin = sinr[i] / th - 1.0;
      if (std::abs(margin) < 1e-6) continue;
      EXPECT_EQ(cone_gap(sub.problem.socs[i], x) >= 0.0, margin > 0.0);
      ++checked;
    }
  }
  EXPECT_GT(checked, 700);
}

TEST(Subproblem, SensingConeIsAnInnerRestriction) {
  SubproblemFixture f;
  const auto sub = assemble_subproblem(f.stats, f.forms, f.prev, f.cfg);
  const SocConstraint& cone = sub.problem.socs[2];
  const Vec x_prev = sub.layout.pack(f.prev);
  // Tight only where the true constraint is tight; feasible at prev.
  EXPECT_GE(cone_gap(cone, x_prev), -1e-9);
  Rng rng(11);
  int inside = 0;
  for (int t = 0; t < 2000; ++t) {
    AllocationState s = f.prev;
    for (int j = 0; j < s.rho.size(); ++j) s.rho(j) *= rng.uniform(0.0, 3.0);
    if (cone_gap(cone, sub.layout.pack(s)) >= 0.0) {
      ++inside;
      EXPECT_GE(sensing_sinr(s, f.forms, f.cfg), f.cfg.gamma_sen * (1.0 - 1e-9));
    }
  }
  EXPECT_GT(inside, 0);
}

TEST(Subproblem, PowerConesFollowActivity) {
  SubproblemFixture f;
  const auto sub = assemble_subproblem(f.stats, f.forms, f.prev, f.cfg);
  AllocationState s = f.prev;
  s.alpha(1) = 0.0;
  const Vec x = sub.layout.pack(s);
  const SocConstraint& cone = sub.problem.socs[3 + 1];
  // With alpha = 0 the AP may not radiate.
  EXPECT_LT(cone_gap(cone, x), 0.0);
  s.rho.segment(2, 2).setZero();
  EXPECT_GE(cone_gap(cone, sub.layout.pack(s)), 0.0);
}

TEST(Relaxation, PenaltyDominatesBinaryGap) {
  Rng rng(12);
  for (int t = 0; t < 10000; ++t) {
    const double a = rng.uniform(), ac = rng.uniform();
    const double linearized = a - (ac * ac + 2.0 * ac * (a - ac));
    EXPECT_GE(linearized, a - a * a - 1e-15);
    EXPECT_GE(a - a * a, 0.0);
    EXPECT_NEAR(linearized - (a - a * a), (a - ac) * (a - ac), 1e-14);
  }
}

TEST(Relaxation, RestrictionAtBinaryPointsPinsAlpha) {
  // a (1 - 2 ac) <= -ac^2
  auto holds = [](double a, double ac) { return a * (1.0 - 2.0 * ac) <= -ac * ac + 1e-15; };
  Rng rng(13);
  for (int t = 0; t < 10000; ++t) {
    const double a = rng.uniform();
    EXPECT_EQ(holds(a, 1.0), a >= 1.0 - 1e-15);
    EXPECT_EQ(holds(a, 0.0), a <= 1e-15);
    // At ac = 1/2 the coefficient of a vanishes and the constant 1/4 remains.
    EXPECT_FALSE(holds(a, 0.5));
  }
  EXPECT_TRUE(holds(1.0, 1.0));
  EXPECT_TRUE(holds(0.0, 0.0));
}

TEST(Subproblem, DumpListsEverySection) {
  SubproblemFixture f;
  const auto sub = assemble_subproblem(f.stats, f.forms, f.prev, f.cfg);
  std::ostringstream os;
  dump_problem(sub.problem, os);
  const std::string s = os.str();
  for (const char* key : {"objective_Q", "objective_q", "linear", "soc 0", "soc 6", "bounds"}) {
    EXPECT_NE(s.find(key), std::string::npos) << key;
  }
}
