#include "cfisac/jpalb.hpp"

#include <algorithm>
#include <cmath>

namespace cfisac {

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::kConverged: return "converged";
    case RunStatus::kIterationLimit: return "iteration_limit";
    case RunStatus::kInfeasible: return "infeasible";
  }
  return "unknown";
}

namespace {

std::vector<int> all_aps(int K) {
  std::vector<int> out(K);
  for (int k = 0; k < K; ++k) out[k] = k;
  return out;
}

struct CcpResult {
  RunStatus status = RunStatus::kIterationLimit;
  int iterations = 0;
  std::vector<double> trace;
  AllocationState state;
  std::string message;
};

double ccp_value(const AllocationState& s, const CommStatistics& stats, const NetworkConfig& cfg) {
  return model_power(s, stats, cfg) + binary_gap(s.alpha, cfg.binary_penalty_weight);
}

CcpResult run_ccp(const CommStatistics& stats, const SensingForms& forms, const NetworkConfig& cfg,
                  const SubproblemOptions& sub, AllocationState start, const JpalbOptions& opts) {
  CcpResult r;
  r.state = std::move(start);
  r.trace.push_back(ccp_value(r.state, stats, cfg));
  for (int c = 1; c <= cfg.max_ccp_iterations; ++c) {
    const auto asm_ = assemble_subproblem(stats, forms, r.state, cfg, sub);
    const ConicSolution sol = solve(asm_.problem, opts.solver);
    if (sol.status != SolveStatus::kOptimal) {
      r.status = RunStatus::kIterationLimit;
      r.message = "subproblem " + to_string(sol.status) + " at iteration " + std::to_string(c);
      return r;
    }
    AllocationState next = asm_.layout.unpack(sol.x);
    const double f = ccp_value(next, stats, cfg);
    const double prev = r.trace.back();
    r.iterations = c;
    // The previous iterate is feasible for this subproblem, so an increase is
    // solver inexactness; keep the old point and stop.
    if (f > prev) {
      r.status = RunStatus::kConverged;
      return r;
    }
    r.state = std::move(next);
    r.trace.push_back(f);
    if (std::abs(f - prev) <= cfg.ccp_tolerance) {
      r.status = RunStatus::kConverged;
      return r;
    }
  }
  r.status = RunStatus::kIterationLimit;
  r.message = "iteration limit reached";
  return r;
}

SolveReport infeasible_report(const std::string& why) {
  SolveReport rep;
  rep.status = RunStatus::kInfeasible;
  rep.message = why;
  return rep;
}

}  // namespace

std::optional<AllocationState> initialize_feasible(const CommStatistics& stats,
                                                   const SensingForms& forms,
                                                   const NetworkConfig& cfg,
                                                   const std::vector<int>& active_aps,
                                                   const JpalbOptions& opts) {
  const int K = stats.num_aps;
  const int U = stats.num_ues;
  const std::vector<int> aps = active_aps.empty() ? all_aps(K) : active_aps;

  AllocationState seed;
  seed.rho = Vec::Zero(K * U);
  seed.alpha = Vec::Ones(K);
  SubproblemOptions sub;
  sub.optimize_alpha = false;
  sub.active_aps = aps;
  sub.include_sensing = false;
  sub.include_penalty = false;
  sub.objective = SubproblemObjective::kSumSquares;
  const auto asm_ = assemble_subproblem(stats, forms, seed, cfg, sub);
  const ConicSolution sol = solve(asm_.problem, opts.solver);
  if (sol.status != SolveStatus::kOptimal) return std::nullopt;
  AllocationState s = asm_.layout.unpack(sol.x);

  // sigma^2 c^2 a >= Gamma (c^2 b + noise)  <=>  c^2 (sigma^2 a - Gamma b) >= Gamma noise.
  const Vec eff = s.effective_rho();
  const double a = cfg.rcs_variance * forms.quad_a(eff);
  const double b = cfg.gamma_sen * forms.quad_b(eff);
  const double need = cfg.gamma_sen * forms.noise_floor;
  if (!(a - b > 0.0)) return std::nullopt;
  const double c2 = std::max(1.0, need / (a - b));
  for (int k : aps) {
    double p = 0.0;
    for (int i = 0; i < U; ++i) {
      const double g = stats.G[k](i);
      p += g * g * s.rho(k * U + i) * s.rho(k * U + i);
    }
    if (c2 * p > cfg.p_max * (1.0 + 1e-9)) return std::nullopt;
  }
  s.rho *= std::sqrt(c2);
  return s;
}

void evaluate_state(SolveReport& report, const AllocationState& state, const CommStatistics& stats,
                    const SensingForms& forms, const NetworkConfig& cfg) {
  const int K = state.num_aps();
  const int U = state.num_ues();
  report.final_state = state;
  report.active_aps.clear();
  for (int k = 0; k < K; ++k) {
    if (state.alpha(k) > 0.5) report.active_aps.push_back(k);
  }
  const auto sinr = comm_sinr(state, stats, cfg.noise_power);
  report.achieved_rates.resize(U);
  report.constraint_slacks.rate.resize(U);
  for (int i = 0; i < U; ++i) {
    report.achieved_rates[i] = urllc_rate(sinr[i], cfg);
    report.constraint_slacks.rate[i] = report.achieved_rates[i] - cfg.r_min;
  }
  report.achieved_sensing_sinr = sensing_sinr(state, forms, cfg);
  report.constraint_slacks.sensing_db =
      linear_to_db(report.achieved_sensing_sinr) - linear_to_db(cfg.gamma_sen);
  report.constraint_slacks.power.resize(K);
  for (int k = 0; k < K; ++k) {
    double p = 0.0;
    for (int i = 0; i < U; ++i) {
      const double g = stats.G[k](i);
      p += g * g * state.rho(k * U + i) * state.rho(k * U + i);
    }
    report.constraint_slacks.power[k] = cfg.p_max - state.alpha(k) * p;
  }
  report.power = total_power(state, report.achieved_rates, cfg, stats);
}

SolveReport solve_pattern(const CommStatistics& stats, const SensingForms& forms,
                          const NetworkConfig& cfg, const std::vector<int>& active_aps,
                          const JpalbOptions& opts) {
  if (active_aps.empty()) return infeasible_report("empty activity pattern");
  auto init = initialize_feasible(stats, forms, cfg, active_aps, opts);
  if (!init) return infeasible_report("no feasible starting point for the pattern");
  SubproblemOptions sub;
  sub.optimize_alpha = false;
  sub.active_aps = active_aps;
  sub.include_penalty = false;
  CcpResult ccp = run_ccp(stats, forms, cfg, sub, *init, opts);
  SolveReport rep;
  rep.status = ccp.status;
  rep.iterations = ccp.iterations;
  rep.objective_trace = std::move(ccp.trace);
  rep.message = ccp.message;
  evaluate_state(rep, ccp.state, stats, forms, cfg);
  return rep;
}

SolveReport run_nlb(const CommStatistics& stats, const SensingForms& forms,
                    const NetworkConfig& cfg, const JpalbOptions& opts) {
  return solve_pattern(stats, forms, cfg, all_aps(stats.num_aps), opts);
}

SolveReport run_jpalb(const CommStatistics& stats, const SensingForms& forms,
                      const NetworkConfig& cfg, const JpalbOptions& opts) {
  const int K = stats.num_aps;
  auto init = initialize_feasible(stats, forms, cfg, {}, opts);
  if (!init) return infeasible_report("no feasible starting point");

  SubproblemOptions sub;
  sub.optimize_alpha = true;
  sub.include_penalty = true;
  sub.enforce_binary_restriction = opts.enforce_binary_restriction;
  CcpResult ccp = run_ccp(stats, forms, cfg, sub, *init, opts);

  const Vec& alpha = ccp.state.alpha;
  double gap = 0.0;
  for (int k = 0; k < K; ++k) gap = std::max(gap, std::abs(alpha(k) - std::round(alpha(k))));

  // Fix the activity pattern from the relaxed iterate: APs ranked by alpha,
  // smallest feasible leading group found by bisection, cheapest candidate
  // among it and its neighbours kept.
  std::vector<int> order(K);
  for (int k = 0; k < K; ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return alpha(a) > alpha(b); });
  int support = 0;
  while (support < K && alpha(order[support]) > opts.activity_threshold) ++support;
  auto prefix = [&](int n) {
    std::vector<int> p(order.begin(), order.begin() + n);
    std::sort(p.begin(), p.end());
    return p;
  };

  SolveReport rep = infeasible_report("no activity pattern is feasible");
  auto consider = [&](SolveReport cand) {
    if (cand.status == RunStatus::kInfeasible) return false;
    if (rep.status == RunStatus::kInfeasible || cand.power.total < rep.power.total) rep = std::move(cand);
    return true;
  };
  int hi = K;
  if (support > 0 && consider(solve_pattern(stats, forms, cfg, prefix(support), opts))) {
    hi = support;
  } else if (!consider(solve_pattern(stats, forms, cfg, prefix(K), opts))) {
    return infeasible_report("no activity pattern is feasible");
  }
  int lo = 0;  // prefix(lo) infeasible or empty, prefix(hi) feasible
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    if (consider(solve_pattern(stats, forms, cfg, prefix(mid), opts))) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  // Neighbours of the smallest group: one AP more, or its weakest member
  // swapped for one of the next two in rank.
  if (hi < K) consider(solve_pattern(stats, forms, cfg, prefix(hi + 1), opts));
  for (int e = hi; e < std::min(K, hi + 2); ++e) {
    std::vector<int> p(order.begin(), order.begin() + hi);
    p.back() = order[e];
    std::sort(p.begin(), p.end());
    consider(solve_pattern(stats, forms, cfg, p, opts));
  }

  const std::string pattern_message = rep.message;
  rep.objective_trace = std::move(ccp.trace);
  rep.iterations = ccp.iterations;
  rep.relaxed_binary_gap = gap;
  if (ccp.status != RunStatus::kConverged) {
    rep.status = RunStatus::kIterationLimit;
    rep.message = ccp.message;
  } else if (rep.status != RunStatus::kConverged) {
    rep.message = "final pattern solve: " + pattern_message;
  }
  return rep;
}

SolveReport enumerate_oracle(const CommStatistics& stats, const SensingForms& forms,
                             const NetworkConfig& cfg, const JpalbOptions& opts) {
  const int K = stats.num_aps;
  if (K > 10) throw Error("enumerate_oracle supports at most 10 APs");
  SolveReport best = infeasible_report("all activity patterns infeasible");
  bool have = false;
  for (unsigned mask = 1; mask < (1u << K); ++mask) {
    std::vector<int> pattern;
    for (int k = 0; k < K; ++k) {
      if (mask & (1u << k)) pattern.push_back(k);
    }
    SolveReport rep = solve_pattern(stats, forms, cfg, pattern, opts);
    if (rep.status == RunStatus::kInfeasible) continue;
    bool take = !have;
    if (have) {
      const double a = rep.power.total;
      const double b = best.power.total;
      if (a < b - 1e-9 * std::max(1.0, b)) {
        take = true;
      } else if (std::abs(a - b) <= 1e-9 * std::max(1.0, b)) {
        take = rep.active_aps.size() < best.active_aps.size() ||
               (rep.active_aps.size() == best.active_aps.size() && rep.active_aps < best.active_aps);
      }
    }
    if (take) {
      best = std::move(rep);
      have = true;
    }
  }
  return best;
}

Certification certify(const AllocationState& state, const CommStatistics& fresh_stats,
                      const SensingForms& fresh_forms, const NetworkConfig& cfg) {
  Certification c;
  const auto sinr = comm_sinr(state, fresh_stats, cfg.noise_power);
  c.min_rate_margin = kInf;
  for (double g : sinr) {
    const double r = urllc_rate(g, cfg);
    c.rates.push_back(r);
    c.min_rate_margin = std::min(c.min_rate_margin, r - cfg.r_min);
  }
  c.sensing_sinr = sensing_sinr(state, fresh_forms, cfg);
  c.sensing_margin_db = linear_to_db(c.sensing_sinr) - linear_to_db(cfg.gamma_sen);
  c.passed = c.min_rate_margin >= -0.05 && c.sensing_margin_db >= -0.1;
  return c;
}

}  // namespace cfisac
