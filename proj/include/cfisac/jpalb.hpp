#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cfisac/conic.hpp"
#include "cfisac/config.hpp"
#include "cfisac/metrics.hpp"

namespace cfisac {

enum class RunStatus { kConverged, kIterationLimit, kInfeasible };
std::string to_string(RunStatus s);

struct ConstraintSlacks {
  std::vector<double> rate;   // achieved rate minus R_min, per UE
  double sensing_db = 0.0;    // achieved sensing SINR over threshold, dB
  std::vector<double> power;  // P_max minus per-AP transmit power
};

struct SolveReport {
  RunStatus status = RunStatus::kInfeasible;
  int iterations = 0;
  std::vector<double> objective_trace;
  AllocationState final_state;
  std::vector<int> active_aps;
  PowerBreakdown power;
  std::vector<double> achieved_rates;
  double achieved_sensing_sinr = 0.0;
  ConstraintSlacks constraint_slacks;
  /// Largest |alpha_k - round(alpha_k)| of the relaxed iterate before the
  /// activity pattern was fixed (JPALB only).
  double relaxed_binary_gap = 0.0;
  std::string message;
};

struct JpalbOptions {
  /// APs whose relaxed alpha exceeds this are kept on in the final pattern.
  double activity_threshold = 1e-3;
  bool enforce_binary_restriction = false;
  SolverSettings solver;
};

/// Rate-feasible point on the given APs (all when empty), scaled up until the
/// sensing constraint holds. Empty when no such point exists.
std::optional<AllocationState> initialize_feasible(const CommStatistics& stats,
                                                   const SensingForms& forms,
                                                   const NetworkConfig& cfg,
                                                   const std::vector<int>& active_aps = {},
                                                   const JpalbOptions& opts = {});

SolveReport run_jpalb(const CommStatistics& stats, const SensingForms& forms,
                      const NetworkConfig& cfg, const JpalbOptions& opts = {});

/// All APs on; CCP over the amplitudes only.
SolveReport run_nlb(const CommStatistics& stats, const SensingForms& forms,
                    const NetworkConfig& cfg, const JpalbOptions& opts = {});

/// CCP over the amplitudes with a fixed binary activity pattern.
SolveReport solve_pattern(const CommStatistics& stats, const SensingForms& forms,
                          const NetworkConfig& cfg, const std::vector<int>& active_aps,
                          const JpalbOptions& opts = {});

/// Exhaustive search over all 2^K activity patterns (K <= 10).
SolveReport enumerate_oracle(const CommStatistics& stats, const SensingForms& forms,
                             const NetworkConfig& cfg, const JpalbOptions& opts = {});

/// Fills rates, sensing SINR, power breakdown and slacks for `state`.
void evaluate_state(SolveReport& report, const AllocationState& state,
                    const CommStatistics& stats, const SensingForms& forms,
                    const NetworkConfig& cfg);

struct Certification {
  bool passed = false;
  std::vector<double> rates;
  double sensing_sinr = 0.0;
  double min_rate_margin = 0.0;   // min_i R_i - R_min
  double sensing_margin_db = 0.0; // SINR_dB - Gamma_dB
};

/// Re-checks `state` against statistics estimated independently of the ones
/// it was optimized on: rates >= R_min - 0.05 and SINR >= Gamma - 0.1 dB.
Certification certify(const AllocationState& state, const CommStatistics& fresh_stats,
                      const SensingForms& fresh_forms, const NetworkConfig& cfg);

}  // namespace cfisac
