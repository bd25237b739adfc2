#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cfisac/config.hpp"
#include "cfisac/jpalb.hpp"
#include "cfisac/metrics.hpp"
#include "cfisac/scenario.hpp"

namespace cfisac {

enum class Method { kJpalb, kNlb, kOracle };
std::string to_string(Method m);
Method method_from_string(const std::string& s);

/// Everything one setup needs: geometry, communication statistics and the
/// sensing forms of its operating precoders.
struct SetupInputs {
  int setup_index = 0;
  std::uint64_t user_seed = 0;
  Scenario scenario;
  CommStatistics stats;
  PrecoderSet precoders;
  SensingForms forms;
};

/// Deterministic in (cfg.master_seed, setup_index). The AP layout is shared by
/// all setups unless cfg.redraw_ap_layout is set.
SetupInputs prepare_setup(const NetworkConfig& cfg, int setup_index);

/// Statistics and sensing forms for the same setup and precoders, estimated
/// from draws independent of the ones prepare_setup uses. The sensing forms
/// come from a fresh symbol block in realization mode.
struct Verification {
  CommStatistics stats;
  SensingForms forms;
};
Verification prepare_verification(const NetworkConfig& cfg, const SetupInputs& setup);

struct SetupRecord {
  int setup_index = 0;
  std::uint64_t seed = 0;
  Method method = Method::kJpalb;
  Precoder precoder = Precoder::kMrt;
  double gamma_sen_db = 0.0;
  std::string status;
  double total_w = 0.0;
  double transmit_w = 0.0;
  double static_w = 0.0;
  double fronthaul_w = 0.0;
  int active_ap_count = 0;
  int iterations = 0;
  double wall_time_seconds = 0.0;
  double min_rate = 0.0;
  double sensing_sinr = 0.0;

  bool feasible() const { return status != "infeasible" && status != "error"; }
};

nlohmann::json to_json(const SetupRecord& r);
SetupRecord record_from_json(const nlohmann::json& j);

struct CdfPoint {
  double value = 0.0;
  double probability = 0.0;
};

/// Sorted step function with probability i/n at the i-th order statistic.
/// Throws Error on an empty list.
std::vector<CdfPoint> empirical_cdf(std::vector<double> values);

struct MethodSummary {
  Method method = Method::kJpalb;
  int count = 0;       // feasible setups
  int infeasible = 0;
  double mean_total_w = 0.0;
  double median_total_w = 0.0;
  double mean_transmit_w = 0.0;
  double mean_static_w = 0.0;
  double mean_fronthaul_w = 0.0;
  /// Mean over feasible setups of the fraction of comm APs switched off.
  double shutdown_fraction = 0.0;
  std::vector<CdfPoint> cdf;
};

struct SweepPoint {
  double gamma_db = 0.0;
  Method method = Method::kJpalb;
  int count = 0;
  double mean_total_w = 0.0;
};

struct ExperimentSummary {
  int num_setups = 0;
  int num_aps = 0;
  double gamma_sen_db = 0.0;
  int infeasible_count = 0;
  std::vector<MethodSummary> methods;
  std::vector<SweepPoint> sweep;

  const MethodSummary* find(Method m) const;
};

struct ExperimentOptions {
  int num_setups = 100;
  std::vector<Method> methods{Method::kJpalb, Method::kNlb};
  /// Extra sensing thresholds (dB) evaluated on the same setups.
  std::vector<double> sweep_gamma_db;
  int workers = 1;
  JpalbOptions solver;
};

struct ExperimentResult {
  std::vector<SetupRecord> records;
  ExperimentSummary summary;
};

/// Runs every method on every setup, then once more per sweep threshold.
/// Failing setups become status rows; the batch never aborts.
ExperimentResult run_experiment(const NetworkConfig& cfg, const ExperimentOptions& opts);

/// Rebuilds the summary from records alone. Sweep points use the records
/// tagged with each threshold; everything else uses the base threshold.
ExperimentSummary summarize(const std::vector<SetupRecord>& records, int num_setups, int num_aps,
                            double base_gamma_db, const std::vector<double>& sweep_gamma_db);

nlohmann::json to_json(const ExperimentSummary& s);

/// records.jsonl, summary.json, cdf.csv, breakdown.csv, sweep.csv and the
/// SVG charts fig_cdf.svg, fig_breakdown.svg, fig_sweep.svg.
void emit_outputs(const std::vector<SetupRecord>& records, const ExperimentSummary& summary,
                  const std::string& out_dir);

}  // namespace cfisac
