#pragma once

#include <cstdint>
#include <vector>

#include "cfisac/config.hpp"
#include "cfisac/propagation.hpp"
#include "cfisac/scenario.hpp"
#include "cfisac/types.hpp"

namespace cfisac {

/// Amplitudes and activity indicators. rho(k * U + i) = sqrt(rho_{i,k}), so
/// AP k's sub-vector rho'_k is the contiguous segment [k * U, (k + 1) * U).
struct AllocationState {
  Vec rho;
  Vec alpha;

  int num_aps() const { return static_cast<int>(alpha.size()); }
  int num_ues() const { return alpha.size() == 0 ? 0 : static_cast<int>(rho.size() / alpha.size()); }
  /// rho with AP k's segment scaled by alpha_k.
  Vec effective_rho() const;
  /// Length-K vector [alpha_k sqrt(rho_{i,k})]_k for UE i.
  Vec ue_vector(int ue) const;
};

struct CommStatistics {
  int num_aps = 0;
  int num_ues = 0;
  std::vector<Vec> b;                  // [i], length K
  std::vector<std::vector<CMat>> C;    // [i][j], K x K Hermitian PSD
  std::vector<std::vector<Mat>> sqrtC; // [i][j], PSD root of Re(C_{i,j})
  std::vector<Vec> G;                  // [k], length U, mean ||w_{i,k}||
};

/// Monte-Carlo estimate of b, C, G from cfg.num_channel_draws draws; draw n
/// uses derive_seed(seed, n).
CommStatistics comm_statistics(const Scenario& scn, const NetworkConfig& cfg, std::uint64_t seed);

/// Same estimator over explicit draws and their precoders.
CommStatistics comm_statistics(const std::vector<ChannelRealization>& channels,
                               const std::vector<PrecoderSet>& precoders);

std::vector<double> comm_sinr(const AllocationState& state, const CommStatistics& stats,
                              double noise_power);

double q_function(double x);
double qinv(double epsilon);

double urllc_rate(double sinr, const NetworkConfig& cfg);
/// Rate with the dispersion V replaced by its upper bound 1.
double rate_lower_bound(double sinr, const NetworkConfig& cfg);
double gamma_threshold(const NetworkConfig& cfg);

struct SensingForms {
  std::vector<Mat> A;  // K blocks, U x U
  std::vector<Mat> B;
  double noise_floor = 0.0;

  /// rho^T A rho and rho^T B rho for a stacked KU vector.
  double quad_a(const Vec& rho) const;
  double quad_b(const Vec& rho) const;
  Mat dense_a() const;
  Mat dense_b() const;
};

/// A/B forms for the given precoders. cfg.symbol_mode selects between the
/// exact sum over `symbols` and its symbol expectation (symbols unused).
SensingForms sensing_matrices(const Scenario& scn, const PrecoderSet& precoders,
                              const SymbolBlock& symbols, const NetworkConfig& cfg);
SensingForms sensing_matrices(const Scenario& scn, const PrecoderSet& precoders,
                              const SymbolBlock& symbols, const ClutterModel& clutter,
                              const NetworkConfig& cfg);

double sensing_sinr(const AllocationState& state, const SensingForms& forms,
                    const NetworkConfig& cfg);
/// Same, for an already alpha-scaled stacked vector.
double sensing_sinr(const Vec& rho, const SensingForms& forms, const NetworkConfig& cfg);

struct PowerBreakdown {
  double transmit = 0.0;
  double static_power = 0.0;
  double fronthaul_traffic = 0.0;
  double total = 0.0;
};

/// Rates in b/s/Hz (negative rates count as zero traffic).
PowerBreakdown total_power(const AllocationState& state, const std::vector<double>& rates,
                           const NetworkConfig& cfg, const CommStatistics& stats);

}  // namespace cfisac
