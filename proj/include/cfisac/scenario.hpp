#pragma once

#include <cstdint>
#include <vector>

#include "cfisac/config.hpp"
#include "cfisac/types.hpp"

namespace cfisac {

inline constexpr double kApHeight = 10.0;
inline constexpr double kUeHeight = 1.5;
inline constexpr double kTargetHeight = 1.5;

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct Direction {
  double azimuth = 0.0;    // radians, from +x axis
  double elevation = 0.0;  // radians, positive when looking up
};

/// Network geometry and large-scale fading for one setup.
///
/// The K + R APs are drawn from one pool; the R nearest to the target are
/// designated sensing APs and the remaining K, in pool order, serve the UEs.
struct Scenario {
  std::vector<Point2> ap_positions;  // K + R
  std::vector<int> comm_aps;         // K indices into ap_positions
  std::vector<int> sensing_set;      // R indices into ap_positions
  std::vector<Point2> ue_positions;  // U
  Point2 target;

  Mat beta;  // U x K linear large-scale gains

  std::vector<Direction> tx_angles;  // per comm AP, toward the target
  std::vector<Direction> rx_angles;  // per sensing AP, from the target toward it
  /// [r][k]: from comm AP k toward sensing AP r.
  std::vector<std::vector<Direction>> ap_pair_angles;
  Mat ap_pair_distance;  // R x K, meters

  int num_comm_aps() const { return static_cast<int>(comm_aps.size()); }
  int num_sensing_aps() const { return static_cast<int>(sensing_set.size()); }
  int num_ues() const { return static_cast<int>(ue_positions.size()); }
};

/// Log-distance path loss, -30.5 - 36.7 log10(d) dB, with d clamped to >= 1 m.
double pathloss(double distance_m);

/// Uniform draw of every AP and UE position from one seed.
Scenario generate_scenario(const NetworkConfig& cfg, std::uint64_t seed);
/// AP layout and UE drop from separate seeds, so a layout can be held fixed
/// while users are redrawn.
Scenario generate_scenario(const NetworkConfig& cfg, std::uint64_t layout_seed,
                           std::uint64_t user_seed);

/// Builds a scenario from explicit positions (sensing selection, gains and
/// angles are derived). `shadowing_seed` is only used when cfg.shadowing is set.
Scenario make_scenario(const NetworkConfig& cfg, std::vector<Point2> ap_positions,
                       std::vector<Point2> ue_positions, Point2 target,
                       std::uint64_t shadowing_seed = 0);

}  // namespace cfisac
