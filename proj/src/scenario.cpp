#include "cfisac/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cfisac/rng.hpp"

namespace cfisac {

double pathloss(double distance_m) {
  const double d = std::max(distance_m, 1.0);
  return std::pow(10.0, (-30.5 - 36.7 * std::log10(d)) / 10.0);
}

namespace {

// Direction from `from` (at height h_from) toward `to` (at height h_to).
// Coincident horizontal positions are separated by 0.1 m first.
Direction direction(Point2 from, double h_from, Point2 to, double h_to) {
  double dx = to.x - from.x;
  double dy = to.y - from.y;
  if (std::hypot(dx, dy) < 1e-9) dx = 0.1;
  const double horizontal = std::hypot(dx, dy);
  return {std::atan2(dy, dx), std::atan2(h_to - h_from, horizontal)};
}

double distance3d(Point2 a, double ha, Point2 b, double hb) {
  return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) + (ha - hb) * (ha - hb));
}

std::vector<Point2> uniform_points(Rng& rng, int n, double side) {
  std::vector<Point2> pts(static_cast<std::size_t>(n));
  for (auto& p : pts) {
    p.x = rng.uniform(0.0, side);
    p.y = rng.uniform(0.0, side);
  }
  return pts;
}

}  // namespace

Scenario make_scenario(const NetworkConfig& cfg, std::vector<Point2> ap_positions,
                       std::vector<Point2> ue_positions, Point2 target,
                       std::uint64_t shadowing_seed) {
  const int total = static_cast<int>(ap_positions.size());
  const int num_sensing = cfg.num_sensing_aps;
  if (total <= num_sensing) throw Error("need more APs than sensing APs");
  if (ue_positions.empty()) throw Error("need at least one UE");

  Scenario scn;
  scn.ap_positions = std::move(ap_positions);
  scn.ue_positions = std::move(ue_positions);
  scn.target = target;

  std::vector<int> order(static_cast<std::size_t>(total));
  std::iota(order.begin(), order.end(), 0);
  auto dist_to_target = [&](int a) {
    return std::hypot(scn.ap_positions[a].x - target.x, scn.ap_positions[a].y - target.y);
  };
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return dist_to_target(a) < dist_to_target(b); });
  scn.sensing_set.assign(order.begin(), order.begin() + num_sensing);
  std::sort(scn.sensing_set.begin(), scn.sensing_set.end());
  for (int a = 0; a < total; ++a) {
    if (!std::binary_search(scn.sensing_set.begin(), scn.sensing_set.end(), a)) {
      scn.comm_aps.push_back(a);
    }
  }

  const int K = scn.num_comm_aps();
  const int R = scn.num_sensing_aps();
  const int U = scn.num_ues();

  Rng shadow(shadowing_seed);
  scn.beta.resize(U, K);
  for (int i = 0; i < U; ++i) {
    for (int k = 0; k < K; ++k) {
      const Point2 ap = scn.ap_positions[scn.comm_aps[k]];
      double gain = pathloss(distance3d(scn.ue_positions[i], kUeHeight, ap, kApHeight));
      if (cfg.shadowing) gain *= db_to_linear(cfg.shadowing_std_db * shadow.normal());
      scn.beta(i, k) = gain;
    }
  }

  scn.tx_angles.resize(K);
  for (int k = 0; k < K; ++k) {
    scn.tx_angles[k] = direction(scn.ap_positions[scn.comm_aps[k]], kApHeight, target, kTargetHeight);
  }
  scn.rx_angles.resize(R);
  for (int r = 0; r < R; ++r) {
    scn.rx_angles[r] =
        direction(target, kTargetHeight, scn.ap_positions[scn.sensing_set[r]], kApHeight);
  }
  scn.ap_pair_angles.assign(R, std::vector<Direction>(K));
  scn.ap_pair_distance.resize(R, K);
  for (int r = 0; r < R; ++r) {
    const Point2 s = scn.ap_positions[scn.sensing_set[r]];
    for (int k = 0; k < K; ++k) {
      const Point2 c = scn.ap_positions[scn.comm_aps[k]];
      scn.ap_pair_angles[r][k] = direction(c, kApHeight, s, kApHeight);
      scn.ap_pair_distance(r, k) = distance3d(c, kApHeight, s, kApHeight);
    }
  }
  return scn;
}

Scenario generate_scenario(const NetworkConfig& cfg, std::uint64_t layout_seed,
                           std::uint64_t user_seed) {
  cfg.validate();
  Rng layout(layout_seed);
  Rng users(user_seed);
  auto aps = uniform_points(layout, cfg.num_aps + cfg.num_sensing_aps, cfg.area_side);
  auto ues = uniform_points(users, cfg.num_ues, cfg.area_side);
  const Point2 target{cfg.area_side / 2.0, cfg.area_side / 2.0};
  return make_scenario(cfg, std::move(aps), std::move(ues), target,
                       derive_seed(user_seed, 0, Stream::kShadowing));
}

Scenario generate_scenario(const NetworkConfig& cfg, std::uint64_t seed) {
  return generate_scenario(cfg, derive_seed(seed, 0, Stream::kLayout),
                           derive_seed(seed, 0, Stream::kUsers));
}

}  // namespace cfisac
