#include "cfisac/propagation.hpp"

#include <cmath>
#include <numbers>

#include "cfisac/linalg.hpp"
#include "cfisac/rng.hpp"

namespace cfisac {

namespace {

constexpr double kPi = std::numbers::pi;

CMat hermitian_sqrt(const CMat& m) {
  Eigen::SelfAdjointEigenSolver<CMat> eig(0.5 * (m + m.adjoint()));
  const Vec d = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * d.asDiagonal() * eig.eigenvectors().adjoint();
}

}  // namespace

CVec steering(double azimuth, double elevation, int antennas) {
  CVec a(antennas);
  const double phase = kPi * std::sin(azimuth) * std::cos(elevation);
  for (int m = 0; m < antennas; ++m) a(m) = std::polar(1.0, phase * m);
  return a;
}

ChannelRealization draw_channels(const Scenario& scn, const NetworkConfig& cfg, std::uint64_t seed) {
  const int K = scn.num_comm_aps();
  const int U = scn.num_ues();
  const int M = cfg.antennas;
  Rng rng(seed);
  ChannelRealization out;
  out.per_ap.assign(K, CMat(M, U));
  for (int k = 0; k < K; ++k) {
    for (int i = 0; i < U; ++i) {
      const double b = scn.beta(i, k);
      for (int m = 0; m < M; ++m) out.per_ap[k](m, i) = rng.complex_normal(b);
    }
  }
  return out;
}

CMat precode(const CMat& local_channels, const NetworkConfig& cfg) {
  const Eigen::Index U = local_channels.cols();
  for (Eigen::Index i = 0; i < U; ++i) {
    if (local_channels.col(i).norm() == 0.0) throw Error("degenerate channel");
  }
  CMat w;
  if (cfg.precoder == Precoder::kMrt) {
    w = local_channels;
  } else {
    const double lambda = static_cast<double>(U) * cfg.noise_power / cfg.p_max;
    CMat gram = local_channels.adjoint() * local_channels;
    gram.diagonal().array() += lambda;
    w = local_channels * gram.ldlt().solve(CMat::Identity(U, U));
  }
  for (Eigen::Index i = 0; i < U; ++i) {
    const double n = w.col(i).norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw Error("degenerate channel");
    w.col(i) /= n;
  }
  return w;
}

PrecoderSet precode(const ChannelRealization& channels, const NetworkConfig& cfg) {
  PrecoderSet out;
  out.per_ap.reserve(channels.per_ap.size());
  for (const auto& hk : channels.per_ap) out.per_ap.push_back(precode(hk, cfg));
  return out;
}

CMat local_scattering_correlation(double psi, double spread_rad, double gain, int antennas) {
  CMat r(antennas, antennas);
  for (int m = 0; m < antennas; ++m) {
    for (int n = 0; n < antennas; ++n) {
      const double d = static_cast<double>(m - n);
      const double spread = kPi * d * std::cos(psi) * spread_rad;
      r(m, n) = gain * std::polar(std::exp(-0.5 * spread * spread), kPi * d * std::sin(psi));
    }
  }
  return project_psd(r);
}

ClutterModel clutter_correlations(const Scenario& scn, const NetworkConfig& cfg) {
  const int K = scn.num_comm_aps();
  const int R = scn.num_sensing_aps();
  const double spread = cfg.clutter_angular_spread_deg * kPi / 180.0;
  const double attenuation = db_to_linear(-cfg.clutter_attenuation_db);
  ClutterModel model;
  model.rx.assign(R, std::vector<CMat>(K));
  model.tx.assign(R, std::vector<CMat>(K));
  for (int r = 0; r < R; ++r) {
    for (int k = 0; k < K; ++k) {
      const double gain = pathloss(scn.ap_pair_distance(r, k)) * attenuation;
      const double toward_sensing = scn.ap_pair_angles[r][k].azimuth;
      model.tx[r][k] = local_scattering_correlation(toward_sensing, spread, gain, cfg.antennas);
      model.rx[r][k] = local_scattering_correlation(toward_sensing + kPi, spread, gain, cfg.antennas);
    }
  }
  return model;
}

ClutterChannels clutter_realization(const ClutterModel& model, std::uint64_t seed) {
  Rng rng(seed);
  ClutterChannels out(model.rx.size());
  for (std::size_t r = 0; r < model.rx.size(); ++r) {
    out[r].resize(model.rx[r].size());
    for (std::size_t k = 0; k < model.rx[r].size(); ++k) {
      const CMat& rx = model.rx[r][k];
      const CMat& tx = model.tx[r][k];
      CMat g(rx.rows(), tx.rows());
      for (Eigen::Index a = 0; a < g.rows(); ++a) {
        for (Eigen::Index b = 0; b < g.cols(); ++b) g(a, b) = rng.complex_normal(1.0);
      }
      out[r][k] = hermitian_sqrt(rx) * g * hermitian_sqrt(tx).transpose();
    }
  }
  return out;
}

SymbolBlock draw_symbols(int num_ues, int num_instants, std::uint64_t seed) {
  Rng rng(seed);
  SymbolBlock block;
  block.per_instant.assign(num_instants, CVec(num_ues));
  for (auto& s : block.per_instant) {
    for (int i = 0; i < num_ues; ++i) {
      const auto q = static_cast<int>(rng.next_u64() >> 62);
      s(i) = std::polar(1.0, kPi / 4.0 + q * kPi / 2.0);
    }
  }
  return block;
}

}  // namespace cfisac
