#include "cfisac/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

#include "cfisac/linalg.hpp"
#include "cfisac/rng.hpp"

namespace cfisac {

Vec AllocationState::effective_rho() const {
  const int K = num_aps();
  const int U = num_ues();
  Vec out = rho;
  for (int k = 0; k < K; ++k) out.segment(k * U, U) *= alpha(k);
  return out;
}

Vec AllocationState::ue_vector(int ue) const {
  const int K = num_aps();
  const int U = num_ues();
  Vec out(K);
  for (int k = 0; k < K; ++k) out(k) = alpha(k) * rho(k * U + ue);
  return out;
}

namespace {

// Running sums for one (channels, precoders) stream.
struct StatAccumulator {
  int K = 0;
  int U = 0;
  long count = 0;
  std::vector<CVec> mean;                  // [i], sum of h_{i,k}^H w_{i,k}
  std::vector<std::vector<CMat>> second;   // [i][j], sum of p p^H
  std::vector<Vec> norms;                  // [k]

  StatAccumulator(int k, int u) : K(k), U(u) {
    mean.assign(U, CVec::Zero(K));
    second.assign(U, std::vector<CMat>(U, CMat::Zero(K, K)));
    norms.assign(K, Vec::Zero(U));
  }

  void add(const ChannelRealization& ch, const PrecoderSet& pre) {
    // p[i][j](k) = h_{i,k}^H w_{j,k}
    std::vector<std::vector<CVec>> p(U, std::vector<CVec>(U, CVec(K)));
    for (int k = 0; k < K; ++k) {
      const CMat prod = ch.per_ap[k].adjoint() * pre.per_ap[k];
      for (int i = 0; i < U; ++i) {
        for (int j = 0; j < U; ++j) p[i][j](k) = prod(i, j);
      }
      norms[k] += pre.per_ap[k].colwise().norm().transpose();
    }
    for (int i = 0; i < U; ++i) {
      mean[i] += p[i][i];
      for (int j = 0; j < U; ++j) second[i][j].noalias() += p[i][j] * p[i][j].adjoint();
    }
    ++count;
  }

  CommStatistics finish() const {
    CommStatistics s;
    s.num_aps = K;
    s.num_ues = U;
    const double n = static_cast<double>(count);
    s.b.resize(U);
    s.C.assign(U, std::vector<CMat>(U));
    s.sqrtC.assign(U, std::vector<Mat>(U));
    for (int i = 0; i < U; ++i) {
      const CVec m = mean[i] / n;
      s.b[i] = m.real();
      for (int j = 0; j < U; ++j) {
        CMat c = second[i][j] / n;
        if (i == j) c -= m * m.adjoint();
        s.C[i][j] = project_psd(c);
        s.sqrtC[i][j] = psd_sqrt(project_psd(Mat(s.C[i][j].real())));
      }
    }
    s.G.resize(K);
    for (int k = 0; k < K; ++k) s.G[k] = norms[k] / n;
    return s;
  }
};

}  // namespace

CommStatistics comm_statistics(const Scenario& scn, const NetworkConfig& cfg, std::uint64_t seed) {
  if (cfg.num_channel_draws < 1) throw Error("num_channel_draws must be positive");
  StatAccumulator acc(scn.num_comm_aps(), scn.num_ues());
  for (int n = 0; n < cfg.num_channel_draws; ++n) {
    const auto ch = draw_channels(scn, cfg, derive_seed(seed, static_cast<std::uint64_t>(n)));
    acc.add(ch, precode(ch, cfg));
  }
  return acc.finish();
}

CommStatistics comm_statistics(const std::vector<ChannelRealization>& channels,
                               const std::vector<PrecoderSet>& precoders) {
  if (channels.empty() || channels.size() != precoders.size()) {
    throw Error("comm_statistics: need matching, non-empty draws");
  }
  const int K = static_cast<int>(channels[0].per_ap.size());
  const int U = static_cast<int>(channels[0].per_ap[0].cols());
  StatAccumulator acc(K, U);
  for (std::size_t n = 0; n < channels.size(); ++n) acc.add(channels[n], precoders[n]);
  return acc.finish();
}

std::vector<double> comm_sinr(const AllocationState& state, const CommStatistics& stats,
                              double noise_power) {
  const int U = stats.num_ues;
  std::vector<Vec> r(U);
  for (int j = 0; j < U; ++j) r[j] = state.ue_vector(j);
  std::vector<double> out(U);
  for (int i = 0; i < U; ++i) {
    const double ds = stats.b[i].dot(r[i]);
    double interference = noise_power;
    for (int j = 0; j < U; ++j) {
      interference += r[j].dot(stats.C[i][j].real() * r[j]);
    }
    out[i] = ds * ds / interference;
  }
  return out;
}

double q_function(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double qinv(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw Error("qinv: probability must lie in (0, 1)");
  return std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * epsilon);
}

double urllc_rate(double sinr, const NetworkConfig& cfg) {
  const double tau = cfg.tau;
  const double tau_d = cfg.tau_d;
  const double dispersion = 1.0 - 1.0 / (1.0 + sinr);
  return tau_d / (tau * std::numbers::ln2) * std::log1p(sinr) -
         qinv(cfg.epsilon) / (tau * std::numbers::ln2) * std::sqrt(tau_d * dispersion);
}

double rate_lower_bound(double sinr, const NetworkConfig& cfg) {
  const double tau = cfg.tau;
  const double tau_d = cfg.tau_d;
  return tau_d / (tau * std::numbers::ln2) * std::log1p(sinr) -
         std::sqrt(tau_d) * qinv(cfg.epsilon) / (tau * std::numbers::ln2);
}

double gamma_threshold(const NetworkConfig& cfg) {
  const double tau = cfg.tau;
  const double sd = std::sqrt(static_cast<double>(cfg.tau_d));
  return std::expm1((tau * std::numbers::ln2 / sd * cfg.r_min + qinv(cfg.epsilon)) / sd);
}

double SensingForms::quad_a(const Vec& rho) const {
  double s = 0.0;
  for (std::size_t k = 0; k < A.size(); ++k) {
    const Eigen::Index U = A[k].rows();
    const auto seg = rho.segment(static_cast<Eigen::Index>(k) * U, U);
    s += seg.dot(A[k] * seg);
  }
  return s;
}

double SensingForms::quad_b(const Vec& rho) const {
  double s = 0.0;
  for (std::size_t k = 0; k < B.size(); ++k) {
    const Eigen::Index U = B[k].rows();
    const auto seg = rho.segment(static_cast<Eigen::Index>(k) * U, U);
    s += seg.dot(B[k] * seg);
  }
  return s;
}

namespace {

Mat block_diag(const std::vector<Mat>& blocks) {
  Eigen::Index n = 0;
  for (const auto& b : blocks) n += b.rows();
  Mat out = Mat::Zero(n, n);
  Eigen::Index at = 0;
  for (const auto& b : blocks) {
    out.block(at, at, b.rows(), b.cols()) = b;
    at += b.rows();
  }
  return out;
}

Mat real_psd(const CMat& m) { return project_psd(Mat(0.5 * (m + m.adjoint()).real())); }

}  // namespace

Mat SensingForms::dense_a() const { return block_diag(A); }
Mat SensingForms::dense_b() const { return block_diag(B); }

SensingForms sensing_matrices(const Scenario& scn, const PrecoderSet& precoders,
                              const SymbolBlock& symbols, const NetworkConfig& cfg) {
  return sensing_matrices(scn, precoders, symbols, clutter_correlations(scn, cfg), cfg);
}

SensingForms sensing_matrices(const Scenario& scn, const PrecoderSet& precoders,
                              const SymbolBlock& symbols, const ClutterModel& clutter,
                              const NetworkConfig& cfg) {
  const int K = scn.num_comm_aps();
  const int U = scn.num_ues();
  const int R = scn.num_sensing_aps();
  const int M = cfg.antennas;
  if (static_cast<int>(precoders.per_ap.size()) != K) throw Error("dimension mismatch");
  for (const auto& w : precoders.per_ap) {
    if (w.rows() != M || w.cols() != U) throw Error("dimension mismatch");
  }
  if (static_cast<int>(clutter.rx.size()) != R) throw Error("dimension mismatch");

  // S(i, j) = sum_l conj(s_i[l]) s_j[l]; its expectation is tau_d I.
  CMat S;
  if (cfg.symbol_mode == SymbolMode::kExpectation) {
    S = CMat::Identity(U, U) * static_cast<double>(cfg.tau_d);
  } else {
    if (static_cast<int>(symbols.per_instant.size()) != cfg.tau_d) throw Error("dimension mismatch");
    S = CMat::Zero(U, U);
    for (const auto& s : symbols.per_instant) {
      if (s.size() != U) throw Error("dimension mismatch");
      S.noalias() += s.conjugate() * s.transpose();
    }
  }

  SensingForms forms;
  forms.A.resize(K);
  forms.B.resize(K);
  for (int k = 0; k < K; ++k) {
    const CMat& w = precoders.per_ap[k];
    const CVec a = steering(scn.tx_angles[k].azimuth, scn.tx_angles[k].elevation, M);
    // a^H(phi_r) a(phi_r) = M for every sensing AP.
    const CVec v = w.transpose() * a;
    const CMat a_k = static_cast<double>(M * R) * (v.conjugate() * v.transpose()).cwiseProduct(S);
    CMat b_k = CMat::Zero(U, U);
    for (int r = 0; r < R; ++r) {
      const CMat& rx = clutter.rx[r][k];
      const CMat& tx = clutter.tx[r][k];
      b_k += rx.trace().real() * (w.adjoint() * tx.transpose() * w);
    }
    forms.A[k] = real_psd(a_k);
    forms.B[k] = real_psd(b_k.cwiseProduct(S));
  }
  forms.noise_floor = static_cast<double>(cfg.tau_d) * M * R * cfg.noise_power;
  return forms;
}

double sensing_sinr(const Vec& rho, const SensingForms& forms, const NetworkConfig& cfg) {
  return cfg.rcs_variance * forms.quad_a(rho) / (forms.quad_b(rho) + forms.noise_floor);
}

double sensing_sinr(const AllocationState& state, const SensingForms& forms,
                    const NetworkConfig& cfg) {
  return sensing_sinr(state.effective_rho(), forms, cfg);
}

PowerBreakdown total_power(const AllocationState& state, const std::vector<double>& rates,
                           const NetworkConfig& cfg, const CommStatistics& stats) {
  const int K = state.num_aps();
  const int U = state.num_ues();
  double rate_sum = 0.0;
  for (double r : rates) rate_sum += std::max(r, 0.0);
  PowerBreakdown p;
  for (int k = 0; k < K; ++k) {
    const double a = state.alpha(k);
    double tx = 0.0;
    for (int i = 0; i < U; ++i) {
      const double g = stats.G.empty() ? 1.0 : stats.G[k](i);
      const double amp = state.rho(k * U + i);
      tx += amp * amp * g * g;
    }
    p.transmit += cfg.pa_inefficiency * a * tx;
    p.static_power += a * cfg.p0();
    p.fronthaul_traffic += a * cfg.fronthaul_w_per_rate() * rate_sum;
  }
  p.total = p.transmit + p.static_power + p.fronthaul_traffic;
  return p;
}

}  // namespace cfisac
