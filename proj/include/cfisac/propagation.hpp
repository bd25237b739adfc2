#pragma once

#include <cstdint>
#include <vector>

#include "cfisac/config.hpp"
#include "cfisac/scenario.hpp"
#include "cfisac/types.hpp"

namespace cfisac {

/// Small-scale fading h_{i,k} ~ CN(0, beta_{i,k} I_M), stored per comm AP as
/// an M x U matrix whose column i is h_{i,k}.
struct ChannelRealization {
  std::vector<CMat> per_ap;

  auto h(int ue, int ap) const { return per_ap[static_cast<std::size_t>(ap)].col(ue); }
};

/// W_k per comm AP (M x U, unit-norm columns w_{i,k}).
struct PrecoderSet {
  std::vector<CMat> per_ap;
};

/// Clutter spatial correlations, both indexed [r][k]:
/// rx[r][k] = R_rx,(r,k) at sensing AP r toward comm AP k,
/// tx[r][k] = R_tx,(k,r) at comm AP k toward sensing AP r.
struct ClutterModel {
  std::vector<std::vector<CMat>> rx;
  std::vector<std::vector<CMat>> tx;
};

/// Clutter channels H_{r,k}, indexed [r][k].
using ClutterChannels = std::vector<std::vector<CMat>>;

/// Unit-modulus data symbols s_i[l]; entry l holds the diagonal of D_s[l].
struct SymbolBlock {
  std::vector<CVec> per_instant;
};

/// Half-wavelength ULA along x: a_m = exp(j pi (m-1) sin(az) cos(el)).
CVec steering(double azimuth, double elevation, int antennas);

ChannelRealization draw_channels(const Scenario& scn, const NetworkConfig& cfg, std::uint64_t seed);

/// MRT or RZF precoder for one AP's local channels (M x U). Throws Error on a
/// zero channel column.
CMat precode(const CMat& local_channels, const NetworkConfig& cfg);
PrecoderSet precode(const ChannelRealization& channels, const NetworkConfig& cfg);

/// Gaussian local-scattering correlation around azimuth `psi` with angular
/// standard deviation `spread_rad`, scaled by `gain` and PSD-projected.
CMat local_scattering_correlation(double psi, double spread_rad, double gain, int antennas);

ClutterModel clutter_correlations(const Scenario& scn, const NetworkConfig& cfg);

/// Kronecker clutter H = R_rx^{1/2} G (R_tx^{1/2})^T with G i.i.d. CN(0, 1),
/// so E||H x||^2 = tr(R_rx) x^H R_tx^T x.
ClutterChannels clutter_realization(const ClutterModel& model, std::uint64_t seed);

/// I.i.d. uniform QPSK symbols on the unit circle.
SymbolBlock draw_symbols(int num_ues, int num_instants, std::uint64_t seed);

}  // namespace cfisac
