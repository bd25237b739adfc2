#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include <nlohmann/json_fwd.hpp>

namespace cfisac {

/// Raised for invalid inputs and unrecoverable modelling errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Precoder { kMrt, kRzf };
enum class SymbolMode { kRealization, kExpectation };

std::string to_string(Precoder p);
Precoder precoder_from_string(const std::string& s);
std::string to_string(SymbolMode m);
SymbolMode symbol_mode_from_string(const std::string& s);

double db_to_linear(double db);
double linear_to_db(double linear);

/// All physical and algorithmic parameters of one network. Powers are in
/// watts, rates in b/s/Hz, thresholds linear unless the name says otherwise.
struct NetworkConfig {
  int num_aps = 32;          // K, communication APs
  int num_sensing_aps = 2;   // R
  int num_ues = 8;           // U
  int antennas = 4;          // M
  double area_side = 500.0;  // meters

  double p_max = 1.0;
  double carrier_freq = 1.9e9;
  double bandwidth = 20e6;
  double noise_power = 3.981071705534973e-13;  // -94 dBm

  int tau = 200;
  int tau_d = 190;
  double epsilon = 1e-5;
  double r_min = 1.0;
  double gamma_sen = 3.981071705534972;  // 6 dB
  double rcs_variance = 1.5848931924611136;  // 2 dBsm

  double pa_inefficiency = 2.5;
  double p_fixed_fh = 0.825;
  double p_hw = 0.2;
  double p_tra_w_per_gbps = 0.25;
  std::optional<double> p0_override;

  int num_channel_draws = 1000;
  int max_ccp_iterations = 50;
  double ccp_tolerance = 1e-3;
  double binary_penalty_weight = 1.0;

  std::uint64_t master_seed = 1;
  Precoder precoder = Precoder::kMrt;
  SymbolMode symbol_mode = SymbolMode::kExpectation;

  double clutter_angular_spread_deg = 15.0;
  double clutter_attenuation_db = 20.0;
  bool shadowing = false;
  double shadowing_std_db = 4.0;
  bool redraw_ap_layout = false;

  /// Static power per AP: fixed fronthaul plus per-antenna hardware power.
  double p0() const { return p0_override ? *p0_override : p_fixed_fh + p_hw * antennas; }
  /// Traffic-dependent fronthaul power per AP per (b/s/Hz) of user rate, in watts.
  double fronthaul_w_per_rate() const { return bandwidth * p_tra_w_per_gbps * 1e-9; }

  /// Throws Error if any field is outside its admissible range.
  void validate() const;
};

/// Default parameters (R_min = 1 b/s/Hz, 6 dB sensing threshold).
NetworkConfig text_defaults();
/// Parameters of the reference experiments (R_min = 2 b/s/Hz, 2 dB sensing threshold, 2 dBsm RCS).
NetworkConfig figure_defaults();
/// Named preset lookup; throws Error for unknown names.
NetworkConfig preset(const std::string& name);

/// Overlays every field present in `j` onto `base`. Unknown keys are rejected.
NetworkConfig apply_json(NetworkConfig base, const nlohmann::json& j);
NetworkConfig load_config(const std::string& path, NetworkConfig base);
nlohmann::json to_json(const NetworkConfig& cfg);

}  // namespace cfisac
