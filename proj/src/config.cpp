#include "cfisac/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>

#include <nlohmann/json.hpp>

namespace cfisac {

using nlohmann::json;

std::string to_string(Precoder p) { return p == Precoder::kMrt ? "MRT" : "RZF"; }

Precoder precoder_from_string(const std::string& s) {
  if (s == "MRT" || s == "mrt") return Precoder::kMrt;
  if (s == "RZF" || s == "rzf") return Precoder::kRzf;
  throw Error("unknown precoder '" + s + "'");
}

std::string to_string(SymbolMode m) {
  return m == SymbolMode::kExpectation ? "expectation" : "realization";
}

SymbolMode symbol_mode_from_string(const std::string& s) {
  if (s == "expectation") return SymbolMode::kExpectation;
  if (s == "realization") return SymbolMode::kRealization;
  throw Error("unknown symbol mode '" + s + "'");
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

void NetworkConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(std::string("invalid config: ") + what);
  };
  require(num_aps >= 1, "K >= 1");
  require(num_sensing_aps >= 1, "R >= 1");
  require(num_ues >= 1, "U >= 1");
  require(antennas >= 1, "M >= 1");
  require(area_side > 0.0, "area_side > 0");
  require(tau_d > 0 && tau_d <= tau, "0 < tau_d <= tau");
  require(epsilon > 0.0 && epsilon < 0.5, "0 < epsilon < 0.5");
  require(gamma_sen > 0.0, "gamma_sen > 0");
  require(r_min >= 0.0, "r_min >= 0");
  require(rcs_variance > 0.0, "rcs_variance > 0");
  require(p_max > 0.0, "p_max > 0");
  require(noise_power > 0.0, "noise_power > 0");
  require(bandwidth >= 0.0 && p_fixed_fh >= 0.0 && p_hw >= 0.0 && p_tra_w_per_gbps >= 0.0,
          "powers and bandwidth >= 0");
  require(!p0_override || *p0_override >= 0.0, "p0 >= 0");
  require(pa_inefficiency >= 1.0, "pa_inefficiency >= 1");
  require(num_channel_draws >= 1, "num_channel_draws >= 1");
  require(max_ccp_iterations >= 1, "max_ccp_iterations >= 1");
  require(ccp_tolerance > 0.0, "ccp_tolerance > 0");
  require(binary_penalty_weight >= 0.0, "binary_penalty_weight >= 0");
  require(clutter_angular_spread_deg >= 0.0, "clutter_angular_spread_deg >= 0");
}

NetworkConfig text_defaults() { return NetworkConfig{}; }

NetworkConfig figure_defaults() {
  NetworkConfig cfg;
  cfg.r_min = 2.0;
  cfg.gamma_sen = db_to_linear(2.0);
  cfg.rcs_variance = db_to_linear(2.0);
  return cfg;
}

NetworkConfig preset(const std::string& name) {
  if (name == "text-defaults") return text_defaults();
  if (name == "figure-defaults") return figure_defaults();
  throw Error("unknown preset '" + name + "'");
}

namespace {

using Setter = std::function<void(NetworkConfig&, const json&)>;

template <typename T>
Setter field(T NetworkConfig::*member) {
  return [member](NetworkConfig& c, const json& v) { c.*member = v.get<T>(); };
}

Setter db_field(double NetworkConfig::*member, double offset_db = 0.0) {
  return [member, offset_db](NetworkConfig& c, const json& v) {
    c.*member = db_to_linear(v.get<double>() + offset_db);
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"K", field(&NetworkConfig::num_aps)},
      {"R", field(&NetworkConfig::num_sensing_aps)},
      {"U", field(&NetworkConfig::num_ues)},
      {"M", field(&NetworkConfig::antennas)},
      {"area_side", field(&NetworkConfig::area_side)},
      {"p_max", field(&NetworkConfig::p_max)},
      {"carrier_freq", field(&NetworkConfig::carrier_freq)},
      {"bandwidth", field(&NetworkConfig::bandwidth)},
      {"noise_power", field(&NetworkConfig::noise_power)},
      {"noise_power_dbm", db_field(&NetworkConfig::noise_power, -30.0)},
      {"tau", field(&NetworkConfig::tau)},
      {"tau_d", field(&NetworkConfig::tau_d)},
      {"epsilon", field(&NetworkConfig::epsilon)},
      {"r_min", field(&NetworkConfig::r_min)},
      {"gamma_sen", field(&NetworkConfig::gamma_sen)},
      {"gamma_sen_db", db_field(&NetworkConfig::gamma_sen)},
      {"rcs_variance", field(&NetworkConfig::rcs_variance)},
      {"rcs_variance_dbsm", db_field(&NetworkConfig::rcs_variance)},
      {"pa_inefficiency", field(&NetworkConfig::pa_inefficiency)},
      {"p_fixed_fh", field(&NetworkConfig::p_fixed_fh)},
      {"p_hw", field(&NetworkConfig::p_hw)},
      {"p_tra_w_per_gbps", field(&NetworkConfig::p_tra_w_per_gbps)},
      {"p0", [](NetworkConfig& c, const json& v) { c.p0_override = v.get<double>(); }},
      {"num_channel_draws", field(&NetworkConfig::num_channel_draws)},
      {"max_ccp_iterations", field(&NetworkConfig::max_ccp_iterations)},
      {"ccp_tolerance", field(&NetworkConfig::ccp_tolerance)},
      {"binary_penalty_weight", field(&NetworkConfig::binary_penalty_weight)},
      {"master_seed", field(&NetworkConfig::master_seed)},
      {"precoder",
       [](NetworkConfig& c, const json& v) { c.precoder = precoder_from_string(v.get<std::string>()); }},
      {"symbol_mode",
       [](NetworkConfig& c, const json& v) {
         c.symbol_mode = symbol_mode_from_string(v.get<std::string>());
       }},
      {"clutter_angular_spread_deg", field(&NetworkConfig::clutter_angular_spread_deg)},
      {"clutter_attenuation_db", field(&NetworkConfig::clutter_attenuation_db)},
      {"shadowing", field(&NetworkConfig::shadowing)},
      {"shadowing_std_db", field(&NetworkConfig::shadowing_std_db)},
      {"redraw_ap_layout", field(&NetworkConfig::redraw_ap_layout)},
  };
  return table;
}

}  // namespace

NetworkConfig apply_json(NetworkConfig base, const json& j) {
  if (!j.is_object()) throw Error("config document must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    const auto it = setters().find(key);
    if (it == setters().end()) throw Error("unknown config key '" + key + "'");
    try {
      it->second(base, value);
    } catch (const json::exception& e) {
      throw Error("config key '" + key + "': " + e.what());
    }
  }
  base.validate();
  return base;
}

NetworkConfig load_config(const std::string& path, NetworkConfig base) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error("config file '" + path + "': " + e.what());
  }
  return apply_json(std::move(base), j);
}

json to_json(const NetworkConfig& c) {
  json j = {
      {"K", c.num_aps},
      {"R", c.num_sensing_aps},
      {"U", c.num_ues},
      {"M", c.antennas},
      {"area_side", c.area_side},
      {"p_max", c.p_max},
      {"carrier_freq", c.carrier_freq},
      {"bandwidth", c.bandwidth},
      {"noise_power", c.noise_power},
      {"tau", c.tau},
      {"tau_d", c.tau_d},
      {"epsilon", c.epsilon},
      {"r_min", c.r_min},
      {"gamma_sen", c.gamma_sen},
      {"rcs_variance", c.rcs_variance},
      {"pa_inefficiency", c.pa_inefficiency},
      {"p_fixed_fh", c.p_fixed_fh},
      {"p_hw", c.p_hw},
      {"p_tra_w_per_gbps", c.p_tra_w_per_gbps},
      {"num_channel_draws", c.num_channel_draws},
      {"max_ccp_iterations", c.max_ccp_iterations},
      {"ccp_tolerance", c.ccp_tolerance},
      {"binary_penalty_weight", c.binary_penalty_weight},
      {"master_seed", c.master_seed},
      {"precoder", to_string(c.precoder)},
      {"symbol_mode", to_string(c.symbol_mode)},
      {"clutter_angular_spread_deg", c.clutter_angular_spread_deg},
      {"clutter_attenuation_db", c.clutter_attenuation_db},
      {"shadowing", c.shadowing},
      {"shadowing_std_db", c.shadowing_std_db},
      {"redraw_ap_layout", c.redraw_ap_layout},
  };
  if (c.p0_override) j["p0"] = *c.p0_override;
  return j;
}

}  // namespace cfisac
