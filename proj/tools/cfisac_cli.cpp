// Command-line front end for the Monte-Carlo experiments.
//
//   cfisac run --preset figure-defaults --setups 20 --methods jpalb,nlb --out out/
//   cfisac oracle --config small.json --setups 25 --out out_oracle/
//
// Exit status: 0 on success, 2 when some requested method found no feasible
// setup in the batch, 1 on any error.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cfisac/harness.hpp"

namespace {

struct Common {
  std::string config_path;
  std::string preset = "text-defaults";
  std::string out_dir = "out";
  std::string methods;
  std::vector<double> sweep;
  int setups = -1;
  int workers = 1;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> precoder;
  std::optional<int> aps, ues, antennas, draws;
  std::optional<double> r_min, gamma_db;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config_path, "JSON config overlaid on the preset");
  app->add_option("--preset", c.preset, "text-defaults or figure-defaults")
      ->check(CLI::IsMember({"text-defaults", "figure-defaults"}));
  app->add_option("--out", c.out_dir, "output directory");
  app->add_option("--setups", c.setups, "number of random setups")->check(CLI::NonNegativeNumber);
  app->add_option("--methods", c.methods, "comma-separated subset of jpalb,nlb,oracle");
  app->add_option("--sweep-gamma-db", c.sweep, "sensing thresholds in dB")->delimiter(',');
  app->add_option("--seed", c.seed, "master seed");
  app->add_option("--workers", c.workers, "parallel setups")->check(CLI::PositiveNumber);
  app->add_option("--precoder", c.precoder, "MRT or RZF");
  app->add_option("--aps", c.aps, "communication APs K");
  app->add_option("--ues", c.ues, "UEs U");
  app->add_option("--antennas", c.antennas, "antennas per AP M");
  app->add_option("--channel-draws", c.draws, "channel draws for the statistics");
  app->add_option("--r-min", c.r_min, "minimum URLLC rate, b/s/Hz");
  app->add_option("--gamma-db", c.gamma_db, "sensing SINR threshold, dB");
}

cfisac::NetworkConfig build_config(const Common& c) {
  cfisac::NetworkConfig cfg = cfisac::preset(c.preset);
  if (!c.config_path.empty()) cfg = cfisac::load_config(c.config_path, cfg);
  if (c.seed) cfg.master_seed = *c.seed;
  if (c.precoder) cfg.precoder = cfisac::precoder_from_string(*c.precoder);
  if (c.aps) cfg.num_aps = *c.aps;
  if (c.ues) cfg.num_ues = *c.ues;
  if (c.antennas) cfg.antennas = *c.antennas;
  if (c.draws) cfg.num_channel_draws = *c.draws;
  if (c.r_min) cfg.r_min = *c.r_min;
  if (c.gamma_db) cfg.gamma_sen = cfisac::db_to_linear(*c.gamma_db);
  cfg.validate();
  return cfg;
}

std::vector<cfisac::Method> parse_methods(const std::string& list) {
  std::vector<cfisac::Method> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(cfisac::method_from_string(item));
  }
  return out;
}

int execute(const Common& c, std::vector<cfisac::Method> default_methods, int default_setups) {
  const cfisac::NetworkConfig cfg = build_config(c);
  cfisac::ExperimentOptions opts;
  opts.num_setups = c.setups >= 0 ? c.setups : default_setups;
  opts.methods = c.methods.empty() ? std::move(default_methods) : parse_methods(c.methods);
  opts.sweep_gamma_db = c.sweep;
  opts.workers = c.workers;
  const auto res = cfisac::run_experiment(cfg, opts);
  cfisac::emit_outputs(res.records, res.summary, c.out_dir);

  bool starved = false;
  for (const auto& m : res.summary.methods) {
    std::printf("%-6s n=%d infeasible=%d mean=%.4f W median=%.4f W off=%.1f%%\n",
                cfisac::to_string(m.method).c_str(), m.count, m.infeasible, m.mean_total_w,
                m.median_total_w, 100.0 * m.shutdown_fraction);
    if (opts.num_setups > 0 && m.count == 0) starved = true;
  }
  for (const auto& p : res.summary.sweep) {
    std::printf("sweep %5.1f dB %-6s mean=%.4f W\n", p.gamma_db, cfisac::to_string(p.method).c_str(),
                p.mean_total_w);
  }
  std::printf("wrote %s\n", c.out_dir.c_str());
  return starved ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cell-free ISAC power allocation and AP load balancing experiments"};
  app.require_subcommand(1);
  Common run_opts, oracle_opts;
  auto* run = app.add_subcommand("run", "JPALB/NLB Monte-Carlo experiment");
  add_common(run, run_opts);
  auto* oracle = app.add_subcommand("oracle", "compare JPALB with exhaustive pattern enumeration");
  add_common(oracle, oracle_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run) return execute(run_opts, {cfisac::Method::kJpalb, cfisac::Method::kNlb}, 100);
    return execute(oracle_opts, {cfisac::Method::kJpalb, cfisac::Method::kOracle}, 25);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
