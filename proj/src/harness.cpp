#include "cfisac/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <thread>

#include <nlohmann/json.hpp>

#include "cfisac/propagation.hpp"
#include "cfisac/rng.hpp"

namespace cfisac {

using nlohmann::json;

std::string to_string(Method m) {
  switch (m) {
    case Method::kJpalb: return "JPALB";
    case Method::kNlb: return "NLB";
    case Method::kOracle: return "ORACLE";
  }
  return "unknown";
}

Method method_from_string(const std::string& s) {
  std::string u = s;
  std::transform(u.begin(), u.end(), u.begin(), [](unsigned char c) { return std::toupper(c); });
  if (u == "JPALB") return Method::kJpalb;
  if (u == "NLB") return Method::kNlb;
  if (u == "ORACLE") return Method::kOracle;
  throw Error("unknown method '" + s + "'");
}

SetupInputs prepare_setup(const NetworkConfig& cfg, int setup_index) {
  const auto idx = static_cast<std::uint64_t>(setup_index);
  SetupInputs in;
  in.setup_index = setup_index;
  in.user_seed = derive_seed(cfg.master_seed, idx, Stream::kUsers);
  const std::uint64_t layout = derive_seed(cfg.master_seed, cfg.redraw_ap_layout ? idx : 0, Stream::kLayout);
  in.scenario = generate_scenario(cfg, layout, in.user_seed);
  in.stats = comm_statistics(in.scenario, cfg, derive_seed(cfg.master_seed, idx, Stream::kStatistics));
  const auto channels = draw_channels(in.scenario, cfg, derive_seed(cfg.master_seed, idx, Stream::kOperatingChannel));
  in.precoders = precode(channels, cfg);
  const SymbolBlock symbols =
      cfg.symbol_mode == SymbolMode::kRealization
          ? draw_symbols(cfg.num_ues, cfg.tau_d, derive_seed(cfg.master_seed, idx, Stream::kSymbols))
          : SymbolBlock{};
  in.forms = sensing_matrices(in.scenario, in.precoders, symbols, cfg);
  return in;
}

Verification prepare_verification(const NetworkConfig& cfg, const SetupInputs& setup) {
  const auto idx = static_cast<std::uint64_t>(setup.setup_index);
  const std::uint64_t seed = derive_seed(cfg.master_seed, idx, Stream::kVerification);
  Verification v;
  v.stats = comm_statistics(setup.scenario, cfg, derive_seed(seed, 0));
  NetworkConfig rcfg = cfg;
  rcfg.symbol_mode = SymbolMode::kRealization;
  v.forms = sensing_matrices(setup.scenario, setup.precoders,
                             draw_symbols(cfg.num_ues, cfg.tau_d, derive_seed(seed, 1)), rcfg);
  return v;
}

json to_json(const SetupRecord& r) {
  return json{{"setup_index", r.setup_index},
              {"seed", r.seed},
              {"method", to_string(r.method)},
              {"precoder", to_string(r.precoder)},
              {"gamma_sen_db", r.gamma_sen_db},
              {"status", r.status},
              {"total_w", r.total_w},
              {"transmit_w", r.transmit_w},
              {"static_w", r.static_w},
              {"fronthaul_w", r.fronthaul_w},
              {"active_ap_count", r.active_ap_count},
              {"iterations", r.iterations},
              {"wall_time_seconds", r.wall_time_seconds},
              {"min_rate", r.min_rate},
              {"sensing_sinr", r.sensing_sinr}};
}

SetupRecord record_from_json(const json& j) {
  SetupRecord r;
  r.setup_index = j.at("setup_index").get<int>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.method = method_from_string(j.at("method").get<std::string>());
  r.precoder = precoder_from_string(j.at("precoder").get<std::string>());
  r.gamma_sen_db = j.at("gamma_sen_db").get<double>();
  r.status = j.at("status").get<std::string>();
  r.total_w = j.at("total_w").get<double>();
  r.transmit_w = j.at("transmit_w").get<double>();
  r.static_w = j.at("static_w").get<double>();
  r.fronthaul_w = j.at("fronthaul_w").get<double>();
  r.active_ap_count = j.at("active_ap_count").get<int>();
  r.iterations = j.at("iterations").get<int>();
  r.wall_time_seconds = j.at("wall_time_seconds").get<double>();
  r.min_rate = j.at("min_rate").get<double>();
  r.sensing_sinr = j.at("sensing_sinr").get<double>();
  return r;
}

std::vector<CdfPoint> empirical_cdf(std::vector<double> values) {
  if (values.empty()) throw Error("empirical_cdf: empty input");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  std::vector<CdfPoint> out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double p = static_cast<double>(i + 1) / n;
    // Ties collapse into one jump.
    if (!out.empty() && out.back().value == values[i]) {
      out.back().probability = p;
    } else {
      out.push_back({values[i], p});
    }
  }
  return out;
}

const MethodSummary* ExperimentSummary::find(Method m) const {
  for (const auto& s : methods) {
    if (s.method == m) return &s;
  }
  return nullptr;
}

namespace {

bool same_gamma(double a, double b) { return std::abs(a - b) <= 1e-9; }

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

SetupRecord make_record(const SetupInputs& in, Method m, const NetworkConfig& cfg,
                        const SolveReport& rep, double seconds) {
  SetupRecord r;
  r.setup_index = in.setup_index;
  r.seed = in.user_seed;
  r.method = m;
  r.precoder = cfg.precoder;
  r.gamma_sen_db = linear_to_db(cfg.gamma_sen);
  r.status = to_string(rep.status);
  r.wall_time_seconds = seconds;
  r.iterations = rep.iterations;
  if (rep.status == RunStatus::kInfeasible) return r;
  r.total_w = rep.power.total;
  r.transmit_w = rep.power.transmit;
  r.static_w = rep.power.static_power;
  r.fronthaul_w = rep.power.fronthaul_traffic;
  r.active_ap_count = static_cast<int>(rep.active_aps.size());
  r.min_rate = rep.achieved_rates.empty()
                   ? 0.0
                   : *std::min_element(rep.achieved_rates.begin(), rep.achieved_rates.end());
  r.sensing_sinr = rep.achieved_sensing_sinr;
  return r;
}

SolveReport run_method(Method m, const SetupInputs& in, const NetworkConfig& cfg, const JpalbOptions& opts) {
  switch (m) {
    case Method::kJpalb: return run_jpalb(in.stats, in.forms, cfg, opts);
    case Method::kNlb: return run_nlb(in.stats, in.forms, cfg, opts);
    case Method::kOracle: return enumerate_oracle(in.stats, in.forms, cfg, opts);
  }
  throw Error("unknown method");
}

std::vector<SetupRecord> run_setup(const NetworkConfig& cfg, const ExperimentOptions& opts, int index) {
  std::vector<NetworkConfig> variants{cfg};
  for (double g : opts.sweep_gamma_db) {
    if (same_gamma(g, linear_to_db(cfg.gamma_sen))) continue;
    NetworkConfig v = cfg;
    v.gamma_sen = db_to_linear(g);
    variants.push_back(v);
  }
  std::vector<SetupRecord> out;
  SetupInputs in;
  try {
    in = prepare_setup(cfg, index);
  } catch (const std::exception&) {
    for (const auto& v : variants) {
      for (Method m : opts.methods) {
        SetupRecord r;
        r.setup_index = index;
        r.seed = derive_seed(cfg.master_seed, static_cast<std::uint64_t>(index), Stream::kUsers);
        r.method = m;
        r.precoder = cfg.precoder;
        r.gamma_sen_db = linear_to_db(v.gamma_sen);
        r.status = "error";
        out.push_back(r);
      }
    }
    return out;
  }
  for (const auto& v : variants) {
    for (Method m : opts.methods) {
      const auto t0 = std::chrono::steady_clock::now();
      SolveReport rep;
      std::string failure;
      try {
        rep = run_method(m, in, v, opts.solver);
      } catch (const std::exception& e) {
        failure = e.what();
      }
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      SetupRecord r = make_record(in, m, v, rep, secs);
      if (!failure.empty()) r.status = "error";
      out.push_back(r);
    }
  }
  return out;
}

}  // namespace

ExperimentResult run_experiment(const NetworkConfig& cfg, const ExperimentOptions& opts) {
  cfg.validate();
  if (opts.num_setups < 0) throw Error("num_setups must be >= 0");
  if (opts.methods.empty()) throw Error("no methods requested");
  std::vector<std::vector<SetupRecord>> per_setup(static_cast<std::size_t>(opts.num_setups));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < opts.num_setups; i = next++) {
      per_setup[static_cast<std::size_t>(i)] = run_setup(cfg, opts, i);
    }
  };
  const int workers = std::clamp(opts.workers, 1, std::max(1, opts.num_setups));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  ExperimentResult res;
  // Base threshold first, then each sweep threshold, setups in index order.
  std::vector<double> gammas{linear_to_db(cfg.gamma_sen)};
  for (double g : opts.sweep_gamma_db) {
    if (std::none_of(gammas.begin(), gammas.end(), [&](double x) { return same_gamma(x, g); })) {
      gammas.push_back(g);
    }
  }
  for (double g : gammas) {
    for (const auto& rs : per_setup) {
      for (const auto& r : rs) {
        if (same_gamma(r.gamma_sen_db, g)) res.records.push_back(r);
      }
    }
  }
  res.summary = summarize(res.records, opts.num_setups, cfg.num_aps, linear_to_db(cfg.gamma_sen),
                          opts.sweep_gamma_db);
  return res;
}

ExperimentSummary summarize(const std::vector<SetupRecord>& records, int num_setups, int num_aps,
                            double base_gamma_db, const std::vector<double>& sweep_gamma_db) {
  ExperimentSummary s;
  s.num_setups = num_setups;
  s.num_aps = num_aps;
  s.gamma_sen_db = base_gamma_db;
  std::vector<Method> order;
  for (const auto& r : records) {
    if (std::find(order.begin(), order.end(), r.method) == order.end()) order.push_back(r.method);
  }
  for (Method m : order) {
    MethodSummary ms;
    ms.method = m;
    std::vector<double> total, tx, st, fh, off;
    for (const auto& r : records) {
      if (r.method != m || !same_gamma(r.gamma_sen_db, base_gamma_db)) continue;
      if (!r.feasible()) {
        ++ms.infeasible;
        continue;
      }
      total.push_back(r.total_w);
      tx.push_back(r.transmit_w);
      st.push_back(r.static_w);
      fh.push_back(r.fronthaul_w);
      if (num_aps > 0) off.push_back(static_cast<double>(num_aps - r.active_ap_count) / num_aps);
    }
    ms.count = static_cast<int>(total.size());
    ms.mean_total_w = mean(total);
    ms.median_total_w = median(total);
    ms.mean_transmit_w = mean(tx);
    ms.mean_static_w = mean(st);
    ms.mean_fronthaul_w = mean(fh);
    ms.shutdown_fraction = mean(off);
    if (!total.empty()) ms.cdf = empirical_cdf(total);
    s.infeasible_count = std::max(s.infeasible_count, ms.infeasible);
    s.methods.push_back(std::move(ms));
  }
  for (double g : sweep_gamma_db) {
    for (Method m : order) {
      SweepPoint p;
      p.gamma_db = g;
      p.method = m;
      std::vector<double> total;
      for (const auto& r : records) {
        if (r.method == m && same_gamma(r.gamma_sen_db, g) && r.feasible()) total.push_back(r.total_w);
      }
      p.count = static_cast<int>(total.size());
      p.mean_total_w = mean(total);
      s.sweep.push_back(p);
    }
  }
  return s;
}

json to_json(const ExperimentSummary& s) {
  json methods = json::array();
  for (const auto& m : s.methods) {
    json cdf = json::array();
    for (const auto& p : m.cdf) cdf.push_back({p.value, p.probability});
    methods.push_back({{"method", to_string(m.method)},
                       {"count", m.count},
                       {"infeasible", m.infeasible},
                       {"mean_total_w", m.mean_total_w},
                       {"median_total_w", m.median_total_w},
                       {"mean_transmit_w", m.mean_transmit_w},
                       {"mean_static_w", m.mean_static_w},
                       {"mean_fronthaul_w", m.mean_fronthaul_w},
                       {"shutdown_fraction", m.shutdown_fraction},
                       {"cdf", cdf}});
  }
  json sweep = json::array();
  for (const auto& p : s.sweep) {
    sweep.push_back({{"gamma_db", p.gamma_db},
                     {"method", to_string(p.method)},
                     {"count", p.count},
                     {"mean_total_w", p.mean_total_w}});
  }
  return json{{"num_setups", s.num_setups},
              {"num_aps", s.num_aps},
              {"gamma_sen_db", s.gamma_sen_db},
              {"infeasible_count", s.infeasible_count},
              {"empty", s.methods.empty()},
              {"methods", methods},
              {"sweep", sweep}};
}

}  // namespace cfisac
