#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cfisac/harness.hpp"

namespace cfisac {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p);
  if (!f) throw Error("cannot write " + p.string());
  f << std::setprecision(10);
  return f;
}

void close_out(std::ofstream& f, const fs::path& p) {
  f.close();
  if (!f) throw Error("write failed for " + p.string());
}

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(4) << v;
  return s.str();
}

// Minimal self-contained line chart; `step` draws a right-continuous staircase.
std::string svg_chart(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                      const std::vector<Series>& series, bool step) {
  const double W = 640, H = 420, L = 70, R = 20, T = 40, B = 60;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  bool any = false;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      if (!any) {
        x0 = x1 = x;
        y0 = y1 = y;
        any = true;
      }
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (x1 - x0 < 1e-12) { x0 -= 0.5; x1 += 0.5; }
  if (y1 - y0 < 1e-12) { y0 -= 0.5; y1 += 0.5; }
  const double padx = 0.05 * (x1 - x0), pady = 0.05 * (y1 - y0);
  x0 -= padx; x1 += padx; y0 -= pady; y1 += pady;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

  std::ostringstream o;
  o << std::fixed << std::setprecision(2);
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
    << "\" stroke=\"black\"/>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double xv = x0 + padx + t * (x1 - x0 - 2 * padx) / 4;
    const double yv = y0 + pady + t * (y1 - y0 - 2 * pady) / 4;
    o << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << fmt(xv) << "</text>\n";
    o << "<text x=\"" << L - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">" << fmt(yv) << "</text>\n";
  }
  o << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 18 << "\" text-anchor=\"middle\">" << xlabel << "</text>\n";
  o << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << (T + H - B) / 2 << ")\">" << ylabel << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kColors[k % 5];
    std::ostringstream pts;
    pts << std::fixed << std::setprecision(2);
    for (std::size_t i = 0; i < s.points.size(); ++i) {
      const auto [x, y] = s.points[i];
      if (step && i > 0) pts << px(x) << ',' << py(s.points[i - 1].second) << ' ';
      pts << px(x) << ',' << py(y) << ' ';
    }
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"" << pts.str() << "\"/>\n";
    for (const auto& [x, y] : s.points) {
      o << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
    }
    o << "<text x=\"" << W - R - 90 << "\" y=\"" << T + 16 * (k + 1) << "\" fill=\"" << color << "\">"
      << s.label << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

void write_text(const fs::path& p, const std::string& text) {
  auto f = open_out(p);
  f << text;
  close_out(f, p);
}

}  // namespace

void emit_outputs(const std::vector<SetupRecord>& records, const ExperimentSummary& summary,
                  const std::string& out_dir) {
  const fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());

  {
    const auto p = dir / "records.jsonl";
    auto f = open_out(p);
    for (const auto& r : records) f << to_json(r).dump() << '\n';
    close_out(f, p);
  }
  {
    const auto p = dir / "summary.json";
    auto f = open_out(p);
    f << to_json(summary).dump(2) << '\n';
    close_out(f, p);
  }
  {
    const auto p = dir / "cdf.csv";
    auto f = open_out(p);
    f << "method,power_w,cdf\n";
    for (const auto& m : summary.methods) {
      for (const auto& c : m.cdf) f << to_string(m.method) << ',' << c.value << ',' << c.probability << '\n';
    }
    close_out(f, p);
  }
  {
    const auto p = dir / "breakdown.csv";
    auto f = open_out(p);
    f << "method,transmit_w,static_w,fronthaul_w\n";
    for (const auto& m : summary.methods) {
      f << to_string(m.method) << ',' << m.mean_transmit_w << ',' << m.mean_static_w << ','
        << m.mean_fronthaul_w << '\n';
    }
    close_out(f, p);
  }
  {
    const auto p = dir / "sweep.csv";
    auto f = open_out(p);
    f << "gamma_db,method,mean_power_w\n";
    for (const auto& s : summary.sweep) {
      f << s.gamma_db << ',' << to_string(s.method) << ',' << s.mean_total_w << '\n';
    }
    close_out(f, p);
  }

  std::vector<Series> cdf, breakdown, sweep;
  for (const auto& m : summary.methods) {
    Series s{to_string(m.method), {}};
    for (const auto& c : m.cdf) s.points.emplace_back(c.value, c.probability);
    cdf.push_back(std::move(s));
    breakdown.push_back({to_string(m.method),
                         {{0.0, m.mean_transmit_w}, {1.0, m.mean_static_w}, {2.0, m.mean_fronthaul_w}}});
    Series w{to_string(m.method), {}};
    for (const auto& p : summary.sweep) {
      if (p.method == m.method) w.points.emplace_back(p.gamma_db, p.mean_total_w);
    }
    if (!w.points.empty()) sweep.push_back(std::move(w));
  }
  write_text(dir / "fig_cdf.svg", svg_chart("CDF of total power", "total power (W)", "CDF", cdf, true));
  write_text(dir / "fig_breakdown.svg",
             svg_chart("Mean power by component (0 transmit, 1 static, 2 fronthaul)", "component",
                       "power (W)", breakdown, false));
  write_text(dir / "fig_sweep.svg",
             svg_chart("Mean total power vs sensing threshold", "sensing SINR threshold (dB)",
                       "total power (W)", sweep, false));
}

}  // namespace cfisac
