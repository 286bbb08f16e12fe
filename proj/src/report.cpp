#include "mvfbm/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "mvfbm/errors.hpp"

namespace mvfbm::report {

namespace {

std::string fmt(double v) { return format_double(v); }
std::string fmt(std::size_t v) { return std::to_string(v); }

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string to_csv(const CsvTable& table) {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(table.header);
  for (const auto& row : table.rows) line(row);
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  out.close();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void write_csv(const CsvTable& table, const std::filesystem::path& path) { write_text(path, to_csv(table)); }

CsvTable parse_csv(const std::string& text) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (first) {
      table.header = std::move(cells);
      first = false;
    } else {
      table.rows.push_back(std::move(cells));
    }
  }
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str());
}

CsvTable fbm_table(const std::vector<NoiseBlock>& blocks) {
  CsvTable t{{"stream_id", "k", "t_k", "increment", "cumulative"}, {}};
  for (const NoiseBlock& b : blocks) {
    const std::vector<double> path = path_from_increments(b);
    for (std::size_t k = 0; k < path.size(); ++k) {
      const double inc = k == 0 ? 0.0 : b.increments[k - 1];
      t.rows.push_back({std::to_string(b.stream_id), fmt(k), fmt(static_cast<double>(k) * b.step), fmt(inc),
                        fmt(path[k])});
    }
  }
  return t;
}

CsvTable trajectory_table(const EnsembleTrajectory& traj) {
  CsvTable t{{"particle", "k", "t_k"}, {}};
  if (traj.dim == 1) {
    t.header.push_back("state");
  } else {
    for (std::size_t c = 0; c < traj.dim; ++c) t.header.push_back("state_" + std::to_string(c));
  }
  const auto m = static_cast<std::ptrdiff_t>(traj.grid.delay_steps());
  const auto mt = static_cast<std::ptrdiff_t>(traj.grid.horizon_steps());
  for (std::size_t i = 0; i < traj.particles; ++i) {
    for (std::ptrdiff_t k = -m; k <= mt; ++k) {
      std::vector<std::string> row{fmt(i), std::to_string(k), fmt(traj.grid.time(k))};
      for (double v : traj.state(i, k)) row.push_back(fmt(v));
      t.rows.push_back(std::move(row));
    }
  }
  return t;
}

CsvTable error_table(const std::vector<ErrorTable>& tables) {
  CsvTable t{{"hurst", "step", "log2_step", "err", "repeats", "std_error", "degenerate"}, {}};
  for (const ErrorTable& table : tables) {
    std::vector<ErrorRow> rows = table.rows;
    std::stable_sort(rows.begin(), rows.end(), [](const ErrorRow& a, const ErrorRow& b) { return a.step > b.step; });
    for (const ErrorRow& r : rows)
      t.rows.push_back({fmt(table.hurst), fmt(r.step), fmt(std::log2(r.step)), fmt(r.err), fmt(r.repeats),
                        fmt(r.std_error), r.degenerate ? "1" : "0"});
  }
  return t;
}

CsvTable chaos_table(const ChaosTable& table) {
  CsvTable t{{"N", "gap", "std_error", "repeats"}, {}};
  for (const ChaosRow& r : table.rows) t.rows.push_back({fmt(r.particles), fmt(r.gap), fmt(r.std_error), fmt(r.repeats)});
  return t;
}

CsvTable maximal_table(const std::vector<MaximalProbe>& probes) {
  CsvTable t{{"hurst", "p", "t", "estimate", "std_error"}, {}};
  for (const MaximalProbe& probe : probes)
    for (const MaximalRow& r : probe.rows)
      t.rows.push_back({fmt(probe.hurst), fmt(probe.p), fmt(r.horizon), fmt(r.estimate), fmt(r.std_error)});
  return t;
}

CsvTable moment_table(const MomentProbe& probe) {
  CsvTable t{{"step", "log2_step", "estimate", "std_error", "blowup"}, {}};
  for (const MomentRow& r : probe.rows)
    t.rows.push_back({fmt(r.step), fmt(std::log2(r.step)), fmt(r.estimate), fmt(r.std_error), r.blowup ? "1" : "0"});
  return t;
}

std::string convergence_summary(const std::vector<ErrorTable>& tables) {
  std::ostringstream out;
  out << "strong error against the reference grid (log2 err vs log2 step)\n";
  for (const ErrorTable& t : tables) {
    out << "H = " << fixed(t.hurst, 3) << ": ";
    if (t.fit_valid) {
      out << "slope " << fixed(t.fit.slope, 4);
      if (std::isfinite(t.fit.ci_low))
        out << " (95% CI " << fixed(t.fit.ci_low, 4) << " .. " << fixed(t.fit.ci_high, 4) << ")";
      out << ", theoretical exponent min(theta, H) = " << fixed(t.theoretical_exponent, 3);
      out << (t.strictly_decreasing ? ", errors decrease with refinement" : ", errors NOT monotone");
    } else {
      out << "slope undefined";
    }
    out << "\n";
    for (const ErrorRow& r : t.rows)
      out << "    step 2^" << fixed(std::log2(r.step), 0) << "  err " << format_double(r.err) << "  +- "
          << format_double(r.std_error) << (r.degenerate ? "  [excluded]" : "") << "\n";
    for (const std::string& w : t.warnings) out << "    warning: " << w << "\n";
  }
  return out.str();
}

std::string chaos_summary(const ChaosTable& table, const ChaosStudy& study) {
  std::ostringstream out;
  out << "propagation of chaos: gap to an N_ref = " << study.reference_particles << " shared-noise system\n";
  for (const ChaosRow& r : table.rows)
    out << "    N " << r.particles << "  gap " << format_double(r.gap) << "  +- " << format_double(r.std_error) << "\n";
  if (table.fit_valid) {
    out << "fitted slope of log2 gap vs log2 N: " << fixed(table.fit.slope, 4);
    if (std::isfinite(table.fit.ci_low))
      out << " (95% CI " << fixed(table.fit.ci_low, 4) << " .. " << fixed(table.fit.ci_high, 4) << ")";
    out << "\n";
  }
  out << "trend: " << (table.non_increasing ? "non-increasing" : "NOT non-increasing") << " within "
      << fixed(table.slack, 2) << "x slack\n";
  out << "bound (p > d/2): E|gap|^p <= C N^(-lambda/2), lambda = ((p - eps)/p)^floor(T/rho); "
         "eps in (0, 1] is left free, eps = 1 gives lambda = "
      << format_double(table.lambda) << " (a bound, not asserted)\n";
  return out.str();
}

std::string maximal_summary(const std::vector<MaximalProbe>& probes) {
  std::ostringstream out;
  out << "maximal functional E[sup |B^H|^p] against the horizon\n";
  for (const MaximalProbe& p : probes)
    out << "H = " << fixed(p.hurst, 3) << ", p = " << fixed(p.p, 2) << ": slope " << fixed(p.fit.slope, 4)
        << " (95% CI " << fixed(p.fit.ci_low, 4) << " .. " << fixed(p.fit.ci_high, 4) << "), expected pH = "
        << fixed(p.expected_slope, 4) << "\n";
  return out.str();
}

std::string moment_summary(const MomentProbe& probe) {
  std::ostringstream out;
  out << "moment bound E[max_k |Z(t_k)|^p] across step sizes\n";
  for (const MomentRow& r : probe.rows)
    out << "    step 2^" << fixed(std::log2(r.step), 0) << "  " << (r.blowup ? "BLOW-UP" : format_double(r.estimate))
        << "\n";
  out << "max/min ratio " << format_double(probe.ratio) << " (bound " << fixed(kMomentRatioBound, 1) << "): "
      << (probe.bounded ? "bounded" : (probe.any_blowup ? "moment blow-up detected" : "NOT bounded")) << "\n";
  return out.str();
}

std::vector<PlotSeries> convergence_plot(const std::vector<ErrorTable>& tables) {
  std::vector<PlotSeries> out;
  for (const ErrorTable& t : tables) {
    PlotSeries s;
    s.label = "H = " + fixed(t.hurst, 2);
    for (const ErrorRow& r : t.rows) {
      if (r.degenerate) continue;
      s.x.push_back(std::log2(r.step));
      s.y.push_back(std::log2(r.err));
    }
    s.has_fit = t.fit_valid;
    s.fit_slope = t.fit.slope;
    s.fit_intercept = t.fit.intercept;
    s.has_reference = true;
    s.reference_slope = t.hurst;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<PlotSeries> chaos_plot(const ChaosTable& table) {
  PlotSeries s;
  s.label = "gap";
  for (const ChaosRow& r : table.rows) {
    if (!(r.gap > 0.0)) continue;
    s.x.push_back(std::log2(static_cast<double>(r.particles)));
    s.y.push_back(std::log2(r.gap));
  }
  s.has_fit = table.fit_valid;
  s.fit_slope = table.fit.slope;
  s.fit_intercept = table.fit.intercept;
  s.has_reference = true;
  s.reference_slope = -0.5;
  return {s};
}

std::vector<PlotSeries> maximal_plot(const std::vector<MaximalProbe>& probes) {
  std::vector<PlotSeries> out;
  for (const MaximalProbe& p : probes) {
    PlotSeries s;
    s.label = "H = " + fixed(p.hurst, 2) + ", p = " + fixed(p.p, 1);
    for (const MaximalRow& r : p.rows) {
      s.x.push_back(std::log2(r.horizon));
      s.y.push_back(std::log2(r.estimate));
    }
    s.has_fit = true;
    s.fit_slope = p.fit.slope;
    s.fit_intercept = p.fit.intercept;
    s.has_reference = true;
    s.reference_slope = p.expected_slope;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<PlotSeries> moment_plot(const MomentProbe& probe) {
  PlotSeries s;
  s.label = "E max |Z|^p";
  for (const MomentRow& r : probe.rows) {
    if (r.blowup || !(r.estimate > 0.0)) continue;
    s.x.push_back(std::log2(r.step));
    s.y.push_back(std::log2(r.estimate));
  }
  return {s};
}

std::string render_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                       const std::vector<PlotSeries>& series) {
  constexpr double kWidth = 640, kHeight = 440, kLeft = 70, kRight = 170, kTop = 40, kBottom = 60;
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const PlotSeries& s : series) {
    for (double v : s.x) x0 = std::min(x0, v), x1 = std::max(x1, v);
    for (double v : s.y) y0 = std::min(y0, v), y1 = std::max(y1, v);
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  x0 = std::floor(x0 - 0.25), x1 = std::ceil(x1 + 0.25);
  y0 = std::floor(y0 - 0.25), y1 = std::ceil(y1 + 0.25);
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return kTop + (y1 - y) / (y1 - y0) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << kLeft + pw / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << xml_escape(title)
    << "</text>\n";
  o << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  const double xstep = std::max(1.0, std::ceil((x1 - x0) / 10.0));
  for (double x = x0; x <= x1 + 1e-9; x += xstep)
    o << "<line x1=\"" << fixed(px(x), 1) << "\" y1=\"" << kTop + ph << "\" x2=\"" << fixed(px(x), 1) << "\" y2=\""
      << kTop + ph + 5 << "\" stroke=\"black\"/><text x=\"" << fixed(px(x), 1) << "\" y=\"" << kTop + ph + 18
      << "\" text-anchor=\"middle\">" << fixed(x, 0) << "</text>\n";
  const double ystep = std::max(1.0, std::ceil((y1 - y0) / 10.0));
  for (double y = y0; y <= y1 + 1e-9; y += ystep)
    o << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << fixed(py(y), 1) << "\" x2=\"" << kLeft << "\" y2=\""
      << fixed(py(y), 1) << "\" stroke=\"black\"/><text x=\"" << kLeft - 8 << "\" y=\"" << fixed(py(y) + 4, 1)
      << "\" text-anchor=\"end\">" << fixed(y, 0) << "</text>\n";
  o << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 18 << "\" text-anchor=\"middle\">"
    << xml_escape(x_label) << "</text>\n";
  o << "<text transform=\"translate(20," << kTop + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
    << xml_escape(y_label) << "</text>\n";

  o << "<clipPath id=\"plot\"><rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\""
    << ph << "\"/></clipPath>\n<g clip-path=\"url(#plot)\">\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const PlotSeries& s = series[i];
    const char* color = kColors[i % 6];
    if (s.has_fit)
      o << "<line x1=\"" << fixed(px(x0), 1) << "\" y1=\"" << fixed(py(s.fit_intercept + s.fit_slope * x0), 1)
        << "\" x2=\"" << fixed(px(x1), 1) << "\" y2=\"" << fixed(py(s.fit_intercept + s.fit_slope * x1), 1)
        << "\" stroke=\"" << color << "\"/>\n";
    if (s.has_reference && !s.x.empty()) {
      const double b = s.y.front() - s.reference_slope * s.x.front();
      o << "<line x1=\"" << fixed(px(x0), 1) << "\" y1=\"" << fixed(py(b + s.reference_slope * x0), 1) << "\" x2=\""
        << fixed(px(x1), 1) << "\" y2=\"" << fixed(py(b + s.reference_slope * x1), 1) << "\" stroke=\"" << color
        << "\" stroke-dasharray=\"5,4\" opacity=\"0.6\"/>\n";
    }
    for (std::size_t k = 0; k < s.x.size(); ++k)
      o << "<circle cx=\"" << fixed(px(s.x[k]), 1) << "\" cy=\"" << fixed(py(s.y[k]), 1) << "\" r=\"3.5\" fill=\""
        << color << "\"/>\n";
  }
  o << "</g>\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double ly = kTop + 14 + 18 * static_cast<double>(i);
    o << "<circle cx=\"" << kLeft + pw + 14 << "\" cy=\"" << ly - 4 << "\" r=\"4\" fill=\"" << kColors[i % 6]
      << "\"/><text x=\"" << kLeft + pw + 24 << "\" y=\"" << ly << "\">" << xml_escape(series[i].label) << "</text>\n";
  }
  o << "<text x=\"" << kLeft + pw + 10 << "\" y=\"" << kTop + ph << "\" font-size=\"10\">dashed: reference slope</text>\n";
  o << "</svg>\n";
  return o.str();
}

void write_svg(const std::string& svg, const std::filesystem::path& path) { write_text(path, svg); }

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return fnv1a_hex(buffer.str());
}

}  // namespace mvfbm::report
