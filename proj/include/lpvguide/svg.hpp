#pragma once

// Minimal SVG line charts for telemetry: stacked panels, linear axes,
// one polyline per series.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "simulation.hpp"

namespace lpvguide::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  bool dashed = false;
};

struct Panel {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  bool equal_aspect = false;
};

namespace detail {

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (!(lo <= hi)) {
      lo = 0.0;
      hi = 1.0;
    }
    if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
      const double d = std::max(1e-6, 0.05 * std::abs(hi));
      lo -= d;
      hi += d;
    }
    const double margin = 0.05 * (hi - lo);
    lo -= margin;
    hi += margin;
  }
};

inline std::vector<double> ticks(double lo, double hi, int target = 6) {
  const double raw = (hi - lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (step >= raw) break;
  }
  std::vector<double> out;
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) {
    out.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
  }
  return out;
}

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace detail

/// Renders panels stacked vertically into one SVG document.
inline std::string render(const std::vector<Panel>& panels, double width = 820.0, double panel_height = 300.0) {
  using detail::fmt;
  const double left = 70.0, right = 160.0, top = 34.0, bottom = 46.0;
  const double height = panel_height * static_cast<double>(panels.size());
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width) << "\" height=\"" << fmt(height)
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t p = 0; p < panels.size(); ++p) {
    const Panel& panel = panels[p];
    const double y0 = panel_height * static_cast<double>(p);
    const double pw = width - left - right;
    const double ph = panel_height - top - bottom;
    detail::Range rx, ry;
    for (const auto& s : panel.series) {
      for (double v : s.x) rx.add(v);
      for (double v : s.y) ry.add(v);
    }
    rx.pad();
    ry.pad();
    if (panel.equal_aspect) {
      const double scale = std::max((rx.hi - rx.lo) / pw, (ry.hi - ry.lo) / ph);
      const double cx = 0.5 * (rx.lo + rx.hi), cy = 0.5 * (ry.lo + ry.hi);
      rx = {cx - 0.5 * scale * pw, cx + 0.5 * scale * pw};
      ry = {cy - 0.5 * scale * ph, cy + 0.5 * scale * ph};
    }
    const auto X = [&](double v) { return left + (v - rx.lo) / (rx.hi - rx.lo) * pw; };
    const auto Y = [&](double v) { return y0 + top + (ry.hi - v) / (ry.hi - ry.lo) * ph; };

    os << "<g>\n";
    os << "<text x=\"" << fmt(left + 0.5 * pw) << "\" y=\"" << fmt(y0 + 20) << "\" text-anchor=\"middle\" font-size=\"14\">"
       << detail::escape(panel.title) << "</text>\n";
    for (double t : detail::ticks(rx.lo, rx.hi)) {
      os << "<line x1=\"" << fmt(X(t)) << "\" y1=\"" << fmt(y0 + top) << "\" x2=\"" << fmt(X(t)) << "\" y2=\""
         << fmt(y0 + top + ph) << "\" stroke=\"#e0e0e0\"/>\n";
      os << "<text x=\"" << fmt(X(t)) << "\" y=\"" << fmt(y0 + top + ph + 16) << "\" text-anchor=\"middle\">" << fmt(t)
         << "</text>\n";
    }
    for (double t : detail::ticks(ry.lo, ry.hi)) {
      os << "<line x1=\"" << fmt(left) << "\" y1=\"" << fmt(Y(t)) << "\" x2=\"" << fmt(left + pw) << "\" y2=\""
         << fmt(Y(t)) << "\" stroke=\"#e0e0e0\"/>\n";
      os << "<text x=\"" << fmt(left - 6) << "\" y=\"" << fmt(Y(t) + 4) << "\" text-anchor=\"end\">" << fmt(t)
         << "</text>\n";
    }
    os << "<rect x=\"" << fmt(left) << "\" y=\"" << fmt(y0 + top) << "\" width=\"" << fmt(pw) << "\" height=\""
       << fmt(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<text x=\"" << fmt(left + 0.5 * pw) << "\" y=\"" << fmt(y0 + panel_height - 8)
       << "\" text-anchor=\"middle\">" << detail::escape(panel.x_label) << "</text>\n";
    os << "<text transform=\"translate(16," << fmt(y0 + top + 0.5 * ph) << ") rotate(-90)\" text-anchor=\"middle\">"
       << detail::escape(panel.y_label) << "</text>\n";

    for (std::size_t i = 0; i < panel.series.size(); ++i) {
      const Series& s = panel.series[i];
      os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\"";
      if (s.dashed) os << " stroke-dasharray=\"6 4\"";
      os << " points=\"";
      const std::size_t n = std::min(s.x.size(), s.y.size());
      // Thin very long series; keeps files small without visible loss.
      const std::size_t stride = std::max<std::size_t>(1, n / 4000);
      for (std::size_t k = 0; k < n; k += stride) {
        if (std::isfinite(s.x[k]) && std::isfinite(s.y[k])) os << fmt(X(s.x[k])) << ',' << fmt(Y(s.y[k])) << ' ';
      }
      if (n > 0 && (n - 1) % stride != 0) os << fmt(X(s.x[n - 1])) << ',' << fmt(Y(s.y[n - 1]));
      os << "\"/>\n";
      const double ly = y0 + top + 14.0 + 18.0 * static_cast<double>(i);
      os << "<line x1=\"" << fmt(left + pw + 12) << "\" y1=\"" << fmt(ly - 4) << "\" x2=\"" << fmt(left + pw + 36)
         << "\" y2=\"" << fmt(ly - 4) << "\" stroke=\"" << s.color << "\" stroke-width=\"2\""
         << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << "/>\n";
      os << "<text x=\"" << fmt(left + pw + 42) << "\" y=\"" << fmt(ly) << "\">" << detail::escape(s.label)
         << "</text>\n";
    }
    os << "</g>\n";
  }
  os << "</svg>\n";
  return os.str();
}

/// The four standard telemetry figures, as (file name, document) pairs.
inline std::vector<std::pair<std::string, std::string>> telemetry_plots(const Telemetry& tel) {
  if (tel.empty()) throw std::invalid_argument("telemetry has no rows to plot");
  const auto column = [&](double TelemetryRow::*field) {
    std::vector<double> out;
    out.reserve(tel.size());
    for (const auto& r : tel) out.push_back(r.*field);
    return out;
  };
  const auto t = column(&TelemetryRow::t);
  const std::string ref = "#d62728";
  const std::string act = "#1f77b4";

  Panel path{"Path", "x [m]", "y [m]",
             {{"reference", column(&TelemetryRow::x_d), column(&TelemetryRow::y_d), ref, true},
              {"vehicle", column(&TelemetryRow::x), column(&TelemetryRow::y), act, false}},
             true};
  Panel speed{"Linear speed", "t [s]", "v [m/s]",
              {{"v_d", t, column(&TelemetryRow::v_d), ref, true}, {"v", t, column(&TelemetryRow::v), act, false}}};
  Panel yaw{"Yaw rate", "t [s]", "omega [rad/s]",
            {{"omega_d", t, column(&TelemetryRow::omega_d), ref, true},
             {"omega", t, column(&TelemetryRow::omega), act, false}}};
  Panel ex{"Longitudinal error", "t [s]", "x_e [m]", {{"x_e", t, column(&TelemetryRow::x_e), act, false}}};
  Panel ey{"Lateral error", "t [s]", "y_e [m]", {{"y_e", t, column(&TelemetryRow::y_e), act, false}}};
  Panel force{"Rear force", "t [s]", "F_xR [N]", {{"F_xR", t, column(&TelemetryRow::force), act, false}}};
  Panel steer{"Steering", "t [s]", "delta [rad]", {{"delta", t, column(&TelemetryRow::steering), act, false}}};

  return {
      {"path.svg", render({path}, 820.0, 620.0)},
      {"velocity.svg", render({speed, yaw})},
      {"errors.svg", render({ex, ey})},
      {"actuators.svg", render({force, steer})},
  };
}

/// Renders everything first so a failure leaves no partial output behind.
inline std::vector<std::filesystem::path> write_telemetry_plots(const Telemetry& tel,
                                                                const std::filesystem::path& dir) {
  const auto plots = telemetry_plots(tel);
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  for (const auto& [name, doc] : plots) {
    const auto path = dir / name;
    std::ofstream out(path);
    out << doc;
    if (!out) {
      for (const auto& p : written) std::filesystem::remove(p);
      throw std::runtime_error("cannot write " + path.string());
    }
    written.push_back(path);
  }
  return written;
}

}  // namespace lpvguide::svg
