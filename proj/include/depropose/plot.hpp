// Copyright (c) 2026 the depropose authors
// SPDX-License-Identifier: Apache-2.0
//
// Minimal static SVG plots (bar and line charts). Output is plain text
// with fixed-precision coordinates, so identical inputs give identical
// bytes — plots are report artifacts and must diff cleanly.
#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "depropose/common.hpp"

namespace depropose {

struct PlotSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;  // (x, y)
};

namespace detail {

inline std::string svg_escape(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (const char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c; break;
    }
  }
  return out;
}

inline const char* plot_color(std::size_t index) {
  static const char* kPalette[] = {"#2c7fb8", "#d95f0e", "#31a354",
                                   "#756bb1", "#c51b8a", "#636363"};
  return kPalette[index % (sizeof(kPalette) / sizeof(kPalette[0]))];
}

// Shared chart frame: canvas, plot rectangle, title, axis labels.
struct ChartFrame {
  static constexpr double kWidth = 640.0;
  static constexpr double kHeight = 400.0;
  static constexpr double kLeft = 70.0;
  static constexpr double kRight = 610.0;
  static constexpr double kTop = 50.0;
  static constexpr double kBottom = 340.0;

  std::string body;

  void open(const std::string& title, const std::string& x_label,
            const std::string& y_label) {
    body += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
            to_fixed(kWidth, 0) + "\" height=\"" + to_fixed(kHeight, 0) +
            "\" viewBox=\"0 0 " + to_fixed(kWidth, 0) + " " +
            to_fixed(kHeight, 0) + "\">\n";
    body += "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    body += "  <text x=\"" + to_fixed(kWidth / 2.0, 1) +
            "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
            "font-size=\"16\">" +
            svg_escape(title) + "</text>\n";
    body += "  <line x1=\"" + to_fixed(kLeft, 1) + "\" y1=\"" +
            to_fixed(kBottom, 1) + "\" x2=\"" + to_fixed(kRight, 1) +
            "\" y2=\"" + to_fixed(kBottom, 1) +
            "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    body += "  <line x1=\"" + to_fixed(kLeft, 1) + "\" y1=\"" +
            to_fixed(kTop, 1) + "\" x2=\"" + to_fixed(kLeft, 1) +
            "\" y2=\"" + to_fixed(kBottom, 1) +
            "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    body += "  <text x=\"" + to_fixed((kLeft + kRight) / 2.0, 1) +
            "\" y=\"385\" text-anchor=\"middle\" font-family=\"sans-serif\" "
            "font-size=\"12\">" +
            svg_escape(x_label) + "</text>\n";
    body += "  <text x=\"18\" y=\"" + to_fixed((kTop + kBottom) / 2.0, 1) +
            "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
            "font-size=\"12\" transform=\"rotate(-90 18 " +
            to_fixed((kTop + kBottom) / 2.0, 1) + ")\">" +
            svg_escape(y_label) + "</text>\n";
  }

  // Horizontal gridlines with y-axis tick labels over [0, y_max].
  void grid(double y_max, int ticks = 5) {
    for (int i = 0; i <= ticks; ++i) {
      const double fraction = static_cast<double>(i) / ticks;
      const double y = kBottom - fraction * (kBottom - kTop);
      if (i > 0)
        body += "  <line x1=\"" + to_fixed(kLeft, 1) + "\" y1=\"" +
                to_fixed(y, 1) + "\" x2=\"" + to_fixed(kRight, 1) +
                "\" y2=\"" + to_fixed(y, 1) +
                "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
      body += "  <text x=\"" + to_fixed(kLeft - 6.0, 1) + "\" y=\"" +
              to_fixed(y + 4.0, 1) +
              "\" text-anchor=\"end\" font-family=\"sans-serif\" "
              "font-size=\"10\">" +
              to_fixed(fraction * y_max, 2) + "</text>\n";
    }
  }

  std::string close() { return body + "</svg>\n"; }
};

// A safe positive plotting ceiling: 10% above the data maximum.
inline double plot_ceiling(double max_value) {
  return max_value > 0.0 ? 1.1 * max_value : 1.0;
}

}  // namespace detail

// One labelled bar per value; y axis from zero.
inline std::string svg_bar_chart(const std::string& title,
                                 const std::vector<std::string>& labels,
                                 const std::vector<double>& values,
                                 const std::string& y_label) {
  if (labels.size() != values.size())
    throw ShapeMismatchError("svg_bar_chart: " +
                             std::to_string(labels.size()) + " labels for " +
                             std::to_string(values.size()) + " values");
  if (values.empty()) throw ValidationError("svg_bar_chart: no values");
  for (const double v : values)
    if (!std::isfinite(v) || v < 0.0)
      throw ValidationError("svg_bar_chart: values must be finite and >= 0");

  using detail::ChartFrame;
  ChartFrame frame;
  frame.open(title, "", y_label);
  const double y_max =
      detail::plot_ceiling(*std::max_element(values.begin(), values.end()));
  frame.grid(y_max);

  const double span = ChartFrame::kRight - ChartFrame::kLeft;
  const double slot = span / static_cast<double>(values.size());
  const double bar_width = 0.6 * slot;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double x =
        ChartFrame::kLeft + (static_cast<double>(i) + 0.2) * slot;
    const double height =
        (values[i] / y_max) * (ChartFrame::kBottom - ChartFrame::kTop);
    const double y = ChartFrame::kBottom - height;
    frame.body += "  <rect x=\"" + to_fixed(x, 1) + "\" y=\"" +
                  to_fixed(y, 1) + "\" width=\"" + to_fixed(bar_width, 1) +
                  "\" height=\"" + to_fixed(height, 1) + "\" fill=\"" +
                  detail::plot_color(i) + "\"/>\n";
    frame.body += "  <text x=\"" + to_fixed(x + bar_width / 2.0, 1) +
                  "\" y=\"" + to_fixed(y - 6.0, 1) +
                  "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                  "font-size=\"11\">" +
                  to_fixed(values[i], 2) + "</text>\n";
    frame.body += "  <text x=\"" + to_fixed(x + bar_width / 2.0, 1) +
                  "\" y=\"" + to_fixed(ChartFrame::kBottom + 16.0, 1) +
                  "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                  "font-size=\"11\">" +
                  detail::svg_escape(labels[i]) + "</text>\n";
  }
  return frame.close();
}

// One polyline per series over a shared x range; y axis from zero.
inline std::string svg_line_chart(const std::string& title,
                                  const std::string& x_label,
                                  const std::string& y_label,
                                  const std::vector<PlotSeries>& series) {
  if (series.empty()) throw ValidationError("svg_line_chart: no series");
  double x_min = 0.0, x_max = 0.0, y_max = 0.0;
  bool first = true;
  for (const PlotSeries& s : series) {
    if (s.points.empty())
      throw ValidationError("svg_line_chart: series '" + s.name +
                            "' has no points");
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y) || y < 0.0)
        throw ValidationError(
            "svg_line_chart: points must be finite with y >= 0");
      if (first) {
        x_min = x_max = x;
        first = false;
      }
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
      y_max = std::max(y_max, y);
    }
  }
  if (x_max == x_min) x_max = x_min + 1.0;
  y_max = detail::plot_ceiling(y_max);

  using detail::ChartFrame;
  ChartFrame frame;
  frame.open(title, x_label, y_label);
  frame.grid(y_max);

  const auto map_x = [&](double x) {
    return ChartFrame::kLeft + (x - x_min) / (x_max - x_min) *
                                   (ChartFrame::kRight - ChartFrame::kLeft);
  };
  const auto map_y = [&](double y) {
    return ChartFrame::kBottom -
           (y / y_max) * (ChartFrame::kBottom - ChartFrame::kTop);
  };

  // X-axis tick labels at the series' shared extremes and midpoint.
  for (const double x : {x_min, (x_min + x_max) / 2.0, x_max})
    frame.body += "  <text x=\"" + to_fixed(map_x(x), 1) + "\" y=\"" +
                  to_fixed(ChartFrame::kBottom + 16.0, 1) +
                  "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                  "font-size=\"10\">" +
                  to_fixed(x, 2) + "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    std::string points;
    for (const auto& [x, y] : series[s].points) {
      if (!points.empty()) points += " ";
      points += to_fixed(map_x(x), 1) + "," + to_fixed(map_y(y), 1);
    }
    frame.body += "  <polyline fill=\"none\" stroke=\"" +
                  std::string(detail::plot_color(s)) +
                  "\" stroke-width=\"2\" points=\"" + points + "\"/>\n";
    for (const auto& [x, y] : series[s].points)
      frame.body += "  <circle cx=\"" + to_fixed(map_x(x), 1) + "\" cy=\"" +
                    to_fixed(map_y(y), 1) + "\" r=\"3\" fill=\"" +
                    detail::plot_color(s) + "\"/>\n";
    // Legend entry, top-right corner.
    const double legend_y = ChartFrame::kTop + 16.0 * static_cast<double>(s);
    frame.body += "  <rect x=\"" + to_fixed(ChartFrame::kRight - 150.0, 1) +
                  "\" y=\"" + to_fixed(legend_y, 1) +
                  "\" width=\"12\" height=\"12\" fill=\"" +
                  detail::plot_color(s) + "\"/>\n";
    frame.body += "  <text x=\"" + to_fixed(ChartFrame::kRight - 134.0, 1) +
                  "\" y=\"" + to_fixed(legend_y + 10.0, 1) +
                  "\" font-family=\"sans-serif\" font-size=\"11\">" +
                  detail::svg_escape(series[s].name) + "</text>\n";
  }
  return frame.close();
}

}  // namespace depropose
