// Copyright 2026 The AutoOdom Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cstdio>
#include <limits>

#include "autoodom/cli.hpp"

namespace autoodom {

namespace {

constexpr double kCanvas = 800.0;
constexpr double kMargin = 40.0;
constexpr const char* kGtColor = "#1f77b4";
constexpr const char* kPredColor = "#ff7f0e";

template <typename... Args>
std::string fmt(const char* pattern, Args... args) {
  char buf[96];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

std::string escape_xml(std::string_view text) {
  std::string out;
  for (char c : text) {
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

std::string render_overlay_svg(std::span<const Eigen::Vector2d> gt,
                               std::span<const Eigen::Vector2d> pred,
                               std::string_view title) {
  Eigen::Vector2d lo = Eigen::Vector2d::Constant(std::numeric_limits<double>::max());
  Eigen::Vector2d hi = -lo;
  for (auto series : {gt, pred}) {
    for (const auto& p : series) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
  }
  if (gt.empty() && pred.empty()) {
    lo.setZero();
    hi.setOnes();
  }
  // Equal axis scaling, centred.
  const double span = std::max({hi.x() - lo.x(), hi.y() - lo.y(), 1e-3});
  const Eigen::Vector2d centre = 0.5 * (lo + hi);
  const double scale = (kCanvas - 2.0 * kMargin) / span;
  auto to_px = [&](const Eigen::Vector2d& p) {
    return Eigen::Vector2d(kCanvas / 2.0 + (p.x() - centre.x()) * scale,
                           kCanvas / 2.0 - (p.y() - centre.y()) * scale);
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"800\" "
         "viewBox=\"0 0 800 800\">\n";
  svg += "<rect width=\"800\" height=\"800\" fill=\"white\"/>\n";
  svg += "<text x=\"40\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\">" +
         escape_xml(title) + "</text>\n";
  auto polyline = [&](std::span<const Eigen::Vector2d> pts, const char* color,
                      const char* label) {
    svg += "<polyline id=\"";
    svg += label;
    svg += "\" fill=\"none\" stroke=\"";
    svg += color;
    svg += "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Eigen::Vector2d px = to_px(pts[i]);
      if (i) svg += ' ';
      svg += fmt("%.2f,%.2f", px.x(), px.y());
    }
    svg += "\"/>\n";
  };
  polyline(gt, kGtColor, "ground_truth");
  polyline(pred, kPredColor, "prediction");
  svg += "<text x=\"600\" y=\"760\" font-family=\"sans-serif\" font-size=\"14\" fill=\"";
  svg += kGtColor;
  svg += "\">ground truth</text>\n";
  svg += "<text x=\"600\" y=\"780\" font-family=\"sans-serif\" font-size=\"14\" fill=\"";
  svg += kPredColor;
  svg += "\">prediction</text>\n";
  svg += "<text x=\"40\" y=\"780\" font-family=\"sans-serif\" font-size=\"12\">" +
         fmt("scale: %.3f m per 100 px", 100.0 / scale) + "</text>\n";
  svg += "</svg>\n";
  return svg;
}

std::string render_overlay_csv(std::span<const Eigen::Vector2d> gt,
                               std::span<const Eigen::Vector2d> pred) {
  std::string csv = "series,index,x,y\n";
  auto rows = [&](std::span<const Eigen::Vector2d> pts, const char* name) {
    for (std::size_t i = 0; i < pts.size(); ++i) {
      csv += name;
      csv += ',' + std::to_string(i) + ',';
      csv += fmt("%.17g,%.17g", pts[i].x(), pts[i].y());
      csv += '\n';
    }
  };
  rows(gt, "gt");
  rows(pred, "pred");
  return csv;
}

}  // namespace autoodom
