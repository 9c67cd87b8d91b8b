#include "chatter/render.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "chatter/errors.hpp"

namespace chatter {

namespace {

constexpr const char* kChatterColor = "#d7301f";
constexpr const char* kStableColor = "#2c7fb8";
constexpr const char* kMissColor = "#ffd92f";
constexpr const char* kBoundaryColor = "#808080";

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_map(const LabelGrid& grid, const LobeBoundary& boundary,
                       const MapOptions& options) {
  const std::size_t nx = grid.speed_axis.size();
  const std::size_t ny = grid.depth_axis.size();
  if (nx == 0 || ny == 0 || grid.labels.size() != nx) {
    throw DomainError("label grid is empty or malformed");
  }

  const double left = 70, right = 20, top = 40, bottom = 90;
  const double plot_w = options.width - left - right;
  const double plot_h = options.height - top - bottom;
  const double cw = plot_w / static_cast<double>(nx);
  const double ch = plot_h / static_cast<double>(ny);

  // Cell centers sit at the axis values; only the axis ends are used so
  // uniformly spaced axes map exactly onto the raster.
  const double s0 = grid.speed_axis.front(), s1 = grid.speed_axis.back();
  const double b0 = grid.depth_axis.front(), b1 = grid.depth_axis.back();
  auto x_of = [&](double s) {
    const double u = nx > 1 ? (s - s0) / (s1 - s0) : 0.5;
    return left + cw / 2 + u * (plot_w - cw);
  };
  auto y_of = [&](double b) {
    const double u = ny > 1 ? (b - b0) / (b1 - b0) : 0.5;
    return top + plot_h - ch / 2 - u * (plot_h - ch);
  };

  const std::set<std::pair<std::size_t, std::size_t>> missed(options.misclassified.begin(),
                                                             options.misclassified.end());

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(options.width) +
         "\" height=\"" + std::to_string(options.height) + "\" viewBox=\"0 0 " +
         std::to_string(options.width) + " " + std::to_string(options.height) + "\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(options.width) + "\" height=\"" +
         std::to_string(options.height) + "\" fill=\"#ffffff\"/>\n";
  if (!options.title.empty()) {
    svg += "<text x=\"" + num(options.width / 2.0) +
           "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">" +
           escape(options.title) + "</text>\n";
  }

  svg += "<g shape-rendering=\"crispEdges\">\n";
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < ny; ++j) {
      const bool miss = missed.contains({i, j});
      const bool chat = grid.labels[i][j];
      const char* cls = miss ? "cell misclassified" : chat ? "cell chatter" : "cell stable";
      const char* fill = miss ? kMissColor : chat ? kChatterColor : kStableColor;
      const double x = left + static_cast<double>(i) * cw;
      const double y = top + plot_h - static_cast<double>(j + 1) * ch;
      svg += "<rect class=\"" + std::string(cls) + "\" x=\"" + num(x) + "\" y=\"" + num(y) +
             "\" width=\"" + num(cw) + "\" height=\"" + num(ch) + "\" fill=\"" + fill + "\"/>\n";
    }
  }
  svg += "</g>\n";

  // Boundary restricted to the plotted speed range, clipped to the plot box.
  std::string points;
  const double y_min = top, y_max = top + plot_h;
  for (const auto& p : boundary.samples) {
    if (p.speed_ratio < std::min(s0, s1) || p.speed_ratio > std::max(s0, s1)) continue;
    const double y = std::clamp(y_of(p.b_lim), y_min, y_max);
    if (!points.empty()) points += ' ';
    points += num(x_of(p.speed_ratio)) + "," + num(y);
  }
  if (!points.empty()) {
    svg += "<polyline class=\"boundary\" fill=\"none\" stroke=\"" + std::string(kBoundaryColor) +
           "\" stroke-width=\"2\" points=\"" + points + "\"/>\n";
  }

  svg += "<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" + num(plot_w) +
         "\" height=\"" + num(plot_h) + "\" fill=\"none\" stroke=\"#000000\"/>\n";
  auto label = [&](double x, double y, const std::string& anchor, const std::string& text) {
    svg += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" text-anchor=\"" + anchor +
           "\" font-family=\"sans-serif\" font-size=\"12\">" + escape(text) + "</text>\n";
  };
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", s0);
  label(left, top + plot_h + 16, "start", buf);
  std::snprintf(buf, sizeof buf, "%.3g", s1);
  label(left + plot_w, top + plot_h + 16, "end", buf);
  label(left + plot_w / 2, top + plot_h + 32, "middle", "speed ratio");
  std::snprintf(buf, sizeof buf, "%.3g", b0);
  label(left - 6, top + plot_h, "end", buf);
  std::snprintf(buf, sizeof buf, "%.3g", b1);
  label(left - 6, top + 10, "end", buf);
  label(left - 6, top + plot_h / 2, "end", "b");

  const double ly = options.height - 26;
  auto swatch = [&](double x, const char* color, const std::string& text) {
    svg += "<rect class=\"legend\" x=\"" + num(x) + "\" y=\"" + num(ly - 10) +
           "\" width=\"12\" height=\"12\" fill=\"" + color + "\"/>\n";
    label(x + 16, ly, "start", text);
  };
  swatch(left, kChatterColor, "chatter");
  swatch(left + 90, kStableColor, "stable");
  if (!missed.empty()) swatch(left + 180, kMissColor, "misclassified");
  svg += "<line class=\"legend\" x1=\"" + num(left + 300) + "\" y1=\"" + num(ly - 4) +
         "\" x2=\"" + num(left + 324) + "\" y2=\"" + num(ly - 4) + "\" stroke=\"" +
         kBoundaryColor + "\" stroke-width=\"2\"/>\n";
  label(left + 330, ly, "start", "stability boundary");
  svg += "</svg>\n";
  return svg;
}

}  // namespace chatter
