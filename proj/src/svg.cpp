#include "lrsched/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace lrsched::svg {

namespace {

constexpr int kMarginLeft = 64;
constexpr int kMarginRight = 16;
constexpr int kMarginTop = 28;
constexpr int kMarginBottom = 28;

std::string fixed(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.2f", v);
  return buffer;
}

std::string tick(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.3g", v);
  return buffer;
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

void render_panel(std::string& out, const Panel& panel, int top, int width, int height) {
  const double plot_w = width - kMarginLeft - kMarginRight;
  const double plot_h = height - kMarginTop - kMarginBottom;
  const auto transform = [&](double v) { return panel.log_y ? std::log10(v) : v; };
  const auto usable = [&](double v) { return std::isfinite(v) && (!panel.log_y || v > 0.0); };

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  std::size_t longest = 1;
  for (const Series& s : panel.series) {
    longest = std::max(longest, s.y.size());
    for (double v : s.y) {
      if (!usable(v)) continue;
      lo = std::min(lo, transform(v));
      hi = std::max(hi, transform(v));
    }
  }
  if (!(lo <= hi)) {
    lo = 0.0;
    hi = 1.0;
  }
  if (hi == lo) {
    lo -= 0.5;
    hi += 0.5;
  }

  const double x0 = kMarginLeft;
  const double y0 = top + kMarginTop;
  const auto px = [&](std::size_t i) {
    return longest == 1 ? x0 + plot_w / 2 : x0 + plot_w * static_cast<double>(i) / static_cast<double>(longest - 1);
  };
  const auto py = [&](double v) { return y0 + plot_h * (1.0 - (transform(v) - lo) / (hi - lo)); };

  out += "<text x=\"" + fixed(x0) + "\" y=\"" + fixed(top + 18.0) + "\" font-size=\"13\">" + escape(panel.title) +
         "</text>\n";
  out += "<rect x=\"" + fixed(x0) + "\" y=\"" + fixed(y0) + "\" width=\"" + fixed(plot_w) + "\" height=\"" +
         fixed(plot_h) + "\" fill=\"none\" stroke=\"#888\"/>\n";
  const double shown_lo = panel.log_y ? std::pow(10.0, lo) : lo;
  const double shown_hi = panel.log_y ? std::pow(10.0, hi) : hi;
  out += "<text x=\"" + fixed(x0 - 4) + "\" y=\"" + fixed(y0 + 10) + "\" font-size=\"10\" text-anchor=\"end\">" +
         tick(shown_hi) + "</text>\n";
  out += "<text x=\"" + fixed(x0 - 4) + "\" y=\"" + fixed(y0 + plot_h) +
         "\" font-size=\"10\" text-anchor=\"end\">" + tick(shown_lo) + "</text>\n";
  out += "<text x=\"" + fixed(x0 + plot_w) + "\" y=\"" + fixed(y0 + plot_h + 14) +
         "\" font-size=\"10\" text-anchor=\"end\">" + std::to_string(longest) + "</text>\n";

  double legend_y = y0 + 12;
  for (const Series& s : panel.series) {
    std::string points;
    auto flush = [&] {
      if (!points.empty()) {
        out += "<polyline fill=\"none\" stroke=\"" + escape(s.color) + "\" stroke-width=\"1.2\" points=\"" + points +
               "\"/>\n";
        points.clear();
      }
    };
    for (std::size_t i = 0; i < s.y.size(); ++i) {
      if (!usable(s.y[i])) {
        flush();
        continue;
      }
      if (!points.empty()) points += ' ';
      points += fixed(px(i)) + "," + fixed(py(s.y[i]));
    }
    flush();
    out += "<text x=\"" + fixed(x0 + plot_w - 6) + "\" y=\"" + fixed(legend_y) +
           "\" font-size=\"11\" text-anchor=\"end\" fill=\"" + escape(s.color) + "\">" + escape(s.label) +
           "</text>\n";
    legend_y += 14;
  }
}

}  // namespace

std::string render(std::span<const Panel> panels, int width, int panel_height) {
  const int height = panel_height * static_cast<int>(std::max<std::size_t>(1, panels.size()));
  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) + "\" height=\"" +
                    std::to_string(height) + "\" viewBox=\"0 0 " + std::to_string(width) + " " +
                    std::to_string(height) + "\" font-family=\"sans-serif\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t p = 0; p < panels.size(); ++p) {
    render_panel(out, panels[p], static_cast<int>(p) * panel_height, width, panel_height);
  }
  out += "</svg>\n";
  return out;
}

}  // namespace lrsched::svg
