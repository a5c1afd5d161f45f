#include "gliderdec/svg_plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace gliderdec {

namespace {

const char* kColorCycle[] = {"#1f6fb4", "#c23b22", "#2e8b57",
                             "#e08214", "#7b5aa6", "#6b6b6b"};
constexpr int kColorCount = 6;

std::string esc(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&') out += "&amp;";
    else if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else out += c;
  }
  return out;
}

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string num_label(double v) {
  // tick values come from the nice-step generator, so %g stays compact
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

struct Extent {
  double lo = 0.0;
  double hi = 0.0;
  bool any = false;
  void grow(double v) {
    if (!std::isfinite(v)) throw std::logic_error("non-finite value in plot");
    if (!any) {
      lo = hi = v;
      any = true;
    } else {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  void pad() {
    if (!any) {
      lo = 0.0;
      hi = 1.0;
      return;
    }
    if (hi == lo) {
      const double d = std::max(0.5, std::abs(lo) * 0.1);
      lo -= d;
      hi += d;
    } else {
      const double d = 0.04 * (hi - lo);
      lo -= d;
      hi += d;
    }
  }
};

std::vector<double> nice_ticks(double lo, double hi, int target = 5) {
  const double span = hi - lo;
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  }
  std::vector<double> ticks;
  double t = std::ceil(lo / step) * step;
  for (; t <= hi + 1e-9 * span; t += step) {
    double v = t;
    if (std::abs(v) < 1e-12 * span) v = 0.0;  // avoid "-0"
    ticks.push_back(v);
  }
  return ticks;
}

struct Panel {
  double x0, y0, w, h;  // data area in document pixels
  Extent ex, ey;
  bool flip_y = false;
  double to_x(double x) const { return x0 + (x - ex.lo) / (ex.hi - ex.lo) * w; }
  double to_y(double y) const {
    const double f = (y - ey.lo) / (ey.hi - ey.lo);
    return flip_y ? y0 + f * h : y0 + (1.0 - f) * h;
  }
};

void render_panel(std::string& svg, const PanelSpec& spec, const Panel& p,
                  int clip_id) {
  // frame and clip region
  svg += "<clipPath id=\"clip" + std::to_string(clip_id) + "\"><rect x=\"" +
         px(p.x0) + "\" y=\"" + px(p.y0) + "\" width=\"" + px(p.w) +
         "\" height=\"" + px(p.h) + "\"/></clipPath>\n";
  svg += "<rect x=\"" + px(p.x0) + "\" y=\"" + px(p.y0) + "\" width=\"" +
         px(p.w) + "\" height=\"" + px(p.h) +
         "\" fill=\"white\" stroke=\"#333\" stroke-width=\"1\"/>\n";

  // ticks, grid and labels
  for (double t : nice_ticks(p.ex.lo, p.ex.hi)) {
    const double gx = p.to_x(t);
    svg += "<line x1=\"" + px(gx) + "\" y1=\"" + px(p.y0) + "\" x2=\"" +
           px(gx) + "\" y2=\"" + px(p.y0 + p.h) +
           "\" stroke=\"#ddd\" stroke-width=\"0.7\"/>\n";
    svg += "<line x1=\"" + px(gx) + "\" y1=\"" + px(p.y0 + p.h) + "\" x2=\"" +
           px(gx) + "\" y2=\"" + px(p.y0 + p.h + 4) +
           "\" stroke=\"#333\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"" + px(gx) + "\" y=\"" + px(p.y0 + p.h + 16) +
           "\" font-size=\"11\" text-anchor=\"middle\">" + num_label(t) +
           "</text>\n";
  }
  for (double t : nice_ticks(p.ey.lo, p.ey.hi)) {
    const double gy = p.to_y(t);
    svg += "<line x1=\"" + px(p.x0) + "\" y1=\"" + px(gy) + "\" x2=\"" +
           px(p.x0 + p.w) + "\" y2=\"" + px(gy) +
           "\" stroke=\"#ddd\" stroke-width=\"0.7\"/>\n";
    svg += "<line x1=\"" + px(p.x0 - 4) + "\" y1=\"" + px(gy) + "\" x2=\"" +
           px(p.x0) + "\" y2=\"" + px(gy) +
           "\" stroke=\"#333\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"" + px(p.x0 - 7) + "\" y=\"" + px(gy + 3.5) +
           "\" font-size=\"11\" text-anchor=\"end\">" + num_label(t) +
           "</text>\n";
  }

  // axis labels and panel title
  svg += "<text x=\"" + px(p.x0 + p.w / 2) + "\" y=\"" + px(p.y0 + p.h + 34) +
         "\" font-size=\"12\" text-anchor=\"middle\">" + esc(spec.x_label) +
         "</text>\n";
  svg += "<text x=\"" + px(p.x0 - 42) + "\" y=\"" + px(p.y0 + p.h / 2) +
         "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 " +
         px(p.x0 - 42) + " " + px(p.y0 + p.h / 2) + ")\">" +
         esc(spec.y_label) + "</text>\n";
  svg += "<text x=\"" + px(p.x0 + p.w / 2) + "\" y=\"" + px(p.y0 - 8) +
         "\" font-size=\"13\" text-anchor=\"middle\" font-weight=\"bold\">" +
         esc(spec.title) + "</text>\n";

  // series, clipped to the data area
  svg += "<g clip-path=\"url(#clip" + std::to_string(clip_id) + ")\">\n";
  int color_i = 0;
  for (const PlotSeries& s : spec.series) {
    const std::string color =
        s.color.empty() ? kColorCycle[color_i++ % kColorCount] : s.color;
    char attr[160];
    std::snprintf(attr, sizeof attr,
                  " stroke=\"%s\" stroke-width=\"%.2f\" fill=\"none\""
                  " stroke-opacity=\"%.3f\"%s",
                  color.c_str(), s.width, s.opacity,
                  s.dashed ? " stroke-dasharray=\"6 4\"" : "");
    if (s.line && s.x.size() > 1) {
      svg += "<polyline points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (i) svg += " ";
        svg += px(p.to_x(s.x[i])) + "," + px(p.to_y(s.y[i]));
      }
      svg += "\"";
      svg += attr;
      svg += "/>\n";
    }
    if (s.markers) {
      for (std::size_t i = 0; i < s.x.size(); ++i)
        svg += "<circle cx=\"" + px(p.to_x(s.x[i])) + "\" cy=\"" +
               px(p.to_y(s.y[i])) + "\" r=\"3\" fill=\"" + color +
               "\" fill-opacity=\"" + px(s.opacity) + "\"/>\n";
    }
  }
  svg += "</g>\n";

  // legend for labeled series
  double ly = p.y0 + 14;
  color_i = 0;
  for (const PlotSeries& s : spec.series) {
    const std::string color =
        s.color.empty() ? kColorCycle[color_i++ % kColorCount] : s.color;
    if (s.label.empty()) continue;
    const double lx = p.x0 + p.w - 130;
    svg += "<line x1=\"" + px(lx) + "\" y1=\"" + px(ly) + "\" x2=\"" +
           px(lx + 22) + "\" y2=\"" + px(ly) + "\" stroke=\"" + color +
           "\" stroke-width=\"2.2\"" +
           (s.dashed ? " stroke-dasharray=\"6 4\"" : "") + "/>\n";
    svg += "<text x=\"" + px(lx + 28) + "\" y=\"" + px(ly + 3.5) +
           "\" font-size=\"11\">" + esc(s.label) + "</text>\n";
    ly += 15;
  }
}

}  // namespace

std::string render_panel_plot(const std::vector<PanelSpec>& panels,
                              const std::string& title, int panel_width,
                              int panel_height) {
  if (panels.empty())
    throw std::logic_error("render_panel_plot: no panels");
  const double margin_l = 62, margin_r = 16, margin_t = 54, margin_b = 46;
  const int doc_w = static_cast<int>(panels.size()) * panel_width;
  const int doc_h = panel_height;

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(doc_w) + "\" height=\"" + std::to_string(doc_h) +
         "\" viewBox=\"0 0 " + std::to_string(doc_w) + " " +
         std::to_string(doc_h) +
         "\" font-family=\"Helvetica, Arial, sans-serif\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + px(doc_w / 2.0) +
         "\" y=\"20\" font-size=\"15\" text-anchor=\"middle\" "
         "font-weight=\"bold\">" +
         esc(title) + "</text>\n";

  for (std::size_t i = 0; i < panels.size(); ++i) {
    const PanelSpec& spec = panels[i];
    Panel p;
    p.x0 = i * panel_width + margin_l;
    p.y0 = margin_t;
    p.w = panel_width - margin_l - margin_r;
    p.h = panel_height - margin_t - margin_b;
    p.flip_y = spec.flip_y;
    for (const PlotSeries& s : spec.series) {
      if (s.x.size() != s.y.size())
        throw std::logic_error("plot series '" + s.label +
                               "': x and y lengths differ");
      if (s.x.empty())
        throw std::logic_error("plot series '" + s.label + "': empty");
      for (double v : s.x) p.ex.grow(v);
      for (double v : s.y) p.ey.grow(v);
    }
    p.ex.pad();
    p.ey.pad();
    if (spec.equal_aspect) {
      // widen the shorter span so a meter east draws as long as a meter north
      const double sx = (p.ex.hi - p.ex.lo) / p.w;
      const double sy = (p.ey.hi - p.ey.lo) / p.h;
      const double s = std::max(sx, sy);
      const double cx = 0.5 * (p.ex.lo + p.ex.hi);
      const double cy = 0.5 * (p.ey.lo + p.ey.hi);
      p.ex.lo = cx - 0.5 * s * p.w;
      p.ex.hi = cx + 0.5 * s * p.w;
      p.ey.lo = cy - 0.5 * s * p.h;
      p.ey.hi = cy + 0.5 * s * p.h;
    }
    render_panel(svg, spec, p, static_cast<int>(i));
  }
  svg += "</svg>\n";
  return svg;
}

void write_panel_plot(const std::vector<PanelSpec>& panels,
                      const std::string& title, const std::string& path) {
  const std::string svg = render_panel_plot(panels, title);
  const std::filesystem::path fp(path);
  if (fp.has_parent_path()) std::filesystem::create_directories(fp.parent_path());
  std::ofstream out(fp, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << svg;
}

}  // namespace gliderdec
