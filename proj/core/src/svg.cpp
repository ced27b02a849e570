#include "pushlab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace pushlab::svg {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string fmt_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

}  // namespace

Canvas::Canvas(double width, double height) : width_(width), height_(height) {}

void Canvas::line(double x1, double y1, double x2, double y2, const std::string& color,
                  double stroke) {
  body_ += "<line x1=\"" + fmt(x1) + "\" y1=\"" + fmt(y1) + "\" x2=\"" + fmt(x2) + "\" y2=\"" +
           fmt(y2) + "\" stroke=\"" + color + "\" stroke-width=\"" + fmt(stroke) + "\"/>\n";
}

void Canvas::rect(double x, double y, double w, double h, const std::string& fill,
                  const std::string& stroke) {
  body_ += "<rect x=\"" + fmt(x) + "\" y=\"" + fmt(y) + "\" width=\"" + fmt(w) + "\" height=\"" +
           fmt(h) + "\" fill=\"" + fill + "\" stroke=\"" + stroke + "\"/>\n";
}

void Canvas::circle(double cx, double cy, double r, const std::string& fill) {
  body_ += "<circle cx=\"" + fmt(cx) + "\" cy=\"" + fmt(cy) + "\" r=\"" + fmt(r) + "\" fill=\"" +
           fill + "\"/>\n";
}

void Canvas::polyline(const std::vector<Vec2>& pts, const std::string& color, double stroke) {
  if (pts.empty()) return;
  body_ += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"" + fmt(stroke) +
           "\" points=\"";
  for (const auto& p : pts) body_ += fmt(p.x) + "," + fmt(p.y) + " ";
  body_ += "\"/>\n";
}

void Canvas::text(double x, double y, const std::string& s, double size,
                  const std::string& anchor) {
  body_ += "<text x=\"" + fmt(x) + "\" y=\"" + fmt(y) + "\" font-size=\"" + fmt(size) +
           "\" font-family=\"sans-serif\" text-anchor=\"" + anchor + "\">" + s + "</text>\n";
}

std::string Canvas::str() const {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(width_) + "\" height=\"" +
         fmt(height_) + "\" viewBox=\"0 0 " + fmt(width_) + " " + fmt(height_) + "\">\n" + body_ +
         "</svg>\n";
}

void Canvas::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write svg: " + path);
  out << str();
}

void bar_chart(const std::string& path, const std::string& title,
               const std::vector<std::string>& series, const std::vector<BarGroup>& groups,
               const std::string& y_label) {
  const double w = 640, h = 400;
  const double ml = 60, mr = 20, mt = 40, mb = 50;
  Canvas c(w, h);
  c.text(w / 2, 20, title, 13, "middle");
  c.text(15, h / 2, y_label, 10, "middle");
  c.line(ml, h - mb, w - mr, h - mb, "#333");
  c.line(ml, mt, ml, h - mb, "#333");

  double vmax = 1.0;
  for (const auto& g : groups) {
    for (double v : g.values) {
      if (std::isfinite(v)) vmax = std::max(vmax, v);
    }
  }
  const double plot_w = w - ml - mr;
  const double plot_h = h - mt - mb;
  const char* palette[] = {"#b4323c", "#808080", "#3c6eb4", "#50a050"};

  const std::size_t ng = groups.size();
  for (std::size_t gi = 0; gi < ng; ++gi) {
    const auto& g = groups[gi];
    const double gx = ml + plot_w * (static_cast<double>(gi) + 0.1) / std::max<std::size_t>(ng, 1);
    const double gw = plot_w * 0.8 / std::max<std::size_t>(ng, 1);
    const std::size_t ns = std::max<std::size_t>(g.values.size(), 1);
    for (std::size_t si = 0; si < g.values.size(); ++si) {
      const double v = g.values[si];
      const double bx = gx + gw * static_cast<double>(si) / ns;
      const double bw = gw / ns * 0.9;
      const std::string color = palette[si % 4];
      if (std::isfinite(v)) {
        const double bh = plot_h * v / vmax;
        c.rect(bx, h - mb - bh, bw, bh, color);
        c.text(bx + bw / 2, h - mb - bh - 3, fmt_value(v), 8, "middle");
      } else {
        c.rect(bx, h - mb - 12, bw, 12, "none", color);
        c.text(bx + bw / 2, h - mb - 3, "x", 8, "middle");
      }
    }
    c.text(gx + gw / 2, h - mb + 14, g.label, 9, "middle");
  }
  for (std::size_t si = 0; si < series.size(); ++si) {
    const double lx = ml + 10 + 130 * static_cast<double>(si);
    c.rect(lx, mt - 14, 10, 10, palette[si % 4]);
    c.text(lx + 14, mt - 5, series[si], 9);
  }
  c.save(path);
}

void trajectory_overlay(const std::string& path, const std::string& title,
                        const std::vector<Vec2>& desired, const std::vector<Vec2>& realized) {
  const double w = 520, h = 520;
  Canvas c(w, h);
  c.text(w / 2, 20, title, 13, "middle");

  double xmin = -0.05, xmax = 0.05, ymin = -0.05, ymax = 0.05;
  auto grow = [&](const std::vector<Vec2>& pts) {
    for (const auto& p : pts) {
      xmin = std::min(xmin, p.x);
      xmax = std::max(xmax, p.x);
      ymin = std::min(ymin, p.y);
      ymax = std::max(ymax, p.y);
    }
  };
  grow(desired);
  grow(realized);
  const double pad = 0.02;
  xmin -= pad;
  xmax += pad;
  ymin -= pad;
  ymax += pad;
  const double scale = std::min((w - 60) / (xmax - xmin), (h - 80) / (ymax - ymin));
  auto map = [&](const Vec2& p) {
    return Vec2{30 + (p.x - xmin) * scale, h - 40 - (p.y - ymin) * scale};
  };

  std::vector<Vec2> dm, rm;
  for (const auto& p : desired) dm.push_back(map(p));
  for (const auto& p : realized) rm.push_back(map(p));
  c.polyline(dm, "#808080", 1.5);
  for (const auto& p : rm) c.circle(p.x, p.y, 2.0, "#b4323c");
  c.text(30, h - 12, "desired: gray line, realized: red dots", 9);
  c.save(path);
}

}  // namespace pushlab::svg
