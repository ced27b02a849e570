#pragma once

#include <string>
#include <vector>

#include "pushlab/vec2.hpp"

namespace pushlab::svg {

/// Minimal deterministic SVG writer (fixed number formatting, no
/// timestamps), enough for bar charts and trajectory overlays.
class Canvas {
 public:
  Canvas(double width, double height);

  void line(double x1, double y1, double x2, double y2, const std::string& color,
            double stroke = 1.0);
  void rect(double x, double y, double w, double h, const std::string& fill,
            const std::string& stroke = "none");
  void circle(double cx, double cy, double r, const std::string& fill);
  void polyline(const std::vector<Vec2>& pts, const std::string& color, double stroke = 1.0);
  void text(double x, double y, const std::string& s, double size = 10.0,
            const std::string& anchor = "start");

  std::string str() const;
  void save(const std::string& path) const;

 private:
  double width_;
  double height_;
  std::string body_;
};

struct BarGroup {
  std::string label;
  std::vector<double> values;  // one bar per series
};

/// Grouped bar chart with axis, series legend, and per-bar value labels.
/// Missing values (NaN) render as hatched "censored" markers.
void bar_chart(const std::string& path, const std::string& title,
               const std::vector<std::string>& series, const std::vector<BarGroup>& groups,
               const std::string& y_label);

/// Desired path polyline plus realized trace points.
void trajectory_overlay(const std::string& path, const std::string& title,
                        const std::vector<Vec2>& desired, const std::vector<Vec2>& realized);

}  // namespace pushlab::svg
