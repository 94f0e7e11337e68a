#include "svg.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>

namespace trajrl::cli {

namespace {

std::string num(double v) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(2) << v;
  return o.str();
}

std::string tick_label(double v) {
  std::ostringstream o;
  o << std::setprecision(4) << v;
  return o.str();
}

}  // namespace

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
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

Svg::Svg(double width, double height, const std::string& title) : width_(width), height_(height) {
  body_ << "<title>" << xml_escape(title) << "</title>\n";
  rect(0, 0, width, height, "white");
}

void Svg::rect(double x, double y, double w, double h, const std::string& fill,
               const std::string& stroke) {
  body_ << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(w)
        << "\" height=\"" << num(h) << "\" fill=\"" << fill << "\" stroke=\"" << stroke
        << "\"/>\n";
}

void Svg::circle(double cx, double cy, double r, const std::string& fill) {
  body_ << "<circle cx=\"" << num(cx) << "\" cy=\"" << num(cy) << "\" r=\"" << num(r)
        << "\" fill=\"" << fill << "\"/>\n";
}

void Svg::polyline(const std::vector<std::pair<double, double>>& points, const std::string& stroke,
                   double width) {
  if (points.empty()) return;
  body_ << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"" << num(width)
        << "\" points=\"";
  for (const auto& [x, y] : points) body_ << num(x) << ',' << num(y) << ' ';
  body_ << "\"/>\n";
}

void Svg::line(double x1, double y1, double x2, double y2, const std::string& stroke,
               double width) {
  body_ << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2)
        << "\" y2=\"" << num(y2) << "\" stroke=\"" << stroke << "\" stroke-width=\""
        << num(width) << "\"/>\n";
}

void Svg::text(double x, double y, const std::string& content, double size,
               const std::string& anchor) {
  body_ << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-size=\"" << num(size)
        << "\" font-family=\"sans-serif\" text-anchor=\"" << anchor << "\">"
        << xml_escape(content) << "</text>\n";
}

void Svg::comment(const std::string& content) {
  std::string c = content;
  std::replace(c.begin(), c.end(), '-', '_');
  body_ << "<!-- " << c << " -->\n";
}

std::string Svg::str() const {
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width_) << "\" height=\""
    << num(height_) << "\" viewBox=\"0 0 " << num(width_) << ' ' << num(height_) << "\">\n"
    << body_.str() << "</svg>\n";
  return o.str();
}

std::string line_chart(const std::vector<Series>& series, const std::string& title,
                       const std::string& x_label, const std::string& y_label,
                       const std::string& note) {
  const double w = 720, h = 420, left = 70, right = 20, top = 40, bottom = 55;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) {
      x0 = std::min(x0, x); x1 = std::max(x1, x);
      y0 = std::min(y0, y); y1 = std::max(y1, y);
    }
  if (!std::isfinite(x0)) { x0 = 0; x1 = 1; y0 = 0; y1 = 1; }
  if (x1 == x0) { x0 -= 0.5; x1 += 0.5; }
  if (y1 == y0) { y0 -= 0.5; y1 += 0.5; }
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * (w - left - right); };
  auto py = [&](double y) { return h - bottom - (y - y0) / (y1 - y0) * (h - top - bottom); };

  Svg svg(w, h, title);
  if (!note.empty()) svg.comment(note);
  svg.text(w / 2, 22, title, 14, "middle");
  svg.line(left, h - bottom, w - right, h - bottom, "black");
  svg.line(left, top, left, h - bottom, "black");
  for (int i = 0; i <= 5; ++i) {
    const double xv = x0 + (x1 - x0) * i / 5.0, yv = y0 + (y1 - y0) * i / 5.0;
    svg.line(px(xv), h - bottom, px(xv), h - bottom + 4, "black");
    svg.text(px(xv), h - bottom + 17, tick_label(xv), 10, "middle");
    svg.line(left - 4, py(yv), left, py(yv), "black");
    svg.text(left - 7, py(yv) + 3, tick_label(yv), 10, "end");
  }
  svg.text((left + w - right) / 2, h - 12, x_label, 12, "middle");
  svg.text(16, (top + h - bottom) / 2, y_label, 12, "middle");
  double legend_y = top + 6;
  for (const auto& s : series) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& [x, y] : s.points) pts.emplace_back(px(x), py(y));
    if (s.markers) {
      for (const auto& [x, y] : pts) svg.circle(x, y, 2.5, s.color);
    } else {
      svg.polyline(pts, s.color);
    }
    svg.rect(w - right - 130, legend_y - 8, 10, 10, s.color);
    svg.text(w - right - 115, legend_y + 1, s.name, 11);
    legend_y += 16;
  }
  return svg.str();
}

}  // namespace trajrl::cli
