#ifndef TRAJRL_TOOLS_SVG_H_
#define TRAJRL_TOOLS_SVG_H_

#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace trajrl::cli {

// Minimal standalone SVG writer. Coordinates are in pixels.
class Svg {
 public:
  Svg(double width, double height, const std::string& title);

  void rect(double x, double y, double w, double h, const std::string& fill,
            const std::string& stroke = "none");
  void circle(double cx, double cy, double r, const std::string& fill);
  void polyline(const std::vector<std::pair<double, double>>& points,
                const std::string& stroke, double width = 1.5);
  void line(double x1, double y1, double x2, double y2, const std::string& stroke,
            double width = 1.0);
  void text(double x, double y, const std::string& content, double size = 11,
            const std::string& anchor = "start");
  void comment(const std::string& content);
  std::string str() const;

 private:
  double width_, height_;
  std::ostringstream body_;
};

// Axis-aligned line chart with linear axes and tick labels.
struct Series {
  std::string name;
  std::string color;
  std::vector<std::pair<double, double>> points;
  bool markers = false;
};
std::string line_chart(const std::vector<Series>& series, const std::string& title,
                       const std::string& x_label, const std::string& y_label,
                       const std::string& note = "");

std::string xml_escape(const std::string& s);

}  // namespace trajrl::cli

#endif  // TRAJRL_TOOLS_SVG_H_
