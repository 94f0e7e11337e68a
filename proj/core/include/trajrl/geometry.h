#ifndef TRAJRL_GEOMETRY_H_
#define TRAJRL_GEOMETRY_H_

#include <array>
#include <optional>
#include <span>
#include <vector>

namespace trajrl::geometry {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

// Road centerline y(x) = c0 + c1 x + c2 x^2 + c3 x^3 with its lane layout.
// The curve parameter is x; arc length s is measured from x_origin (the ego
// position), so s = 0 there.
struct RoadCurve {
  std::array<double, 4> coeffs{};
  double lane_width = 3.5;     // m
  int num_lanes = 3;
  double layer_spacing = 10.0;  // L, m
  double x_origin = 0.0;

  void validate() const;
  double y(double x) const;
  double slope(double x) const;
  double second_derivative(double x) const;
  Point2 point(double x) const { return {x, y(x)}; }
  // Unit normal pointing left of the direction of travel (+x).
  Point2 normal(double x) const;
  double road_half_width() const { return 0.5 * num_lanes * lane_width; }
};

// s along the centerline, n signed along the normal (left positive), meters.
struct CurvilinearPoint {
  double s = 0.0;
  double n = 0.0;
};

// (s / L, n / lane_width)
struct CellPoint {
  double layer = 0.0;
  double lane_offset = 0.0;
};

// Least-squares cubic through the samples. Throws DegenerateInput with fewer
// than four distinct abscissae.
RoadCurve fit_road_curve(std::span<const Point2> samples, double lane_width = 3.5,
                         int num_lanes = 3, double layer_spacing = 10.0,
                         double x_origin = 0.0);

// Signed arc length between curve parameters t0 and t1.
double arc_length(const RoadCurve& curve, double t0, double t1);

// Curve parameter reached after travelling s meters from x_origin (s may be
// negative to go backwards).
double arc_length_advance(const RoadCurve& curve, double s);

// Closest point on the centerline. The default corridor is twice the road
// half-width; farther points throw OffCorridor.
CurvilinearPoint cartesian_to_curvilinear(const RoadCurve& curve, Point2 p,
                                          std::optional<double> corridor_half_width = {});
Point2 curvilinear_to_cartesian(const RoadCurve& curve, CurvilinearPoint q);

CellPoint curvilinear_to_cell(CurvilinearPoint q, const RoadCurve& curve);
CurvilinearPoint cell_to_curvilinear(CellPoint c, const RoadCurve& curve);

// Layer spacing used for one planning cycle: max(min_spacing, v0 * seconds).
double layer_spacing_for_speed(double v0, double min_spacing = 5.0,
                               double seconds_per_layer = 1.0);

// Natural cubic spline (zero second derivative at both ends).
class CubicSpline {
 public:
  CubicSpline(std::vector<double> x, std::vector<double> y);

  double operator()(double x) const;
  double derivative(double x) const;
  double second_derivative(double x) const;
  // One-sided derivatives at knot i, evaluated on the segments to its left
  // and right (the end knots use their only segment).
  double derivative_left(std::size_t knot) const;
  double derivative_right(std::size_t knot) const;
  double second_derivative_left(std::size_t knot) const;
  double second_derivative_right(std::size_t knot) const;

  const std::vector<double>& knots() const { return x_; }
  const std::vector<double>& values() const { return y_; }
  // Second derivatives at the knots.
  const std::vector<double>& moments() const { return m_; }

 private:
  std::size_t segment(double x) const;
  double on_segment(std::size_t i, double x, int order) const;

  std::vector<double> x_, y_, m_;
};

// Throws DegenerateInput for fewer than two points or abscissae that are not
// strictly increasing.
CubicSpline fit_trajectory_spline(std::span<const double> x, std::span<const double> y);
CubicSpline fit_trajectory_spline(std::span<const Point2> points);
CubicSpline fit_trajectory_spline(std::span<const CurvilinearPoint> points);

}  // namespace trajrl::geometry

#endif  // TRAJRL_GEOMETRY_H_
