#include "trajrl/geometry.h"

#include <algorithm>
#include <cmath>
#include <set>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "trajrl/errors.h"

namespace trajrl::geometry {

namespace {

constexpr int kClosestPointSeeds = 64;
constexpr int kNewtonDigits = 50;

double speed(const RoadCurve& curve, double t) {
  const double d = curve.slope(t);
  return std::sqrt(1.0 + d * d);
}

}  // namespace

void RoadCurve::validate() const {
  if (!(lane_width > 0)) throw DegenerateInput("lane_width must be > 0");
  if (!(layer_spacing > 0)) throw DegenerateInput("layer_spacing must be > 0");
  if (num_lanes < 1) throw DegenerateInput("num_lanes must be >= 1");
}

double RoadCurve::y(double x) const {
  return coeffs[0] + x * (coeffs[1] + x * (coeffs[2] + x * coeffs[3]));
}

double RoadCurve::slope(double x) const {
  return coeffs[1] + x * (2.0 * coeffs[2] + x * 3.0 * coeffs[3]);
}

double RoadCurve::second_derivative(double x) const {
  return 2.0 * coeffs[2] + 6.0 * coeffs[3] * x;
}

Point2 RoadCurve::normal(double x) const {
  const double d = slope(x);
  const double norm = std::sqrt(1.0 + d * d);
  return {-d / norm, 1.0 / norm};
}

RoadCurve fit_road_curve(std::span<const Point2> samples, double lane_width,
                         int num_lanes, double layer_spacing, double x_origin) {
  std::set<double> abscissae;
  for (const auto& p : samples) abscissae.insert(p.x);
  if (abscissae.size() < 4)
    throw DegenerateInput("cubic fit needs at least 4 distinct abscissae");

  // Solve in centered, scaled coordinates u = (x - c) / h for conditioning,
  // then expand back to monomials in x.
  const double c = 0.5 * (*abscissae.begin() + *abscissae.rbegin());
  const double h = std::max(0.5 * (*abscissae.rbegin() - *abscissae.begin()), 1e-12);
  const Eigen::Index m = static_cast<Eigen::Index>(samples.size());
  Eigen::MatrixXd a(m, 4);
  Eigen::VectorXd b(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double u = (samples[static_cast<std::size_t>(i)].x - c) / h;
    a(i, 0) = 1.0;
    a(i, 1) = u;
    a(i, 2) = u * u;
    a(i, 3) = u * u * u;
    b(i) = samples[static_cast<std::size_t>(i)].y;
  }
  const Eigen::Vector4d q = a.colPivHouseholderQr().solve(b);

  // y = sum_k q_k ((x - c) / h)^k
  const double d1 = q(1) / h, d2 = q(2) / (h * h), d3 = q(3) / (h * h * h);
  RoadCurve curve;
  curve.coeffs = {q(0) - d1 * c + d2 * c * c - d3 * c * c * c,
                  d1 - 2.0 * d2 * c + 3.0 * d3 * c * c,
                  d2 - 3.0 * d3 * c,
                  d3};
  curve.lane_width = lane_width;
  curve.num_lanes = num_lanes;
  curve.layer_spacing = layer_spacing;
  curve.x_origin = x_origin;
  curve.validate();
  return curve;
}

double arc_length(const RoadCurve& curve, double t0, double t1) {
  if (t0 == t1) return 0.0;
  using boost::math::quadrature::gauss_kronrod;
  return gauss_kronrod<double, 21>::integrate(
      [&](double t) { return speed(curve, t); }, t0, t1, 20, 1e-13);
}

double arc_length_advance(const RoadCurve& curve, double s) {
  const double x0 = curve.x_origin;
  if (s == 0.0) return x0;
  // |ds/dt| >= 1, so the parameter moves at most |s| from the origin.
  const double lo = s > 0 ? x0 : x0 + s;
  const double hi = s > 0 ? x0 + s : x0;
  if (curve.coeffs[2] == 0.0 && curve.coeffs[3] == 0.0) {
    return x0 + s / speed(curve, x0);
  }
  auto f = [&](double t) {
    return std::make_pair(arc_length(curve, x0, t) - s, speed(curve, t));
  };
  std::uintmax_t iterations = 200;
  return boost::math::tools::newton_raphson_iterate(f, 0.5 * (lo + hi), lo, hi,
                                                    kNewtonDigits, iterations);
}

CurvilinearPoint cartesian_to_curvilinear(const RoadCurve& curve, Point2 p,
                                          std::optional<double> corridor_half_width) {
  curve.validate();
  const double corridor = corridor_half_width.value_or(2.0 * curve.road_half_width());
  // Any centerline point within the corridor has |t - p.x| <= corridor.
  const double lo = p.x - corridor, hi = p.x + corridor;

  auto dist2 = [&](double t) {
    const double dy = curve.y(t) - p.y;
    return (t - p.x) * (t - p.x) + dy * dy;
  };
  auto grad = [&](double t) {
    const double dy = curve.y(t) - p.y;
    const double d = curve.slope(t);
    return std::make_pair(2.0 * (t - p.x) + 2.0 * dy * d,
                          2.0 + 2.0 * d * d + 2.0 * dy * curve.second_derivative(t));
  };

  std::array<double, kClosestPointSeeds> seeds{}, values{};
  for (int i = 0; i < kClosestPointSeeds; ++i) {
    seeds[i] = lo + (hi - lo) * i / (kClosestPointSeeds - 1);
    values[i] = dist2(seeds[i]);
  }
  double best_t = seeds[0];
  double best_d = values[0];
  for (int i = 0; i < kClosestPointSeeds; ++i) {
    if (values[i] < best_d) {
      best_d = values[i];
      best_t = seeds[i];
    }
    const bool left_ok = i == 0 || values[i] <= values[i - 1];
    const bool right_ok = i == kClosestPointSeeds - 1 || values[i] <= values[i + 1];
    if (!(left_ok && right_ok)) continue;
    const double a = seeds[std::max(i - 1, 0)];
    const double b = seeds[std::min(i + 1, kClosestPointSeeds - 1)];
    std::uintmax_t iterations = 100;
    const double t = boost::math::tools::newton_raphson_iterate(grad, seeds[i], a, b,
                                                                kNewtonDigits, iterations);
    const double d = dist2(t);
    if (d < best_d) {
      best_d = d;
      best_t = t;
    }
  }

  if (std::sqrt(best_d) > corridor)
    throw OffCorridor("point is farther than the corridor half-width from the road");
  const Point2 c = curve.point(best_t);
  const Point2 nrm = curve.normal(best_t);
  return {arc_length(curve, curve.x_origin, best_t),
          (p.x - c.x) * nrm.x + (p.y - c.y) * nrm.y};
}

Point2 curvilinear_to_cartesian(const RoadCurve& curve, CurvilinearPoint q) {
  const double t = arc_length_advance(curve, q.s);
  const Point2 c = curve.point(t);
  const Point2 nrm = curve.normal(t);
  return {c.x + q.n * nrm.x, c.y + q.n * nrm.y};
}

CellPoint curvilinear_to_cell(CurvilinearPoint q, const RoadCurve& curve) {
  return {q.s / curve.layer_spacing, q.n / curve.lane_width};
}

CurvilinearPoint cell_to_curvilinear(CellPoint c, const RoadCurve& curve) {
  return {c.layer * curve.layer_spacing, c.lane_offset * curve.lane_width};
}

double layer_spacing_for_speed(double v0, double min_spacing, double seconds_per_layer) {
  return std::max(min_spacing, v0 * seconds_per_layer);
}

CubicSpline::CubicSpline(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  const std::size_t n = x_.size();
  if (n < 2 || y_.size() != n) throw DegenerateInput("spline needs >= 2 points");
  for (std::size_t i = 1; i < n; ++i)
    if (!(x_[i] > x_[i - 1]))
      throw DegenerateInput("spline abscissae must be strictly increasing");

  m_.assign(n, 0.0);
  if (n == 2) return;
  // Thomas algorithm on the interior moment equations
  //   h_{i-1} M_{i-1} + 2 (h_{i-1} + h_i) M_i + h_i M_{i+1} = 6 (d_i - d_{i-1}).
  const std::size_t k = n - 2;
  std::vector<double> diag(k), upper(k), rhs(k);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = x_[i] - x_[i - 1], h1 = x_[i + 1] - x_[i];
    diag[i - 1] = 2.0 * (h0 + h1);
    upper[i - 1] = h1;
    rhs[i - 1] = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
  }
  for (std::size_t i = 1; i < k; ++i) {
    const double lower = x_[i + 1] - x_[i];  // h_i multiplies M_{i} in row i+1
    const double w = lower / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  m_[k] = rhs[k - 1] / diag[k - 1];
  for (std::size_t i = k - 1; i-- > 0;) m_[i + 1] = (rhs[i] - upper[i] * m_[i + 2]) / diag[i];
}

std::size_t CubicSpline::segment(double x) const {
  const auto it = std::upper_bound(x_.begin(), x_.end(), x);
  const std::size_t idx = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - x_.begin(), 1));
  return std::min(idx, x_.size() - 1) - 1;
}

double CubicSpline::on_segment(std::size_t i, double x, int order) const {
  const double h = x_[i + 1] - x_[i];
  const double a = x_[i + 1] - x, b = x - x_[i];
  switch (order) {
    case 0:
      return m_[i] * a * a * a / (6.0 * h) + m_[i + 1] * b * b * b / (6.0 * h) +
             (y_[i] / h - m_[i] * h / 6.0) * a + (y_[i + 1] / h - m_[i + 1] * h / 6.0) * b;
    case 1:
      return -m_[i] * a * a / (2.0 * h) + m_[i + 1] * b * b / (2.0 * h) +
             (y_[i + 1] - y_[i]) / h - (m_[i + 1] - m_[i]) * h / 6.0;
    default:
      return (m_[i] * a + m_[i + 1] * b) / h;
  }
}

double CubicSpline::operator()(double x) const { return on_segment(segment(x), x, 0); }

double CubicSpline::derivative(double x) const { return on_segment(segment(x), x, 1); }

double CubicSpline::second_derivative(double x) const {
  return on_segment(segment(x), x, 2);
}

double CubicSpline::derivative_left(std::size_t knot) const {
  return on_segment(knot == 0 ? 0 : knot - 1, x_[knot], 1);
}

double CubicSpline::derivative_right(std::size_t knot) const {
  return on_segment(std::min(knot, x_.size() - 2), x_[knot], 1);
}

double CubicSpline::second_derivative_left(std::size_t knot) const {
  return on_segment(knot == 0 ? 0 : knot - 1, x_[knot], 2);
}

double CubicSpline::second_derivative_right(std::size_t knot) const {
  return on_segment(std::min(knot, x_.size() - 2), x_[knot], 2);
}

CubicSpline fit_trajectory_spline(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DegenerateInput("spline needs matching x and y");
  return CubicSpline({x.begin(), x.end()}, {y.begin(), y.end()});
}

CubicSpline fit_trajectory_spline(std::span<const Point2> points) {
  std::vector<double> x, y;
  for (const auto& p : points) {
    x.push_back(p.x);
    y.push_back(p.y);
  }
  return CubicSpline(std::move(x), std::move(y));
}

CubicSpline fit_trajectory_spline(std::span<const CurvilinearPoint> points) {
  std::vector<double> x, y;
  for (const auto& p : points) {
    x.push_back(p.s);
    y.push_back(p.n);
  }
  return CubicSpline(std::move(x), std::move(y));
}

}  // namespace trajrl::geometry
