#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "trajrl/errors.h"
#include "trajrl/geometry.h"

namespace {

using namespace trajrl::geometry;

RoadCurve gentle_cubic() {
  RoadCurve c;
  c.coeffs = {0.5, 0.05, 0.002, -5e-5};
  return c;
}

// Cumulative polyline length over `segments` equal steps in x.
struct Polyline {
  std::vector<double> x, s;

  Polyline(const RoadCurve& c, double x0, double x1, int segments) {
    x.resize(static_cast<std::size_t>(segments) + 1);
    s.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = x0 + (x1 - x0) * static_cast<double>(i) / segments;
    s[0] = 0;
    for (std::size_t i = 1; i < x.size(); ++i)
      s[i] = s[i - 1] + std::hypot(x[i] - x[i - 1], c.y(x[i]) - c.y(x[i - 1]));
  }
  // Length from x0 to the sample nearest to t.
  double length_to(double t) const {
    const double step = x[1] - x[0];
    const auto i = static_cast<std::size_t>(std::llround((t - x[0]) / step));
    return s[i];
  }
};

// Dense-sampling closest point: (s, n) of the nearest curve sample.
CurvilinearPoint dense_closest(const RoadCurve& c, const Polyline& line, Point2 p) {
  std::size_t best = 0;
  double best_d = INFINITY;
  for (std::size_t i = 0; i < line.x.size(); ++i) {
    const double dx = p.x - line.x[i], dy = p.y - c.y(line.x[i]);
    const double d = dx * dx + dy * dy;
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  const double t = line.x[best];
  const double tx = 1.0, ty = c.slope(t);
  const double cross = tx * (p.y - c.y(t)) - ty * (p.x - t);
  const double origin = line.length_to(c.x_origin);
  return {line.s[best] - origin, std::copysign(std::sqrt(best_d), cross)};
}

// Gaussian elimination with partial pivoting.
std::vector<double> solve_dense(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    std::swap(a[col], a[piv]);
    std::swap(b[col], b[piv]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t k = col; k < n; ++k) a[r][k] -= f * a[col][k];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
    x[i] = s / a[i][i];
  }
  return x;
}

TEST(FitRoadCurve, FlatSamplesGiveZeroCoefficients) {
  std::vector<Point2> pts{{0, 0}, {1, 0}, {2, 0}, {3, 0}, {5, 0}};
  const RoadCurve c = fit_road_curve(pts);
  for (double k : c.coeffs) EXPECT_NEAR(k, 0.0, 1e-12);
}

TEST(FitRoadCurve, LineIsRecoveredExactly) {
  std::vector<Point2> pts;
  for (double x : {-2.0, 0.0, 1.0, 4.0, 7.0}) pts.push_back({x, 1 + 2 * x});
  const RoadCurve c = fit_road_curve(pts);
  EXPECT_NEAR(c.coeffs[0], 1.0, 1e-10);
  EXPECT_NEAR(c.coeffs[1], 2.0, 1e-10);
  EXPECT_NEAR(c.coeffs[2], 0.0, 1e-10);
  EXPECT_NEAR(c.coeffs[3], 0.0, 1e-10);
}

TEST(FitRoadCurve, NoisyCubicMatchesNormalEquations) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(0.0, 0.3);
  std::vector<Point2> pts;
  for (int i = 0; i < 20; ++i) {
    const double x = -10 + i;
    pts.push_back({x, 0.01 * x * x * x + noise(rng)});
  }
  std::vector<std::vector<double>> ata(4, std::vector<double>(4, 0.0));
  std::vector<double> aty(4, 0.0);
  for (const auto& p : pts) {
    const double row[4] = {1, p.x, p.x * p.x, p.x * p.x * p.x};
    for (int i = 0; i < 4; ++i) {
      aty[i] += row[i] * p.y;
      for (int j = 0; j < 4; ++j) ata[i][j] += row[i] * row[j];
    }
  }
  const std::vector<double> want = solve_dense(ata, aty);
  const RoadCurve c = fit_road_curve(pts);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(c.coeffs[i], want[i], 1e-8 * (1 + std::abs(want[i])));
}

TEST(FitRoadCurve, TooFewDistinctAbscissaeThrow) {
  std::vector<Point2> pts{{0, 0}, {1, 1}, {1, 2}, {2, 0}};
  EXPECT_THROW(fit_road_curve(pts), trajrl::DegenerateInput);
}

TEST(Curvilinear, StraightRoadIsIdentity) {
  RoadCurve c;
  const CurvilinearPoint q = cartesian_to_curvilinear(c, {5, 2});
  EXPECT_NEAR(q.s, 5.0, 1e-9);
  EXPECT_NEAR(q.n, 2.0, 1e-9);
  const Point2 p = curvilinear_to_cartesian(c, {5, 2});
  EXPECT_NEAR(p.x, 5.0, 1e-9);
  EXPECT_NEAR(p.y, 2.0, 1e-9);
  const Point2 o = curvilinear_to_cartesian(c, {0, 0});
  EXPECT_NEAR(o.x, 0.0, 1e-12);
  EXPECT_NEAR(o.y, 0.0, 1e-12);
}

TEST(Curvilinear, CenterlinePointHasZeroOffset) {
  const RoadCurve c = gentle_cubic();
  EXPECT_NEAR(cartesian_to_curvilinear(c, c.point(12.0)).n, 0.0, 1e-9);
}

TEST(Curvilinear, FarPointIsOffCorridor) {
  RoadCurve c;
  EXPECT_THROW(cartesian_to_curvilinear(c, {3, 100}), trajrl::OffCorridor);
}

TEST(Curvilinear, ClosestPointMatchesDenseSampling) {
  const RoadCurve c = gentle_cubic();
  const Polyline line(c, -5.0, 60.0, 1'000'000);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ux(2.0, 50.0), un(-4.0, 4.0);
  for (int k = 0; k < 10; ++k) {
    const double x = ux(rng);
    const Point2 n = c.normal(x);
    const double off = un(rng);
    const Point2 p{x + off * n.x + 0.3, c.y(x) + off * n.y};
    const CurvilinearPoint got = cartesian_to_curvilinear(c, p);
    const CurvilinearPoint want = dense_closest(c, line, p);
    EXPECT_NEAR(got.s, want.s, 1e-3);
    EXPECT_NEAR(got.n, want.n, 1e-3);
  }
}

TEST(Curvilinear, RoundTripOnCorridor) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  for (int road = 0; road < 3; ++road) {
    RoadCurve c;
    c.coeffs = {coef(rng), 0.1 * coef(rng), 0.002 * coef(rng), 4e-5 * coef(rng)};
    std::uniform_real_distribution<double> us(0.0, 50.0), un(-c.road_half_width(), c.road_half_width());
    double worst = 0;
    for (int k = 0; k < 1000; ++k) {
      const CurvilinearPoint q{us(rng), un(rng)};
      const Point2 p = curvilinear_to_cartesian(c, q);
      const CurvilinearPoint back = cartesian_to_curvilinear(c, p);
      const Point2 again = curvilinear_to_cartesian(c, back);
      worst = std::max({worst, std::abs(back.s - q.s), std::abs(back.n - q.n),
                        std::hypot(again.x - p.x, again.y - p.y)});
    }
    EXPECT_LT(worst, 1e-6);
  }
}

TEST(Cell, DivisionAndInverse) {
  RoadCurve c;
  c.layer_spacing = 10;
  c.lane_width = 3.5;
  const CellPoint cell = curvilinear_to_cell({20, 1.75}, c);
  EXPECT_DOUBLE_EQ(cell.layer, 2.0);
  EXPECT_DOUBLE_EQ(cell.lane_offset, 0.5);
  const CurvilinearPoint q = cell_to_curvilinear({2.0, 0.5}, c);
  EXPECT_DOUBLE_EQ(q.s, 20.0);
  EXPECT_DOUBLE_EQ(q.n, 1.75);
  const CellPoint zero = curvilinear_to_cell({0, 0}, c);
  EXPECT_EQ(zero.layer, 0.0);
  EXPECT_EQ(zero.lane_offset, 0.0);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-50, 50);
  for (int k = 0; k < 100; ++k) {
    const CurvilinearPoint r{u(rng), u(rng)};
    const CurvilinearPoint back = cell_to_curvilinear(curvilinear_to_cell(r, c), c);
    EXPECT_NEAR(back.s, r.s, 1e-12 * std::abs(r.s));
    EXPECT_NEAR(back.n, r.n, 1e-12 * std::abs(r.n));
  }
}

TEST(ArcLength, StraightRoadParameterEqualsDistance) {
  RoadCurve c;
  EXPECT_NEAR(arc_length_advance(c, 7.5), 7.5, 1e-9);
  EXPECT_NEAR(arc_length_advance(c, 0.0), 0.0, 1e-12);
}

TEST(ArcLength, CubicMatchesPolyline) {
  const RoadCurve c = gentle_cubic();
  const Polyline line(c, 0.0, 60.0, 1'000'000);
  for (double t : {5.0, 23.7, 41.0, 60.0}) EXPECT_NEAR(arc_length(c, 0.0, t), line.length_to(t), 1e-4);
  for (double s : {3.0, 17.5, 44.0}) {
    const double t = arc_length_advance(c, s);
    EXPECT_NEAR(line.length_to(t), s, 1e-4);
  }
}

TEST(LayerSpacing, GrowsWithSpeed) {
  EXPECT_DOUBLE_EQ(layer_spacing_for_speed(0.0), 5.0);
  EXPECT_DOUBLE_EQ(layer_spacing_for_speed(12.0), 12.0);
}

TEST(Spline, TwoPointsIsStraight) {
  const std::vector<double> x{0, 2}, y{1, 5};
  const CubicSpline s = fit_trajectory_spline(x, y);
  for (double t : {0.0, 0.5, 1.3, 2.0}) {
    EXPECT_NEAR(s(t), 1 + 2 * t, 1e-12);
    EXPECT_NEAR(s.second_derivative(t), 0.0, 1e-12);
  }
}

TEST(Spline, CollinearPointsHaveZeroCurvature) {
  const std::vector<double> x{0, 1, 2.5, 4, 7}, y{3, 1, -2, -5, -11};
  const CubicSpline s = fit_trajectory_spline(x, y);
  for (double m : s.moments()) EXPECT_NEAR(m, 0.0, 1e-12);
}

TEST(Spline, RandomPointsMatchDenseSystem) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> gap(0.3, 2.0), val(-3, 3);
  std::vector<double> x{0}, y{val(rng)};
  for (int i = 0; i < 4; ++i) {
    x.push_back(x.back() + gap(rng));
    y.push_back(val(rng));
  }
  const CubicSpline s = fit_trajectory_spline(x, y);
  // Natural-spline moment equations as one dense system.
  const int n = static_cast<int>(x.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  a(0, 0) = 1;
  a(n - 1, n - 1) = 1;
  for (int i = 1; i + 1 < n; ++i) {
    const double h0 = x[i] - x[i - 1], h1 = x[i + 1] - x[i];
    a(i, i - 1) = h0;
    a(i, i) = 2 * (h0 + h1);
    a(i, i + 1) = h1;
    b(i) = 6 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
  }
  const Eigen::VectorXd m = a.fullPivLu().solve(b);
  for (int i = 0; i < n; ++i) {
    EXPECT_NEAR(s.moments()[i], m(i), 1e-9);
    EXPECT_NEAR(s(x[i]), y[i], 1e-12);
    EXPECT_NEAR(s.second_derivative_left(i), s.second_derivative_right(i), 1e-9);
    EXPECT_NEAR(s.derivative_left(i), s.derivative_right(i), 1e-9);
  }
}

TEST(Spline, DuplicateAbscissaThrows) {
  const std::vector<double> x{0, 1, 1, 2}, y{0, 1, 2, 3};
  EXPECT_THROW(fit_trajectory_spline(x, y), trajrl::DegenerateInput);
  const std::vector<double> one{0}, v{1};
  EXPECT_THROW(fit_trajectory_spline(one, v), trajrl::DegenerateInput);
}

}  // namespace
