#pragma once

#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

namespace bilip {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
inline Point2 operator*(Point2 a, double s) { return {s * a.x, s * a.y}; }
inline bool operator==(Point2 a, Point2 b) { return a.x == b.x && a.y == b.y; }
inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double dist(Point2 a, Point2 b) { return norm(a - b); }
inline Point2 lerp(Point2 a, Point2 b, double t) {
  return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
}
inline bool finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

struct Mat2 {
  double a11 = 0.0, a12 = 0.0, a21 = 0.0, a22 = 0.0;

  static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  static Mat2 rotation(double theta) {
    double c = std::cos(theta), s = std::sin(theta);
    return {c, -s, s, c};
  }
  double det() const { return a11 * a22 - a12 * a21; }
  Mat2 transpose() const { return {a11, a21, a12, a22}; }
  /// throws std::domain_error when singular
  Mat2 inverse() const;
};

inline Mat2 operator*(const Mat2& a, const Mat2& b) {
  return {a.a11 * b.a11 + a.a12 * b.a21, a.a11 * b.a12 + a.a12 * b.a22,
          a.a21 * b.a11 + a.a22 * b.a21, a.a21 * b.a12 + a.a22 * b.a22};
}
inline Point2 operator*(const Mat2& m, Point2 v) {
  return {m.a11 * v.x + m.a12 * v.y, m.a21 * v.x + m.a22 * v.y};
}
inline Mat2 operator+(const Mat2& a, const Mat2& b) {
  return {a.a11 + b.a11, a.a12 + b.a12, a.a21 + b.a21, a.a22 + b.a22};
}
inline Mat2 operator-(const Mat2& a, const Mat2& b) {
  return {a.a11 - b.a11, a.a12 - b.a12, a.a21 - b.a21, a.a22 - b.a22};
}
inline Mat2 operator*(double s, const Mat2& a) {
  return {s * a.a11, s * a.a12, s * a.a21, s * a.a22};
}
inline bool operator==(const Mat2& a, const Mat2& b) {
  return a.a11 == b.a11 && a.a12 == b.a12 && a.a21 == b.a21 && a.a22 == b.a22;
}

struct SingularValues {
  double max = 0.0;
  double min = 0.0;
};

/// Closed-form 2x2 singular values.
SingularValues singular_values(const Mat2& m);
double op_norm(const Mat2& m);
bool in_L_class(const Mat2& m, double L);
/// max(sigma_max, 1/sigma_min); infinity when singular.
double bilip_constant(const Mat2& m);

struct Square {
  Point2 center;
  double side = 0.0;

  Point2 lo() const { return {center.x - 0.5 * side, center.y - 0.5 * side}; }
  Point2 hi() const { return {center.x + 0.5 * side, center.y + 0.5 * side}; }
  /// corners counterclockwise from the south-west one
  std::array<Point2, 4> corners() const;
};

struct Triangle {
  Point2 v0, v1, v2;
};

double signed_area(const Triangle& t);
double signed_area(Point2 a, Point2 b, Point2 c);

struct Polygon {
  std::vector<Point2> vertices;
};

double polygon_signed_area(const Polygon& p);
bool polygon_is_simple(const Polygon& p);
/// closed containment with absolute tolerance tol on the boundary distance
bool point_in_polygon(const Polygon& p, Point2 z, double tol = 0.0);
double distance_to_boundary(const Polygon& p, Point2 z);
double segment_distance(Point2 p, Point2 a, Point2 b);

struct Triangulation {
  std::vector<Point2> vertices;
  std::vector<std::array<int, 3>> triangles;
};

bool validate_triangulation(const Triangulation& t);

struct Cell {
  std::int64_t i = 0;
  std::int64_t j = 0;
  auto operator<=>(const Cell&) const = default;
};

struct RightPolygon {
  double r = 0.0;
  Point2 origin;
  std::vector<Cell> cells;  // sorted, unique

  void normalize();
  bool contains(Cell c) const;
  Square square(Cell c) const;
  double area() const { return static_cast<double>(cells.size()) * r * r; }
};

/// Grid point origin + unit * (X, Y); the single place lattice coordinates become reals.
inline Point2 lattice_point(Point2 origin, double unit, std::int64_t X, std::int64_t Y) {
  return {origin.x + static_cast<double>(X) * unit, origin.y + static_cast<double>(Y) * unit};
}

struct BBox {
  Point2 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  Point2 hi{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  void add(Point2 p) {
    lo.x = std::min(lo.x, p.x);
    lo.y = std::min(lo.y, p.y);
    hi.x = std::max(hi.x, p.x);
    hi.y = std::max(hi.y, p.y);
  }
  double diameter() const { return dist(lo, hi); }
  bool empty() const { return lo.x > hi.x; }
};

// ---- exact predicates on a snapped integer lattice ----

struct I2 {
  std::int64_t x = 0;
  std::int64_t y = 0;
  auto operator<=>(const I2&) const = default;
};

class Snapper {
 public:
  /// Lattice quantum is the power of two nearest below 2^-40 * diameter of box.
  explicit Snapper(const BBox& box);
  I2 snap(Point2 p) const;
  double quantum() const { return q_; }

 private:
  Point2 origin_;
  double q_ = 1.0;
  double inv_q_ = 1.0;
};

int orient(I2 a, I2 b, I2 c);
bool on_segment(I2 p, I2 a, I2 b);
bool segments_intersect(I2 a, I2 b, I2 c, I2 d);
bool proper_crossing(I2 a, I2 b, I2 c, I2 d);
bool point_in_triangle(I2 p, I2 a, I2 b, I2 c);

/// Closed-triangle pair check: their intersection must be exactly the convex hull
/// of the vertices flagged as shared (shared[k] = index in b of a[k] or -1).
bool triangle_pair_ok(const std::array<I2, 3>& a, const std::array<I2, 3>& b,
                      const std::array<int, 3>& shared);

/// Uniform-grid broad phase over integer boxes; fn(i, j) with i < j is called once
/// for each pair whose boxes overlap. Returning false from fn stops the scan.
struct IBox {
  std::int64_t x0, y0, x1, y1;
};
void for_each_overlapping_pair(const std::vector<IBox>& boxes,
                               const std::function<bool(std::size_t, std::size_t)>& fn);

}  // namespace bilip
