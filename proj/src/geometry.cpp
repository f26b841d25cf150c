#include "bilip/geometry.hpp"

#include <algorithm>
#include <stdexcept>

namespace bilip {

Mat2 Mat2::inverse() const {
  double d = det();
  if (d == 0.0 || !std::isfinite(d)) throw std::domain_error("singular matrix");
  return {a22 / d, -a12 / d, -a21 / d, a11 / d};
}

SingularValues singular_values(const Mat2& m) {
  double e = 0.5 * (m.a11 + m.a22), f = 0.5 * (m.a11 - m.a22);
  double g = 0.5 * (m.a21 + m.a12), h = 0.5 * (m.a21 - m.a12);
  double q = std::hypot(e, h), r = std::hypot(f, g);
  return {q + r, std::abs(q - r)};
}

double op_norm(const Mat2& m) { return singular_values(m).max; }

bool in_L_class(const Mat2& m, double L) {
  if (!(m.det() > 0.0)) return false;
  SingularValues s = singular_values(m);
  return s.max <= L && s.min * L >= 1.0;
}

double bilip_constant(const Mat2& m) {
  SingularValues s = singular_values(m);
  if (s.min == 0.0) return std::numeric_limits<double>::infinity();
  return std::max(s.max, 1.0 / s.min);
}

std::array<Point2, 4> Square::corners() const {
  Point2 a = lo(), b = hi();
  return {Point2{a.x, a.y}, Point2{b.x, a.y}, Point2{b.x, b.y}, Point2{a.x, b.y}};
}

double signed_area(Point2 a, Point2 b, Point2 c) { return 0.5 * cross(b - a, c - a); }
double signed_area(const Triangle& t) { return signed_area(t.v0, t.v1, t.v2); }

double polygon_signed_area(const Polygon& p) {
  double s = 0.0;
  std::size_t n = p.vertices.size();
  for (std::size_t i = 0; i < n; ++i) s += cross(p.vertices[i], p.vertices[(i + 1) % n]);
  return 0.5 * s;
}

double segment_distance(Point2 p, Point2 a, Point2 b) {
  Point2 d = b - a;
  double l2 = dot(d, d);
  double t = l2 > 0.0 ? std::clamp(dot(p - a, d) / l2, 0.0, 1.0) : 0.0;
  return dist(p, a + t * d);
}

double distance_to_boundary(const Polygon& p, Point2 z) {
  double best = std::numeric_limits<double>::infinity();
  std::size_t n = p.vertices.size();
  for (std::size_t i = 0; i < n; ++i)
    best = std::min(best, segment_distance(z, p.vertices[i], p.vertices[(i + 1) % n]));
  return best;
}

bool point_in_polygon(const Polygon& p, Point2 z, double tol) {
  std::size_t n = p.vertices.size();
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    Point2 a = p.vertices[i], b = p.vertices[j];
    if (segment_distance(z, a, b) <= tol) return true;
    if ((a.y > z.y) != (b.y > z.y)) {
      double x = a.x + (z.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (z.x < x) inside = !inside;
    }
  }
  return inside;
}

// ---- snapping and predicates ----

Snapper::Snapper(const BBox& box) {
  double diam = box.empty() ? 0.0 : box.diameter();
  double scale = diam > 0.0 ? diam : 1.0;
  int e = 0;
  std::frexp(scale, &e);  // scale in [2^(e-1), 2^e)
  q_ = std::ldexp(1.0, e - 1 - 40);
  inv_q_ = 1.0 / q_;
  origin_ = box.empty() ? Point2{} : box.lo;
}

I2 Snapper::snap(Point2 p) const {
  double x = (p.x - origin_.x) * inv_q_, y = (p.y - origin_.y) * inv_q_;
  constexpr double lim = 4.6e18 / 4.0;
  if (!(std::abs(x) < lim && std::abs(y) < lim)) throw std::range_error("point outside snapping range");
  return {std::llround(x), std::llround(y)};
}

int orient(I2 a, I2 b, I2 c) {
  __int128 d = static_cast<__int128>(b.x - a.x) * (c.y - a.y) -
               static_cast<__int128>(b.y - a.y) * (c.x - a.x);
  return d > 0 ? 1 : (d < 0 ? -1 : 0);
}

bool on_segment(I2 p, I2 a, I2 b) {
  if (orient(a, b, p) != 0) return false;
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

bool proper_crossing(I2 a, I2 b, I2 c, I2 d) {
  int o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a), o4 = orient(c, d, b);
  return o1 * o2 < 0 && o3 * o4 < 0;
}

bool segments_intersect(I2 a, I2 b, I2 c, I2 d) {
  if (proper_crossing(a, b, c, d)) return true;
  return on_segment(c, a, b) || on_segment(d, a, b) || on_segment(a, c, d) || on_segment(b, c, d);
}

bool point_in_triangle(I2 p, I2 a, I2 b, I2 c) {
  int s = orient(a, b, c);
  if (s == 0) return on_segment(p, a, b) || on_segment(p, b, c) || on_segment(p, c, a);
  return orient(a, b, p) * s >= 0 && orient(b, c, p) * s >= 0 && orient(c, a, p) * s >= 0;
}

bool triangle_pair_ok(const std::array<I2, 3>& a, const std::array<I2, 3>& b,
                      const std::array<int, 3>& shared) {
  std::vector<I2> S;
  bool b_shared[3] = {false, false, false};
  for (int k = 0; k < 3; ++k)
    if (shared[k] >= 0) {
      S.push_back(a[k]);
      b_shared[shared[k]] = true;
    }
  if (S.size() == 3) return false;
  auto in_hull = [&](I2 p) {
    if (S.empty()) return false;
    if (S.size() == 1) return p == S[0];
    return on_segment(p, S[0], S[1]);
  };
  if (S.size() == 2) {
    I2 ca{}, cb{};
    for (int k = 0; k < 3; ++k) {
      if (shared[k] < 0) ca = a[k];
      if (!b_shared[k]) cb = b[k];
    }
    if (orient(S[0], S[1], ca) * orient(S[0], S[1], cb) > 0) return false;
  }
  for (int i = 0; i < 3; ++i) {
    I2 p = a[i], q = a[(i + 1) % 3];
    for (int j = 0; j < 3; ++j) {
      I2 r = b[j], s = b[(j + 1) % 3];
      if (proper_crossing(p, q, r, s)) return false;
      for (I2 x : {p, q})
        if (on_segment(x, r, s) && !in_hull(x)) return false;
      for (I2 x : {r, s})
        if (on_segment(x, p, q) && !in_hull(x)) return false;
    }
  }
  for (int k = 0; k < 3; ++k) {
    if (shared[k] < 0 && point_in_triangle(a[k], b[0], b[1], b[2])) return false;
    if (!b_shared[k] && point_in_triangle(b[k], a[0], a[1], a[2])) return false;
  }
  return true;
}

void for_each_overlapping_pair(const std::vector<IBox>& boxes,
                               const std::function<bool(std::size_t, std::size_t)>& fn) {
  std::size_t n = boxes.size();
  if (n < 2) return;
  std::int64_t X0 = boxes[0].x0, Y0 = boxes[0].y0, X1 = boxes[0].x1, Y1 = boxes[0].y1;
  for (const IBox& b : boxes) {
    X0 = std::min(X0, b.x0);
    Y0 = std::min(Y0, b.y0);
    X1 = std::max(X1, b.x1);
    Y1 = std::max(Y1, b.y1);
  }
  std::int64_t g = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::sqrt(static_cast<double>(n))), 1, 2048);
  std::int64_t cw = std::max<std::int64_t>(1, (X1 - X0) / g + 1);
  std::int64_t ch = std::max<std::int64_t>(1, (Y1 - Y0) / g + 1);
  auto cx = [&](std::int64_t x) { return (x - X0) / cw; };
  auto cy = [&](std::int64_t y) { return (y - Y0) / ch; };
  std::vector<std::vector<std::size_t>> cells(static_cast<std::size_t>(g * g));
  for (std::size_t i = 0; i < n; ++i) {
    const IBox& b = boxes[i];
    for (std::int64_t u = cx(b.x0); u <= cx(b.x1); ++u)
      for (std::int64_t v = cy(b.y0); v <= cy(b.y1); ++v) cells[static_cast<std::size_t>(v * g + u)].push_back(i);
  }
  for (std::int64_t v = 0; v < g; ++v)
    for (std::int64_t u = 0; u < g; ++u) {
      const auto& c = cells[static_cast<std::size_t>(v * g + u)];
      for (std::size_t s = 0; s < c.size(); ++s)
        for (std::size_t t = s + 1; t < c.size(); ++t) {
          const IBox& a = boxes[c[s]];
          const IBox& b = boxes[c[t]];
          if (a.x1 < b.x0 || b.x1 < a.x0 || a.y1 < b.y0 || b.y1 < a.y0) continue;
          // report only from the first cell both boxes share
          if (u != std::max(cx(a.x0), cx(b.x0)) || v != std::max(cy(a.y0), cy(b.y0))) continue;
          std::size_t i = std::min(c[s], c[t]), j = std::max(c[s], c[t]);
          if (!fn(i, j)) return;
        }
    }
}

bool polygon_is_simple(const Polygon& p) {
  std::size_t n = p.vertices.size();
  if (n < 3) return false;
  BBox box;
  for (Point2 v : p.vertices) box.add(v);
  Snapper sn(box);
  std::vector<I2> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = sn.snap(p.vertices[i]);
  for (std::size_t i = 0; i < n; ++i)
    if (v[i] == v[(i + 1) % n]) return false;
  std::vector<IBox> boxes(n);
  for (std::size_t i = 0; i < n; ++i) {
    I2 a = v[i], b = v[(i + 1) % n];
    boxes[i] = {std::min(a.x, b.x), std::min(a.y, b.y), std::max(a.x, b.x), std::max(a.y, b.y)};
  }
  bool ok = true;
  for_each_overlapping_pair(boxes, [&](std::size_t i, std::size_t j) {
    I2 a = v[i], b = v[(i + 1) % n], c = v[j], d = v[(j + 1) % n];
    bool next = (j == i + 1), wrap = (i == 0 && j == n - 1);
    if (next || wrap) {
      // shared vertex s; the two other endpoints must not fold back along the same line
      I2 s = next ? b : a, x = next ? a : b, y = next ? d : c;
      __int128 dx = static_cast<__int128>(x.x - s.x) * (y.x - s.x) + static_cast<__int128>(x.y - s.y) * (y.y - s.y);
      if (orient(x, s, y) == 0 && dx > 0) ok = false;
      return ok;
    }
    if (segments_intersect(a, b, c, d)) ok = false;
    return ok;
  });
  return ok;
}

bool validate_triangulation(const Triangulation& t) {
  std::size_t nv = t.vertices.size(), nt = t.triangles.size();
  BBox box;
  for (Point2 p : t.vertices) {
    if (!finite(p)) return false;
    box.add(p);
  }
  Snapper sn(box);
  std::vector<I2> v(nv);
  for (std::size_t i = 0; i < nv; ++i) v[i] = sn.snap(t.vertices[i]);
  std::vector<IBox> boxes(nt);
  for (std::size_t k = 0; k < nt; ++k) {
    const auto& tr = t.triangles[k];
    for (int idx : tr)
      if (idx < 0 || static_cast<std::size_t>(idx) >= nv) return false;
    I2 a = v[tr[0]], b = v[tr[1]], c = v[tr[2]];
    if (orient(a, b, c) == 0) return false;
    boxes[k] = {std::min({a.x, b.x, c.x}), std::min({a.y, b.y, c.y}), std::max({a.x, b.x, c.x}),
                std::max({a.y, b.y, c.y})};
  }
  bool ok = true;
  for_each_overlapping_pair(boxes, [&](std::size_t i, std::size_t j) {
    std::array<I2, 3> a{v[t.triangles[i][0]], v[t.triangles[i][1]], v[t.triangles[i][2]]};
    std::array<I2, 3> b{v[t.triangles[j][0]], v[t.triangles[j][1]], v[t.triangles[j][2]]};
    std::array<int, 3> shared{-1, -1, -1};
    for (int p = 0; p < 3; ++p)
      for (int q = 0; q < 3; ++q)
        if (a[p] == b[q]) shared[p] = q;
    ok = triangle_pair_ok(a, b, shared);
    return ok;
  });
  return ok;
}

void RightPolygon::normalize() {
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
}

bool RightPolygon::contains(Cell c) const { return std::binary_search(cells.begin(), cells.end(), c); }

Square RightPolygon::square(Cell c) const {
  Point2 lo = lattice_point(origin, r, c.i, c.j);
  Point2 hi = lattice_point(origin, r, c.i + 1, c.j + 1);
  return {{0.5 * (lo.x + hi.x), 0.5 * (lo.y + hi.y)}, r};
}

}  // namespace bilip
