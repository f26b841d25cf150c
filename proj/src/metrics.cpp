#include "bilip/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "bilip/format.hpp"
#include "bilip/parallel.hpp"

namespace bilip {

PointLocator::PointLocator(const std::vector<Point2>& vertices, const std::vector<std::array<int, 3>>& triangles)
    : v_(&vertices), t_(&triangles) {
  for (Point2 p : vertices) box_.add(p);
  if (box_.empty() || triangles.empty()) return;
  double w = std::max(box_.hi.x - box_.lo.x, 1e-300), h = std::max(box_.hi.y - box_.lo.y, 1e-300);
  double target = 2.0 * triangles.size();
  gx_ = std::clamp(static_cast<int>(std::ceil(std::sqrt(target * w / h))), 1, 1 << 14);
  gy_ = std::clamp(static_cast<int>(std::ceil(target / gx_)), 1, 1 << 14);
  cw_ = w / gx_;
  ch_ = h / gy_;
  buckets_.assign(static_cast<std::size_t>(gx_) * gy_, {});
  for (std::size_t k = 0; k < triangles.size(); ++k) {
    const auto& t = triangles[k];
    BBox b;
    for (int i : t) b.add(vertices[i]);
    int x0 = std::clamp(static_cast<int>((b.lo.x - box_.lo.x) / cw_), 0, gx_ - 1);
    int x1 = std::clamp(static_cast<int>((b.hi.x - box_.lo.x) / cw_), 0, gx_ - 1);
    int y0 = std::clamp(static_cast<int>((b.lo.y - box_.lo.y) / ch_), 0, gy_ - 1);
    int y1 = std::clamp(static_cast<int>((b.hi.y - box_.lo.y) / ch_), 0, gy_ - 1);
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) buckets_[static_cast<std::size_t>(y) * gx_ + x].push_back(static_cast<int>(k));
  }
}

int PointLocator::locate(Point2 z, std::array<double, 3>* bary) const {
  if (buckets_.empty()) return -1;
  double tol = 1e-12;
  double mx = (box_.hi.x - box_.lo.x) * tol, my = (box_.hi.y - box_.lo.y) * tol;
  if (z.x < box_.lo.x - mx || z.x > box_.hi.x + mx || z.y < box_.lo.y - my || z.y > box_.hi.y + my) return -1;
  int x = std::clamp(static_cast<int>((z.x - box_.lo.x) / cw_), 0, gx_ - 1);
  int y = std::clamp(static_cast<int>((z.y - box_.lo.y) / ch_), 0, gy_ - 1);
  int best = -1;
  double best_min = -tol;
  std::array<double, 3> best_b{};
  for (int k : buckets_[static_cast<std::size_t>(y) * gx_ + x]) {
    const auto& t = (*t_)[k];
    Point2 a = (*v_)[t[0]], b = (*v_)[t[1]], c = (*v_)[t[2]];
    double d = cross(b - a, c - a);
    if (d == 0.0) continue;
    double l1 = cross(z - a, c - a) / d;
    double l2 = cross(b - a, z - a) / d;
    std::array<double, 3> l{1.0 - l1 - l2, l1, l2};
    double mn = std::min({l[0], l[1], l[2]});
    if (mn >= best_min) {
      if (best >= 0 && mn == best_min) continue;
      best = k;
      best_min = mn;
      best_b = l;
    }
  }
  if (best >= 0 && bary) *bary = best_b;
  return best;
}

PAEvaluator::PAEvaluator(const PAMap& m)
    : m_(m), dom_(m.domain.vertices, m.domain.triangles), img_(m.image, m.domain.triangles) {}

Point2 PAEvaluator::eval(Point2 z) const {
  std::array<double, 3> l;
  int t = dom_.locate(z, &l);
  if (t < 0) throw std::domain_error("point outside the mesh domain");
  const auto& k = m_.domain.triangles[t];
  return l[0] * m_.image[k[0]] + l[1] * m_.image[k[1]] + l[2] * m_.image[k[2]];
}

Point2 PAEvaluator::invert(Point2 w) const {
  std::array<double, 3> l;
  int t = img_.locate(w, &l);
  if (t < 0) throw std::domain_error("point outside the mesh image");
  const auto& k = m_.domain.triangles[t];
  const auto& v = m_.domain.vertices;
  return l[0] * v[k[0]] + l[1] * v[k[1]] + l[2] * v[k[2]];
}

Point2 pa_eval(const PAMap& m, Point2 z) { return PAEvaluator(m).eval(z); }
Point2 pa_invert(const PAMap& m, Point2 w) { return PAEvaluator(m).invert(w); }

namespace {

std::vector<I2> snapped_image(const PAMap& m) {
  BBox b;
  for (Point2 p : m.image) b.add(p);
  Snapper sn(b);
  std::vector<I2> q(m.image.size());
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = sn.snap(m.image[i]);
  return q;
}

}  // namespace

bool brute_force_injective(const PAMap& m) {
  std::vector<I2> q = snapped_image(m);
  const auto& T = m.domain.triangles;
  for (const auto& t : T)
    if (orient(q[t[0]], q[t[1]], q[t[2]]) <= 0) return false;
  for (std::size_t i = 0; i < T.size(); ++i)
    for (std::size_t j = i + 1; j < T.size(); ++j) {
      std::array<int, 3> shared{-1, -1, -1};
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
          if (T[i][a] == T[j][b]) shared[a] = b;
      std::array<I2, 3> A{q[T[i][0]], q[T[i][1]], q[T[i][2]]};
      std::array<I2, 3> B{q[T[j][0]], q[T[j][1]], q[T[j][2]]};
      if (!triangle_pair_ok(A, B, shared)) return false;
    }
  return true;
}

InjectivityReport check_injective(const PAMap& m) {
  InjectivityReport rep;
  std::vector<I2> q = snapped_image(m);
  const auto& T = m.domain.triangles;
  rep.orientation_ok = true;
  for (std::size_t k = 0; k < T.size(); ++k)
    if (orient(q[T[k][0]], q[T[k][1]], q[T[k][2]]) <= 0) {
      rep.orientation_ok = false;
      rep.witness = "flipped_triangle";
      rep.triangle = static_cast<int>(k);
      break;
    }
  bool simple = true;
  if (rep.orientation_ok) {
    // boundary edges are the directed edges without a reversed twin
    std::map<std::pair<int, int>, int> directed;
    for (const auto& t : T)
      for (int k = 0; k < 3; ++k) ++directed[{t[k], t[(k + 1) % 3]}];
    std::vector<std::array<int, 2>> edges;
    for (const auto& [e, c] : directed)
      if (!directed.count({e.second, e.first})) edges.push_back({e.first, e.second});
    std::vector<IBox> boxes;
    for (const auto& e : edges) {
      I2 a = q[e[0]], b = q[e[1]];
      boxes.push_back({std::min(a.x, b.x), std::min(a.y, b.y), std::max(a.x, b.x), std::max(a.y, b.y)});
    }
    for_each_overlapping_pair(boxes, [&](std::size_t i, std::size_t j) {
      const auto& e = edges[i];
      const auto& f = edges[j];
      int shared = -1, n = 0;
      for (int x : e)
        for (int y : f)
          if (x == y) shared = x, ++n;
      bool bad;
      if (n == 0) {
        bad = segments_intersect(q[e[0]], q[e[1]], q[f[0]], q[f[1]]);
      } else if (n == 1) {
        I2 s = q[shared];
        I2 x = q[e[0] == shared ? e[1] : e[0]];
        I2 y = q[f[0] == shared ? f[1] : f[0]];
        __int128 dp = static_cast<__int128>(x.x - s.x) * (y.x - s.x) + static_cast<__int128>(x.y - s.y) * (y.y - s.y);
        bad = orient(x, s, y) == 0 && dp > 0;
      } else {
        bad = false;  // the same undirected edge twice means a non-manifold domain
      }
      if (bad) {
        simple = false;
        rep.witness = "crossing_edges";
        rep.edge_a = e;
        rep.edge_b = f;
      }
      return !bad;
    });
  }
  rep.injective = rep.orientation_ok && simple;
  if (T.size() <= 200) {
    rep.brute_force_checked = true;
    if (brute_force_injective(m) != rep.injective)
      throw std::logic_error("injectivity certificate disagrees with the pairwise overlap test");
  }
  return rep;
}

double pa_bilip(const PAMap& m) {
  double best = 1.0;
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    double b = bilip_constant(m.gradient(t));
    if (!std::isfinite(b)) throw std::domain_error("degenerate triangle");
    best = std::max(best, b);
  }
  return best;
}

double linf_error(const MapOracle& o, const PAMap& m, int samples, bool inverse, const TriangleMask& mask) {
  if (samples < 1) throw std::invalid_argument("samples must be positive");
  int n = samples + 3;
  std::vector<std::pair<double, double>> nodes;
  for (int i = 0; i <= n; ++i)
    for (int j = 0; i + j <= n; ++j) nodes.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n});
  for (auto st : {std::pair{0.5, 0.0}, {0.0, 0.5}, {0.5, 0.5}}) nodes.push_back(st);
  std::vector<double> per(m.num_triangles(), 0.0);
  parallel_for(m.num_triangles(), [&](std::size_t k) {
    if (!mask.empty() && !mask[k]) return;
    Triangle d = m.domain_triangle(k), im = m.image_triangle(k);
    double best = 0.0;
    for (auto [s, t] : nodes) {
      Point2 z = d.v0 + s * (d.v1 - d.v0) + t * (d.v2 - d.v0);
      Point2 w = im.v0 + s * (im.v1 - im.v0) + t * (im.v2 - im.v0);
      double e = inverse ? dist(o.inverse_ext(w, &z), z) : dist(o.map(z), w);
      best = std::max(best, e);
    }
    per[k] = best;
  });
  double out = 0.0;
  for (double v : per) out = std::max(out, v);
  return out;
}

double w1p_error(const MapOracle& o, const PAMap& m, double p, int quad_n, bool inverse, const TriangleMask& mask) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw std::invalid_argument("p must lie in [1, inf)");
  if (quad_n < 1) throw std::invalid_argument("quad_n must be positive");
  int n = quad_n;
  std::vector<std::pair<double, double>> nodes;
  for (int i = 0; i < n; ++i)
    for (int j = 0; i + j < n; ++j) {
      nodes.push_back({(i + 1.0 / 3.0) / n, (j + 1.0 / 3.0) / n});
      if (i + j <= n - 2) nodes.push_back({(i + 2.0 / 3.0) / n, (j + 2.0 / 3.0) / n});
    }
  double wq = 1.0 / (static_cast<double>(n) * n);
  std::vector<double> per(m.num_triangles(), 0.0);
  parallel_for(m.num_triangles(), [&](std::size_t k) {
    if (!mask.empty() && !mask[k]) return;
    Triangle d = m.domain_triangle(k), im = m.image_triangle(k);
    double area = std::abs(signed_area(d));
    Mat2 G = m.gradient(k);
    Mat2 Ginv = inverse ? G.inverse() : Mat2{};
    double jac = std::abs(G.det());
    double sum = 0.0;
    for (auto [s, t] : nodes) {
      Point2 z = d.v0 + s * (d.v1 - d.v0) + t * (d.v2 - d.v0);
      double e;
      if (inverse) {
        Point2 w = im.v0 + s * (im.v1 - im.v0) + t * (im.v2 - im.v0);
        Point2 x = o.inverse_ext(w, &z);
        e = std::pow(op_norm(o.jacobian(x).inverse() - Ginv), p) * jac;
      } else {
        e = std::pow(op_norm(o.jacobian(z) - G), p);
      }
      sum += e;
    }
    per[k] = sum * wq * area;
  });
  double total = 0.0;
  for (double v : per) total += v;
  return std::pow(total, 1.0 / p);
}

std::vector<std::pair<std::string, std::string>> report_fields(const ApproxReport& r) {
  auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  return {{"linf_map", num(r.linf_map)},
          {"linf_inv", num(r.linf_inv)},
          {"w1p_map", num(r.w1p_map)},
          {"w1p_inv", num(r.w1p_inv)},
          {"bilip_v", num(r.bilip_v)},
          {"area_deficit", num(r.area_deficit)},
          {"injective", b(r.injective)},
          {"orientation_ok", b(r.orientation_ok)},
          {"r", num(r.r)},
          {"eta", num(r.eta)},
          {"delta", num(r.delta)},
          {"eps_target", num(r.eps_target)}};
}

}  // namespace bilip
