#include "bilip/gridapprox.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>
#include <unordered_map>

#include "bilip/format.hpp"
#include "bilip/parallel.hpp"

namespace bilip {

namespace {

std::uint64_t key2(std::int64_t a, std::int64_t b) {
  return (static_cast<std::uint64_t>(a + (1LL << 31)) << 32) | static_cast<std::uint64_t>(b + (1LL << 31));
}

double seg_seg_distance(Point2 a, Point2 b, Point2 c, Point2 d) {
  double d1 = cross(b - a, c - a), d2 = cross(b - a, d - a), d3 = cross(d - c, a - c), d4 = cross(d - c, b - c);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return 0.0;
  return std::min({segment_distance(a, c, d), segment_distance(b, c, d), segment_distance(c, a, b),
                   segment_distance(d, a, b)});
}

double distance_to_domain_boundary(const Domain& d, Point2 a, Point2 b) {
  const auto& v = d.boundary().vertices;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v.size(); ++i) best = std::min(best, seg_seg_distance(a, b, v[i], v[(i + 1) % v.size()]));
  return best;
}

}  // namespace

GridQ build_grid(const Tiling& t, const Domain& omega) {
  GridQ g;
  g.r = t.r;
  std::unordered_map<std::uint64_t, int> vid;
  std::map<std::int64_t, std::vector<std::int64_t>> hlines, vlines;
  auto add_vertex = [&](std::int64_t X, std::int64_t Y) {
    auto [it, fresh] = vid.try_emplace(key2(X, Y), static_cast<int>(g.vertices.size()));
    if (fresh) {
      GridVertex v;
      v.X = X;
      v.Y = Y;
      v.z = t.point(X, Y);
      g.vertices.push_back(v);
      hlines[Y].push_back(X);
      vlines[X].push_back(Y);
    }
    return it->second;
  };
  for (const TileSquare& s : t.squares) {
    add_vertex(s.x, s.y);
    add_vertex(s.x + s.size, s.y);
    add_vertex(s.x + s.size, s.y + s.size);
    add_vertex(s.x, s.y + s.size);
  }
  for (auto& [k, v] : hlines) std::sort(v.begin(), v.end());
  for (auto& [k, v] : vlines) std::sort(v.begin(), v.end());

  std::unordered_map<std::uint64_t, int> sid;
  auto side_between = [&](int a, int b, int square) {
    int lo = std::min(a, b), hi = std::max(a, b);
    auto [it, fresh] = sid.try_emplace(key2(lo, hi), static_cast<int>(g.sides.size()));
    if (fresh) {
      GridSide s;
      const GridVertex& va = g.vertices[a];
      const GridVertex& vb = g.vertices[b];
      bool a_first = va.X < vb.X || (va.X == vb.X && va.Y < vb.Y);
      s.a = a_first ? a : b;
      s.b = a_first ? b : a;
      s.length = static_cast<double>(std::abs(va.X - vb.X) + std::abs(va.Y - vb.Y)) * t.unit;
      g.sides.push_back(s);
    }
    GridSide& s = g.sides[it->second];
    if (s.squares[0] < 0)
      s.squares[0] = square;
    else
      s.squares[1] = square;
    return it->second;
  };
  g.square_sides.resize(t.squares.size());
  for (std::size_t k = 0; k < t.squares.size(); ++k) {
    const TileSquare& s = t.squares[k];
    auto& out = g.square_sides[k];
    auto run = [&](const std::vector<std::int64_t>& line, std::int64_t from, std::int64_t to, bool horizontal,
                   std::int64_t fixed, bool forward) {
      auto b = std::lower_bound(line.begin(), line.end(), from);
      auto e = std::upper_bound(line.begin(), line.end(), to);
      std::vector<int> ids;
      for (auto it = b; it != e; ++it)
        ids.push_back(horizontal ? vid.at(key2(*it, fixed)) : vid.at(key2(fixed, *it)));
      std::vector<std::pair<int, bool>> seg;
      for (std::size_t i = 0; i + 1 < ids.size(); ++i) seg.push_back({side_between(ids[i], ids[i + 1], static_cast<int>(k)), forward});
      if (!forward) std::reverse(seg.begin(), seg.end());
      out.insert(out.end(), seg.begin(), seg.end());
    };
    run(hlines[s.y], s.x, s.x + s.size, true, s.y, true);
    run(vlines[s.x + s.size], s.y, s.y + s.size, false, s.x + s.size, true);
    run(hlines[s.y + s.size], s.x, s.x + s.size, true, s.y + s.size, false);
    run(vlines[s.x], s.y, s.y + s.size, false, s.x, false);
  }
  double tol = 1e-12 * std::max(1.0, omega.diameter());
  for (std::size_t i = 0; i < g.sides.size(); ++i) {
    GridSide& s = g.sides[i];
    for (int q : s.squares)
      if (q >= 0 && t.squares[q].in_eps) s.in_eps = true;
    g.vertices[s.a].sides.push_back(static_cast<int>(i));
    g.vertices[s.b].sides.push_back(static_cast<int>(i));
  }
  for (GridVertex& v : g.vertices) {
    v.ell = std::numeric_limits<double>::infinity();
    for (int si : v.sides) {
      v.ell = std::min(v.ell, g.sides[si].length);
      if (g.sides[si].in_eps)
        v.on_eps = true;
      else
        v.needs_cross = true;
    }
    v.on_domain_boundary = omega.boundary_distance(v.z) <= tol;
  }
  for (GridSide& s : g.sides) {
    Point2 za = g.vertices[s.a].z, zb = g.vertices[s.b].z;
    s.on_domain_boundary = s.squares[1] < 0 && g.vertices[s.a].on_domain_boundary &&
                           g.vertices[s.b].on_domain_boundary && omega.boundary_distance(0.5 * (za + zb)) <= tol;
  }
  return g;
}

GridMap eps_boundary_map(const MapOracle& o, const GridQ& grid) {
  GridMap gm;
  gm.vertex_image.resize(grid.vertices.size());
  parallel_for(grid.vertices.size(), [&](std::size_t k) { gm.vertex_image[k] = o.eval(grid.vertices[k].z); });
  gm.sides.resize(grid.sides.size());
  for (std::size_t i = 0; i < grid.sides.size(); ++i) {
    const GridSide& s = grid.sides[i];
    if (!s.in_eps) continue;
    SideMap& m = gm.sides[i];
    m.t = {0.0, 1.0};
    m.z = {grid.vertices[s.a].z, grid.vertices[s.b].z};
    m.img = {gm.vertex_image[s.a], gm.vertex_image[s.b]};
  }
  return gm;
}

Breakpoints segment_interpolation(const MapOracle& o, Point2 p, Point2 q, double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("rho must be positive");
  double len = dist(p, q);
  if (!(len > 0.0)) throw std::invalid_argument("degenerate segment");
  double L = o.L();
  Breakpoints bp;
  Point2 uq = o.eval(q);
  double t = 0.0;
  Point2 ui = o.eval(p);
  bp.t.push_back(0.0);
  bp.z.push_back(p);
  bp.img.push_back(ui);
  auto at = [&](double s) { return s >= 1.0 ? q : lerp(p, q, s); };
  while (t < 1.0) {
    double next;
    if (dist(uq, ui) <= rho) {
      next = 1.0;
    } else {
      // beyond this window the image is provably farther than rho
      double T = std::min(1.0, t + L * rho / len * (1.0 + 1e-9));
      constexpr int steps = 32;
      double lo = t, hi = T;
      bool exited = false;
      for (int k = steps; k >= 1; --k) {
        double s = t + (T - t) * k / steps;
        if (dist(o.eval(at(s)), ui) <= rho) {
          lo = s;
          break;
        }
        hi = s;
        exited = true;
      }
      if (!exited) lo = T;
      for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
        double mid = 0.5 * (lo + hi);
        if (dist(o.eval(at(mid)), ui) <= rho)
          lo = mid;
        else
          hi = mid;
      }
      next = exited ? lo : T;
      // a leftover sliver at the far end is rounding, not a real step
      if (next > 1.0 - 1e-12) next = 1.0;
      if (!(next > t)) throw std::runtime_error("segment interpolation made no progress");
    }
    t = next;
    Point2 z = at(t);
    ui = t >= 1.0 ? uq : o.eval(z);
    bp.t.push_back(t);
    bp.z.push_back(z);
    bp.img.push_back(ui);
  }
  return bp;
}

namespace {

// largest fraction t in [0, tmax] with |f(t) - c| <= xi, scanning then bisecting
template <class F>
double last_exit(F&& f, Point2 c, double xi, double tmax) {
  constexpr double h = 1e-3;
  int K = static_cast<int>(std::ceil(tmax / h));
  auto tk = [&](int k) { return k >= K ? tmax : k * h; };
  int last = 0;
  for (int k = 1; k <= K; ++k)
    if (dist(f(tk(k)), c) <= xi) last = k;
  if (last == K) return tmax;
  double lo = tk(last), hi = tk(last + 1);
  while (hi - lo > 1e-10) {
    double mid = 0.5 * (lo + hi);
    if (dist(f(mid), c) <= xi)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

}  // namespace

Cross compute_cross(const MapOracle& o, const GridQ& grid, const GridMap& bmap, int alpha) {
  const GridVertex& v = grid.vertices.at(alpha);
  if (!v.needs_cross) throw std::invalid_argument("vertex has no side outside the Lebesgue region");
  double L = o.L();
  Cross c;
  c.alpha = alpha;
  c.xi = v.on_eps ? v.ell / (3.0 * L) : std::min(v.ell / (3.0 * L), grid.r / (2.0 * L) * (1.0 - 1e-6));
  Point2 uw = bmap.vertex_image[alpha];
  const Domain& dom = o.domain();
  double dB = dom.boundary_distance(v.z);
  for (;;) {
    c.sides.clear();
    c.frac.clear();
    c.p.clear();
    c.img.clear();
    bool ok = true;
    for (int si : v.sides) {
      const GridSide& s = grid.sides[si];
      int other = s.a == alpha ? s.b : s.a;
      Point2 wi = grid.vertices[other].z;
      Point2 ui = bmap.vertex_image[other];
      auto f = [&](double t) { return s.in_eps ? lerp(uw, ui, t) : o.eval(lerp(v.z, wi, t)); };
      double tmax = std::min(1.0, L * c.xi / s.length * (1.0 + 1e-6));
      double fr = last_exit(f, uw, c.xi, tmax);
      Point2 p = lerp(v.z, wi, fr);
      Point2 img = s.in_eps ? lerp(uw, ui, fr) : o.eval(p);
      c.sides.push_back(si);
      c.frac.push_back(fr);
      c.p.push_back(p);
      c.img.push_back(img);
      if (s.on_domain_boundary || c.xi < dB / L * (1.0 - 1e-9)) continue;
      // the chord must stay in the interior of the image of the domain
      for (int k = 1; k <= 32 && ok; ++k) {
        double sk = k / 32.0;
        Point2 y = lerp(uw, img, sk);
        Point2 seed = lerp(v.z, p, sk);
        Point2 z;
        try {
          z = o.inverse_ext(y, &seed);
        } catch (const std::runtime_error&) {
          ok = false;
          break;
        }
        if (!dom.contains(z) || dom.boundary_distance(z) <= 0.0) ok = false;
      }
    }
    if (ok) break;
    if (++c.halvings > 60) throw std::runtime_error("cross chord keeps leaving the image");
    c.xi *= 0.5;
  }
  return c;
}

GridMap build_grid_map(const MapOracle& o, const GridQ& grid, const std::vector<Cross>& crosses,
                       const GridMap& bmap, const GridMapOptions& opts) {
  std::vector<int> cross_of(grid.vertices.size(), -1);
  for (std::size_t k = 0; k < crosses.size(); ++k) cross_of.at(crosses[k].alpha) = static_cast<int>(k);
  for (std::size_t v = 0; v < grid.vertices.size(); ++v)
    if (grid.vertices[v].needs_cross && cross_of[v] < 0) throw std::invalid_argument("cross missing for a grid vertex");
  double L = o.L();
  GridMap gm;
  gm.vertex_image = bmap.vertex_image;
  gm.sides.resize(grid.sides.size());
  auto leg = [&](int vertex, int side) -> std::pair<const Cross*, std::size_t> {
    int ci = cross_of[vertex];
    if (ci < 0) return {nullptr, 0};
    const Cross& c = crosses[ci];
    for (std::size_t k = 0; k < c.sides.size(); ++k)
      if (c.sides[k] == side) return {&c, k};
    throw std::logic_error("cross does not cover an incident side");
  };
  parallel_for(grid.sides.size(), [&](std::size_t i) {
    const GridSide& s = grid.sides[i];
    SideMap& m = gm.sides[i];
    auto [ca, ka] = leg(s.a, static_cast<int>(i));
    auto [cb, kb] = leg(s.b, static_cast<int>(i));
    m.cross_a = ca ? ca->frac[ka] : 0.0;
    m.cross_b = cb ? cb->frac[kb] : 0.0;
    Point2 za = grid.vertices[s.a].z, zb = grid.vertices[s.b].z;
    Point2 ua = gm.vertex_image[s.a], ub = gm.vertex_image[s.b];
    if (s.in_eps) {
      m.t = bmap.sides[i].t;
      m.z = bmap.sides[i].z;
      m.img = bmap.sides[i].img;
      return;
    }
    Point2 pa = ca->p[ka], pb = cb->p[kb];
    double delta_ab = std::min(ca->xi, cb->xi) / (72.0 * L * L);
    double rho_floor = delta_ab / std::numbers::sqrt2;
    double target = delta_ab;
    if (!s.on_domain_boundary) target = std::min(target, 0.5 * distance_to_domain_boundary(o.domain(), pa, pb) / L);
    double rho = opts.adaptive_rho ? std::max(rho_floor, L * dist(pa, pb) * (1.0 + 1e-9)) : rho_floor;
    Breakpoints bp;
    for (;;) {
      bp = segment_interpolation(o, pa, pb, rho);
      if (rho <= rho_floor) break;
      double err = 0.0;
      for (std::size_t k = 0; k + 1 < bp.z.size() && err <= target; ++k)
        for (int q = 1; q < 8; ++q) {
          double sq = q / 8.0;
          err = std::max(err, dist(o.eval(lerp(bp.z[k], bp.z[k + 1], sq)), lerp(bp.img[k], bp.img[k + 1], sq)));
        }
      if (err <= target) break;
      rho = std::max(rho_floor, 0.5 * rho);
    }
    m.rho = rho;
    double span = 1.0 - m.cross_a - m.cross_b;
    m.t.push_back(0.0);
    m.z.push_back(za);
    m.img.push_back(ua);
    for (std::size_t k = 0; k < bp.t.size(); ++k) {
      m.t.push_back(k + 1 == bp.t.size() ? 1.0 - m.cross_b : m.cross_a + span * bp.t[k]);
      m.z.push_back(bp.z[k]);
      m.img.push_back(bp.img[k]);
    }
    m.img[1] = ca->img[ka];
    m.img[m.img.size() - 1] = cb->img[kb];
    m.t.push_back(1.0);
    m.z.push_back(zb);
    m.img.push_back(ub);
  });
  return gm;
}

Point2 grid_eval(const GridMap& gm, int side, double t) {
  const SideMap& m = gm.sides.at(side);
  auto it = std::upper_bound(m.t.begin(), m.t.end(), t);
  std::size_t k = it == m.t.begin() ? 0 : static_cast<std::size_t>(it - m.t.begin()) - 1;
  k = std::min(k, m.t.size() - 2);
  double w = m.t[k + 1] - m.t[k];
  double s = w > 0.0 ? (t - m.t[k]) / w : 0.0;
  return lerp(m.img[k], m.img[k + 1], std::clamp(s, 0.0, 1.0));
}

Point2 adjusted_eval(const MapOracle& o, const GridQ& grid, const GridMap& gm, int side, double t) {
  const GridSide& s = grid.sides.at(side);
  const SideMap& m = gm.sides[side];
  Point2 ua = m.img.front(), ub = m.img.back();
  if (s.in_eps) return lerp(ua, ub, t);
  if (t <= m.cross_a) return lerp(ua, m.img[1], t / m.cross_a);
  if (t >= 1.0 - m.cross_b) return lerp(m.img[m.img.size() - 2], ub, (t - (1.0 - m.cross_b)) / m.cross_b);
  return o.eval(lerp(grid.vertices[s.a].z, grid.vertices[s.b].z, t));
}

GridBilip verify_grid_bilip(const GridQ& grid, const GridMap& gm, const GridEval& f, long pairs,
                            std::uint64_t seed) {
  if (pairs < 1) throw std::invalid_argument("pairs must be positive");
  GridBilip out;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<int> with_cross;
  for (std::size_t v = 0; v < grid.vertices.size(); ++v)
    if (grid.vertices[v].needs_cross) with_cross.push_back(static_cast<int>(v));
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(unif(rng) * n) % n; };
  auto frac_at = [&](int v, int si) {
    const GridSide& s = grid.sides[si];
    return s.a == v ? gm.sides[si].cross_a : gm.sides[si].cross_b;
  };
  auto in_cross = [&](int si, double t) {
    const SideMap& m = gm.sides[si];
    return t <= m.cross_a || t >= 1.0 - m.cross_b;
  };
  auto point = [&](int si, double t) {
    return lerp(grid.vertices[grid.sides[si].a].z, grid.vertices[grid.sides[si].b].z, t);
  };
  std::size_t ns = grid.sides.size();
  for (long k = 0; k < pairs; ++k) {
    int s1, s2;
    double t1, t2;
    int kind = static_cast<int>(k % 3);
    if (kind == 0 && !with_cross.empty()) {
      int v = with_cross[pick(with_cross.size())];
      const auto& inc = grid.vertices[v].sides;
      s1 = inc[pick(inc.size())];
      s2 = inc[pick(inc.size())];
      double d1 = unif(rng) * frac_at(v, s1), d2 = unif(rng) * frac_at(v, s2);
      t1 = grid.sides[s1].a == v ? d1 : 1.0 - d1;
      t2 = grid.sides[s2].a == v ? d2 : 1.0 - d2;
    } else if (kind == 1) {
      s1 = s2 = static_cast<int>(pick(ns));
      t1 = unif(rng);
      t2 = unif(rng);
    } else {
      s1 = static_cast<int>(pick(ns));
      s2 = static_cast<int>(pick(ns));
      t1 = unif(rng);
      t2 = unif(rng);
    }
    Point2 z1 = point(s1, t1), z2 = point(s2, t2);
    double dz = dist(z1, z2);
    if (dz == 0.0) continue;
    double ratio = dist(f(s1, t1), f(s2, t2)) / dz;
    ++out.pairs;
    out.lower = std::min(out.lower, ratio);
    out.upper = std::max(out.upper, ratio);
    bool c1 = in_cross(s1, t1), c2 = in_cross(s2, t2);
    if (kind == 0 && !with_cross.empty())
      out.lower_cross = std::min(out.lower_cross, ratio);
    else if (!c1 && !c2)
      out.lower_outside = std::min(out.lower_outside, ratio);
    else
      out.lower_mixed = std::min(out.lower_mixed, ratio);
  }
  return out;
}

GridBilip verify_grid_bilip(const GridQ& grid, const GridMap& gm, long pairs, std::uint64_t seed) {
  return verify_grid_bilip(grid, gm, [&](int s, double t) { return grid_eval(gm, s, t); }, pairs, seed);
}

GridInjectivity check_grid_injective(const GridQ& grid, const GridMap& gm) {
  struct Piece {
    int side;
    long ia, ib;
    Point2 a, b;
  };
  std::vector<Piece> pieces;
  long next_id = static_cast<long>(grid.vertices.size());
  BBox box;
  for (std::size_t i = 0; i < grid.sides.size(); ++i) {
    const SideMap& m = gm.sides[i];
    std::size_t n = m.img.size();
    long prev = grid.sides[i].a;
    for (std::size_t k = 0; k + 1 < n; ++k) {
      long id = k + 2 == n ? grid.sides[i].b : next_id++;
      pieces.push_back({static_cast<int>(i), prev, id, m.img[k], m.img[k + 1]});
      box.add(m.img[k]);
      prev = id;
    }
    if (n) box.add(m.img[n - 1]);
  }
  Snapper sn(box);
  std::vector<std::array<I2, 2>> seg(pieces.size());
  std::vector<IBox> boxes(pieces.size());
  GridInjectivity res;
  for (std::size_t k = 0; k < pieces.size(); ++k) {
    seg[k] = {sn.snap(pieces[k].a), sn.snap(pieces[k].b)};
    if (seg[k][0] == seg[k][1]) {
      res.ok = false;
      res.side_a = res.side_b = pieces[k].side;
      return res;
    }
    boxes[k] = {std::min(seg[k][0].x, seg[k][1].x), std::min(seg[k][0].y, seg[k][1].y),
                std::max(seg[k][0].x, seg[k][1].x), std::max(seg[k][0].y, seg[k][1].y)};
  }
  for_each_overlapping_pair(boxes, [&](std::size_t i, std::size_t j) {
    const Piece& p = pieces[i];
    const Piece& q = pieces[j];
    I2 a = seg[i][0], b = seg[i][1], c = seg[j][0], d = seg[j][1];
    long shared = -1;
    int nshared = 0;
    for (long x : {p.ia, p.ib})
      for (long y : {q.ia, q.ib})
        if (x == y) {
          shared = x;
          ++nshared;
        }
    bool bad;
    if (nshared == 0) {
      bad = segments_intersect(a, b, c, d);
    } else if (nshared == 1) {
      I2 s = shared == p.ia ? a : b;
      I2 x = shared == p.ia ? b : a;
      I2 y = shared == q.ia ? d : c;
      __int128 dp = static_cast<__int128>(x.x - s.x) * (y.x - s.x) + static_cast<__int128>(x.y - s.y) * (y.y - s.y);
      bad = orient(x, s, y) == 0 && dp > 0;
    } else {
      bad = true;
    }
    if (bad) {
      res.ok = false;
      res.side_a = p.side;
      res.side_b = q.side;
      return false;
    }
    return true;
  });
  return res;
}

void write_grid_map(const GridQ& grid, const GridMap& gm, std::ostream& out) {
  std::string line;
  for (std::size_t i = 0; i < grid.sides.size(); ++i) {
    const SideMap& m = gm.sides[i];
    line = "side " + std::to_string(grid.sides[i].a) + " " + std::to_string(grid.sides[i].b) + " :";
    for (std::size_t k = 0; k < m.t.size(); ++k) {
      line += ' ';
      append_num(line, m.t[k]);
      line += ' ';
      append_num(line, m.img[k].x);
      line += ' ';
      append_num(line, m.img[k].y);
    }
    line += '\n';
    out << line;
  }
}

}  // namespace bilip
