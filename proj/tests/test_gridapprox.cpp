#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>
#include <sstream>

#include "bilip/gridapprox.hpp"
#include "bilip/lebesgue.hpp"
#include "bilip/parallel.hpp"
#include "oracles.hpp"

using namespace bilip;

namespace {

struct GridRun {
  std::unique_ptr<MapOracle> o;
  RightPolygon eps;
  Tiling tiling;
  GridQ grid;
  GridMap bmap;
  std::vector<Cross> crosses;
  GridMap gm;
};

// Lebesgue region from a generous classification so that both kinds of sides occur
GridRun make_run(const std::string& map, double r, double delta, const std::string& domain = "unit_square") {
  GridRun g;
  g.o = make_map(map, parse_domain(domain));
  auto cls = classify(*g.o, r, delta, 8);
  g.eps = cls.accepted;
  g.tiling = build_tiling(g.o->domain(), g.eps, 6);
  g.grid = build_grid(g.tiling, g.o->domain());
  g.bmap = eps_boundary_map(*g.o, g.grid);
  for (std::size_t v = 0; v < g.grid.vertices.size(); ++v)
    if (g.grid.vertices[v].needs_cross) g.crosses.push_back(compute_cross(*g.o, g.grid, g.bmap, static_cast<int>(v)));
  g.gm = build_grid_map(*g.o, g.grid, g.crosses, g.bmap);
  return g;
}

// Square-pair rule: empty, a common vertex, or a whole side of one of the two.
bool square_pair_ok(const Square& a, const Square& b) {
  Point2 alo = a.lo(), ahi = a.hi(), blo = b.lo(), bhi = b.hi();
  double x0 = std::max(alo.x, blo.x), x1 = std::min(ahi.x, bhi.x);
  double y0 = std::max(alo.y, blo.y), y1 = std::min(ahi.y, bhi.y);
  double tol = 1e-12 * std::max(a.side, b.side);
  if (x0 > x1 + tol || y0 > y1 + tol) return true;
  bool thin_x = x1 - x0 <= tol, thin_y = y1 - y0 <= tol;
  if (!thin_x && !thin_y) return false;  // interiors overlap
  if (thin_x && thin_y) return true;     // a corner
  double len = thin_x ? y1 - y0 : x1 - x0;
  return std::abs(len - std::min(a.side, b.side)) <= tol;
}

}  // namespace

TEST_CASE("uniform tiling around a central Lebesgue block") {
  Domain omega = parse_domain("unit_square");
  RightPolygon eps;
  eps.r = 0.25;
  eps.cells = {{1, 1}, {1, 2}, {2, 1}, {2, 2}};
  eps.normalize();
  Tiling t = build_tiling(omega, eps, 6);
  CHECK(t.uniform);
  CHECK(t.squares.size() == 16);
  int inside = 0;
  for (std::size_t k = 0; k < t.squares.size(); ++k) {
    inside += t.squares[k].in_eps;
    CHECK(t.square(k).side == doctest::Approx(0.25));
  }
  CHECK(inside == 4);
  CHECK(tiling_valid(t));
}

TEST_CASE("one ring around the Lebesgue region forces side r") {
  Domain omega = parse_domain("rect:0,0,1,1");
  RightPolygon eps;
  eps.r = 0.125;
  for (int i = 1; i < 7; ++i)
    for (int j = 1; j < 7; ++j) eps.cells.push_back({i, j});
  eps.normalize();
  Tiling t = build_tiling(omega, eps, 6);
  for (std::size_t k = 0; k < t.squares.size(); ++k) CHECK(t.square(k).side == doctest::Approx(0.125));
  CHECK(t.squares.size() == 64);
}

TEST_CASE("tilings obey the pairwise square rule") {
  struct Case {
    const char* domain;
    double r;
    std::vector<Cell> cells;
  };
  std::vector<Case> cases = {{"lshape", 0.125, {{1, 1}}},
                             {"polygon:0,0;1,0;0.5,1", 1.0 / 16, {{7, 4}, {8, 4}, {7, 5}}},
                             {"polygon:0.05,0.02;0.97,0.1;0.9,0.93;0.1,0.85", 1.0 / 16, {{7, 7}, {8, 7}}}};
  for (const Case& c : cases) {
    CAPTURE(c.domain);
    Domain omega = parse_domain(c.domain);
    auto id = make_map("identity", omega);
    RightPolygon eps = classify(*id, c.r, 1.0, 4).accepted;
    eps.cells = c.cells;
    eps.normalize();
    Tiling t = build_tiling(omega, eps, 5);
    CHECK(tiling_valid(t));
    bool all_ok = true;
    for (std::size_t i = 0; i < t.squares.size(); ++i)
      for (std::size_t j = i + 1; j < t.squares.size(); ++j) all_ok = all_ok && square_pair_ok(t.square(i), t.square(j));
    CHECK(all_ok);
    // squares touching the Lebesgue region have side r; neighbours differ at most 2:1
    for (std::size_t i = 0; i < t.squares.size(); ++i) {
      if (t.squares[i].in_eps) continue;
      for (int j : t.adjacency[i]) {
        double a = t.square(i).side, b = t.square(j).side;
        CHECK(std::max(a, b) <= 2.0 * std::min(a, b) * (1 + 1e-12));
        if (t.squares[j].in_eps) CHECK(a == doctest::Approx(c.r));
      }
    }
  }
}

TEST_CASE("segment interpolation") {
  auto id = make_map("identity", parse_domain("rect:-1,-1,2,2"));
  Breakpoints b = segment_interpolation(*id, {0, 0}, {1, 0}, 0.3);
  std::vector<double> want{0.0, 0.3, 0.6, 0.9, 1.0};
  REQUIRE(b.t.size() == want.size());
  for (std::size_t i = 0; i < want.size(); ++i) CHECK(b.t[i] == doctest::Approx(want[i]).epsilon(1e-8));

  auto af = make_map("affine:a11=2,a22=0.5");
  b = segment_interpolation(*af, {0.1, 0.2}, {0.7, 0.6}, af->L() * 0.8);
  CHECK(b.t.size() == 2);

  auto sh = make_map("shear_sine:a=0.1,k=1");
  Point2 p{0.1, 0.1}, q{0.9, 0.1};
  b = segment_interpolation(*sh, p, q, 0.05);
  std::vector<double> scan = oracle::scan_breakpoints(*sh, p, q, 0.05, 100000);
  REQUIRE(b.t.size() == scan.size() + 1);
  for (std::size_t i = 0; i < scan.size(); ++i) CHECK(std::abs(b.t[i + 1] - scan[i]) <= 1e-7);
  // ratio of the interpolation over sampled pairs
  double lo = 1e300, hi = 0.0;
  std::mt19937_64 rng(79);
  std::uniform_real_distribution<double> U(0, 1);
  auto at = [&](double t) {
    for (std::size_t i = 0; i + 1 < b.t.size(); ++i)
      if (t <= b.t[i + 1]) return lerp(b.img[i], b.img[i + 1], (t - b.t[i]) / (b.t[i + 1] - b.t[i]));
    return b.img.back();
  };
  for (int k = 0; k < 20000; ++k) {
    double s = U(rng), t = U(rng);
    double dz = std::abs(s - t) * dist(p, q);
    if (dz < 1e-12) continue;
    double ratio = dist(at(s), at(t)) / dz;
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  CHECK(hi <= 4 * sh->L());
  CHECK(lo >= 1 / (4 * sh->L()));
}

TEST_CASE("crosses of the identity and of an affine map") {
  GridRun g = make_run("identity", 0.125, 1e-6);
  REQUIRE_FALSE(g.crosses.empty());
  for (const Cross& c : g.crosses) {
    const GridVertex& v = g.grid.vertices[c.alpha];
    if (!v.on_eps) continue;
    CHECK(c.xi == doctest::Approx(0.125 / 3));
    for (double f : c.frac) CHECK(f == doctest::Approx(1.0 / 3).epsilon(1e-8));
  }
  // op norm attained along x: distance grows at rate 2 along horizontal sides
  GridRun a = make_run("affine:a11=2,a22=0.5", 0.125, 1e-6);
  for (const Cross& c : a.crosses)
    for (std::size_t k = 0; k < c.sides.size(); ++k) {
      const GridSide& s = a.grid.sides[c.sides[k]];
      Point2 d = a.grid.vertices[s.b].z - a.grid.vertices[s.a].z;
      if (std::abs(d.y) > 0.0 || s.in_eps) continue;
      CHECK(c.frac[k] == doctest::Approx(c.xi / (2.0 * s.length)).epsilon(1e-8));
    }
}

TEST_CASE("cross fractions agree with a dense first-exit scan") {
  GridRun g = make_run("shear_sine:a=0.1,k=1", 0.125, 0.5);
  int checked = 0;
  for (const Cross& c : g.crosses) {
    const GridVertex& v = g.grid.vertices[c.alpha];
    for (std::size_t k = 0; k < c.sides.size(); ++k) {
      const GridSide& s = g.grid.sides[c.sides[k]];
      if (s.in_eps) continue;
      Point2 wi = g.grid.vertices[s.a == c.alpha ? s.b : s.a].z;
      auto f = [&](double t) { return g.o->eval(lerp(v.z, wi, t)); };
      double want = oracle::first_exit(f, c.xi, 0.5, 100000);
      CHECK(std::abs(c.frac[k] - want) <= 1e-8);
      ++checked;
    }
  }
  CHECK(checked > 20);
}

TEST_CASE("cross invariants") {
  for (const char* spec : {"identity", "shear_sine", "polar_twist", "fold_candidate"}) {
    CAPTURE(spec);
    GridRun g = make_run(spec, 0.125, 0.3);
    double L = g.o->L();
    for (const Cross& c : g.crosses) {
      const GridVertex& v = g.grid.vertices[c.alpha];
      CHECK(3 * L * c.xi <= v.ell * (1 + 1e-12));
      CHECK(c.xi < g.grid.r / (2 * L) + 1e-15);
      for (std::size_t k = 0; k < c.frac.size(); ++k) {
        CHECK(c.frac[k] > 0.0);
        CHECK(c.frac[k] <= 1.0 / 3.0 + 1e-12);
        CHECK(dist(c.img[k], g.bmap.vertex_image[c.alpha]) == doctest::Approx(c.xi).epsilon(1e-6));
        // the grid map passes through every cross endpoint
        const GridSide& s = g.grid.sides[c.sides[k]];
        double t = s.a == c.alpha ? c.frac[k] : 1.0 - c.frac[k];
        CHECK(dist(oracle::side_eval(g.gm.sides[c.sides[k]], t), c.img[k]) <= 1e-12);
      }
    }
    // balls around vertex images are disjoint
    for (std::size_t i = 0; i < g.crosses.size(); ++i)
      for (std::size_t j = i + 1; j < g.crosses.size(); ++j) {
        const Cross &a = g.crosses[i], &b = g.crosses[j];
        CHECK(dist(g.bmap.vertex_image[a.alpha], g.bmap.vertex_image[b.alpha]) > a.xi + b.xi);
      }
    for (std::size_t v = 0; v < g.grid.vertices.size(); ++v)
      CHECK(dist(g.gm.vertex_image[v], g.o->eval(g.grid.vertices[v].z)) <= 1e-12);
    CHECK(check_grid_injective(g.grid, g.gm).ok);
  }
}

TEST_CASE("grid maps of affine maps are exact") {
  for (const char* spec : {"identity", "affine:a11=2,a22=0.5", "affine:a11=1.2,a12=0.3,a21=-0.2,a22=0.9"}) {
    CAPTURE(spec);
    GridRun g = make_run(spec, 0.125, 1e-6);
    std::mt19937_64 rng(83);
    std::uniform_real_distribution<double> U(0, 1);
    for (std::size_t s = 0; s < g.grid.sides.size(); ++s)
      for (int k = 0; k < 5; ++k) {
        double t = U(rng);
        Point2 z = lerp(g.grid.vertices[g.grid.sides[s].a].z, g.grid.vertices[g.grid.sides[s].b].z, t);
        CHECK(dist(grid_eval(g.gm, static_cast<int>(s), t), g.o->eval(z)) <= 1e-12);
      }
  }
}

TEST_CASE("grid map ratio bounds") {
  GridRun id = make_run("identity", 0.125, 1e-6);
  GridBilip b = verify_grid_bilip(id.grid, id.gm, 20000, 1);
  CHECK(b.lower == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(b.upper == doctest::Approx(1.0).epsilon(1e-9));
  GridRun af = make_run("affine:a11=2,a22=0.5", 0.125, 1e-6);
  b = verify_grid_bilip(af.grid, af.gm, 20000, 1);
  CHECK(b.lower >= 0.5 * (1 - 1e-9));
  CHECK(b.upper <= 2.0 * (1 + 1e-9));

  for (const char* spec : {"shear_sine", "fold_candidate", "polar_twist"}) {
    CAPTURE(spec);
    GridRun g = make_run(spec, 0.125, 0.3);
    double L = g.o->L();
    GridBilip prime = verify_grid_bilip(g.grid, g.gm, 100000, 7);
    CHECK(prime.lower >= 1 / (72 * L));
    CHECK(prime.upper <= 72 * L);
    GridBilip adj = verify_grid_bilip(
        g.grid, g.gm, [&](int s, double t) { return adjusted_eval(*g.o, g.grid, g.gm, s, t); }, 100000, 7);
    CHECK(adj.lower >= 1 / (18 * L));
    CHECK(adj.upper <= 18 * L);
    CHECK(adj.lower_cross >= std::sqrt(2.0) / (4 * L));
    CHECK(adj.lower_outside >= 1 / (2 * L));
    CHECK(adj.lower_mixed >= 1 / (6 * L));
    oracle::Ratio r = oracle::grid_pair_ratios(g.grid, g.gm, 100000, 9);
    CHECK(r.lower >= 1 / (72 * L));
    CHECK(r.upper <= 72 * L);
  }
}

TEST_CASE("grid dump lists every side") {
  GridRun g = make_run("shear_sine", 0.25, 0.3);
  std::ostringstream os;
  write_grid_map(g.grid, g.gm, os);
  std::istringstream is(os.str());
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string tag, colon;
    int a, b;
    ls >> tag >> a >> b >> colon;
    CHECK(tag == "side");
    CHECK(colon == ":");
    double t, x, y;
    int triples = 0;
    while (ls >> t >> x >> y) ++triples;
    CHECK(triples == static_cast<int>(g.gm.sides[n].t.size()));
    ++n;
  }
  CHECK(n == g.grid.sides.size());
}

TEST_CASE("worker count does not change the grid map") {
  set_workers(1);
  GridRun a = make_run("shear_sine", 0.125, 0.3);
  set_workers(3);
  GridRun b = make_run("shear_sine", 0.125, 0.3);
  set_workers(0);
  REQUIRE(a.gm.sides.size() == b.gm.sides.size());
  bool same = true;
  for (std::size_t s = 0; s < a.gm.sides.size(); ++s) {
    same = same && a.gm.sides[s].t == b.gm.sides[s].t;
    for (std::size_t i = 0; same && i < a.gm.sides[s].img.size(); ++i)
      same = a.gm.sides[s].img[i] == b.gm.sides[s].img[i];
  }
  CHECK(same);
}
