#include "bilip/lebesgue.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

#include "bilip/format.hpp"
#include "bilip/parallel.hpp"

namespace bilip {

namespace {

bool segment_hits_box(Point2 a, Point2 b, Point2 lo, Point2 hi) {
  double t0 = 0.0, t1 = 1.0;
  Point2 d = b - a;
  auto clip = [&](double p, double q) {
    if (p == 0.0) return q >= 0.0;
    double t = q / p;
    if (p < 0.0) {
      if (t > t1) return false;
      t0 = std::max(t0, t);
    } else {
      if (t < t0) return false;
      t1 = std::min(t1, t);
    }
    return true;
  };
  return clip(-d.x, a.x - lo.x) && clip(d.x, hi.x - a.x) && clip(-d.y, a.y - lo.y) && clip(d.y, hi.y - a.y);
}

bool boundary_hits_box(const Domain& d, Point2 lo, Point2 hi) {
  const auto& v = d.boundary().vertices;
  std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i)
    if (segment_hits_box(v[i], v[(i + 1) % n], lo, hi)) return true;
  return false;
}

std::uint64_t vkey(std::int64_t X, std::int64_t Y) {
  return (static_cast<std::uint64_t>(X + (1LL << 31)) << 32) | static_cast<std::uint64_t>(Y + (1LL << 31));
}

}  // namespace

bool box_inside(const Domain& d, Point2 lo, Point2 hi) {
  double e = 1e-9 * (hi.x - lo.x);
  if (boundary_hits_box(d, lo + Point2{e, e}, hi - Point2{e, e})) return false;
  return d.contains(0.5 * (lo + hi));
}

bool box_meets_boundary(const Domain& d, Point2 lo, Point2 hi) {
  double e = 1e-9 * (hi.x - lo.x);
  return boundary_hits_box(d, lo + Point2{e, e}, hi - Point2{e, e});
}

bool box_compactly_inside(const Domain& d, Point2 lo, Point2 hi) {
  double e = 1e-9 * (hi.x - lo.x);
  if (boundary_hits_box(d, lo - Point2{e, e}, hi + Point2{e, e})) return false;
  return d.contains(0.5 * (lo + hi));
}

double avg_deviation(const MapOracle& o, const Square& sq, const Mat2& m, int quad_n) {
  if (quad_n < 1) throw std::invalid_argument("quad_n must be positive");
  if (!box_inside(o.domain(), sq.lo(), sq.hi())) throw std::domain_error("quadrature square leaves the domain");
  Point2 lo = sq.lo();
  double h = sq.side / quad_n;
  double sum = 0.0;
  for (int j = 0; j < quad_n; ++j)
    for (int i = 0; i < quad_n; ++i) {
      Point2 z{lo.x + (i + 0.5) * h, lo.y + (j + 0.5) * h};
      sum += op_norm(o.jacobian(z) - m);
    }
  return sum / (static_cast<double>(quad_n) * quad_n);
}

double delta_of_eta(double eta, double L) { return eta * eta / (32.0 * std::numbers::sqrt2 * L); }

double eta_of_delta(double delta, double L) { return 4.0 * std::sqrt(2.0 * std::numbers::sqrt2 * L * delta); }

double check_linfty_lemma(const MapOracle& o, Point2 center, double rho, const Mat2& m, int samples) {
  if (samples < 2) throw std::invalid_argument("need at least 2 samples per axis");
  Point2 uc = o.eval(center);
  double best = 0.0;
  for (int j = 0; j < samples; ++j)
    for (int i = 0; i < samples; ++i) {
      Point2 z{center.x - 0.5 * rho + rho * i / (samples - 1), center.y - 0.5 * rho + rho * j / (samples - 1)};
      best = std::max(best, dist(o.eval(z), uc + m * (z - center)));
    }
  return best;
}

std::vector<Cell> cells_inside(const Domain& d, Point2 origin, double r) {
  const BBox& b = d.box();
  std::int64_t i0 = static_cast<std::int64_t>(std::floor((b.lo.x - origin.x) / r));
  std::int64_t j0 = static_cast<std::int64_t>(std::floor((b.lo.y - origin.y) / r));
  std::int64_t i1 = static_cast<std::int64_t>(std::ceil((b.hi.x - origin.x) / r));
  std::int64_t j1 = static_cast<std::int64_t>(std::ceil((b.hi.y - origin.y) / r));
  std::vector<Cell> all;
  for (std::int64_t i = i0; i < i1; ++i)
    for (std::int64_t j = j0; j < j1; ++j) all.push_back({i, j});
  std::vector<char> keep(all.size(), 0);
  parallel_for(all.size(), [&](std::size_t k) {
    keep[k] = box_inside(d, lattice_point(origin, r, all[k].i, all[k].j),
                         lattice_point(origin, r, all[k].i + 1, all[k].j + 1));
  });
  std::vector<Cell> out;
  for (std::size_t k = 0; k < all.size(); ++k)
    if (keep[k]) out.push_back(all[k]);
  return out;
}

LebesgueClassification classify(const MapOracle& o, double r, double delta, int quad_n) {
  if (!(r > 0.0)) throw std::invalid_argument("r must be positive");
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  const Domain& d = o.domain();
  LebesgueClassification cls;
  cls.r = r;
  cls.delta = delta;
  cls.quad_n = quad_n;
  cls.origin = d.box().lo;
  std::vector<Cell> cells = cells_inside(d, cls.origin, r);
  if (cells.empty()) throw std::invalid_argument("r larger than the domain");
  cls.cells.resize(cells.size());
  double L = o.L();
  parallel_for(cells.size(), [&](std::size_t k) {
    CellRecord& rec = cls.cells[k];
    rec.cell = cells[k];
    Point2 lo = lattice_point(cls.origin, r, rec.cell.i, rec.cell.j);
    Point2 hi = lattice_point(cls.origin, r, rec.cell.i + 1, rec.cell.j + 1);
    Point2 c = 0.5 * (lo + hi);
    rec.M = o.diff(c);
    rec.eligible = box_compactly_inside(d, lo - Point2{r, r}, hi + Point2{r, r});
    if (!rec.eligible) {
      rec.deviation = std::numeric_limits<double>::infinity();
      return;
    }
    rec.deviation = avg_deviation(o, Square{c, 3.0 * r}, rec.M, quad_n);
    rec.accepted = in_L_class(rec.M, L) && rec.deviation <= delta;
  });
  cls.accepted.r = r;
  cls.accepted.origin = cls.origin;
  for (const CellRecord& rec : cls.cells)
    if (rec.accepted) cls.accepted.cells.push_back(rec.cell);
  cls.accepted.normalize();
  cls.area_deficit = std::max(0.0, d.area() - cls.accepted.area());
  return cls;
}

InterpolationMesh interpolate_cells(const MapOracle& o, const RightPolygon& rp) {
  InterpolationMesh im;
  im.r = rp.r;
  im.origin = rp.origin;
  im.cells = rp.cells;
  std::unordered_map<std::uint64_t, int> ids;
  std::vector<std::pair<std::int64_t, std::int64_t>> lattice;
  auto vid = [&](std::int64_t X, std::int64_t Y) {
    auto [it, fresh] = ids.try_emplace(vkey(X, Y), static_cast<int>(lattice.size()));
    if (fresh) lattice.push_back({X, Y});
    return it->second;
  };
  auto& tris = im.map.domain.triangles;
  tris.reserve(2 * rp.cells.size());
  for (const Cell& c : rp.cells) {
    int sw = vid(c.i, c.j), se = vid(c.i + 1, c.j), ne = vid(c.i + 1, c.j + 1), nw = vid(c.i, c.j + 1);
    tris.push_back({sw, se, ne});
    tris.push_back({sw, ne, nw});
  }
  auto& verts = im.map.domain.vertices;
  verts.resize(lattice.size());
  im.map.image.resize(lattice.size());
  parallel_for(lattice.size(), [&](std::size_t k) {
    verts[k] = lattice_point(rp.origin, rp.r, lattice[k].first, lattice[k].second);
    im.map.image[k] = o.eval(verts[k]);
  });
  return im;
}

InterpolationMesh interpolate(const MapOracle& o, const LebesgueClassification& cls) {
  if (cls.accepted.cells.empty()) throw std::invalid_argument("no accepted squares to interpolate");
  return interpolate_cells(o, cls.accepted);
}

InterpolationMesh naive_interpolation(const MapOracle& o, double r) {
  RightPolygon rp;
  rp.r = r;
  rp.origin = o.domain().box().lo;
  rp.cells = cells_inside(o.domain(), rp.origin, r);
  if (rp.cells.empty()) throw std::invalid_argument("r larger than the domain");
  return interpolate_cells(o, rp);
}

double eta_budget(double L, double eps, double p, double r, double area) {
  if (!(L >= 1.0 && eps > 0.0 && p >= 1.0 && r > 0.0 && area > 0.0))
    throw std::invalid_argument("eta_budget: invalid arguments");
  double K = 32.0 * std::numbers::sqrt2 * L;  // delta(eta) = eta^2 / K
  double rhs = std::pow(eps / 4.0, p) / (std::pow(3.0 * L, p - 1.0) * area);
  // smallest positive root bound of a eta^2 + b eta <= c
  auto root = [](double a, double b, double c) { return 2.0 * c / (b + std::sqrt(b * b + 4.0 * a * c)); };
  double eta = (1.0 - 1e-12) / (6.0 * L);
  eta = std::min(eta, eps / (24.0 * L * r));
  eta = std::min(eta, root(9.0 / K, 9.0, rhs));
  eta = std::min(eta, root(9.0 * L * L * L * L / K, 18.0 * L * L, rhs));
  eta = std::min(eta, eps / (12.0 * L * (L + eps)));
  eta = std::min(eta, std::numbers::sqrt2 / (36.0 * L * L * L));
  return eta;
}

void write_classification(const LebesgueClassification& cls, std::ostream& out) {
  std::string line;
  for (const CellRecord& c : cls.cells) {
    line = "cell " + std::to_string(c.cell.i) + " " + std::to_string(c.cell.j) +
           (c.accepted ? " accepted " : " rejected ");
    append_num(line, c.M.a11);
    line += ' ';
    append_num(line, c.M.a12);
    line += ' ';
    append_num(line, c.M.a21);
    line += ' ';
    append_num(line, c.M.a22);
    line += ' ';
    append_num(line, c.deviation);
    line += '\n';
    out << line;
  }
}

}  // namespace bilip
