#include "bilip/maps.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "bilip/format.hpp"

namespace bilip {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("not a number: '" + s + "'");
  }
  if (pos != s.size() || !std::isfinite(v)) throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

std::map<std::string, double> parse_params(const std::string& s, const std::map<std::string, double>& defaults) {
  std::map<std::string, double> out = defaults;
  if (s.empty()) return out;
  for (const std::string& kv : split(s, ',')) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("expected key=value, got '" + kv + "'");
    std::string key = kv.substr(0, eq);
    if (!defaults.count(key)) throw std::invalid_argument("unknown map parameter '" + key + "'");
    out[key] = parse_double(kv.substr(eq + 1));
  }
  return out;
}

Polygon rect(double x0, double y0, double x1, double y1) {
  return Polygon{{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}};
}

bool is_integer(double v) { return std::abs(v - std::round(v)) <= 1e-9 * std::max(1.0, std::abs(v)); }

double shear_constant(double m) { return 0.5 * (std::abs(m) + std::sqrt(m * m + 4.0)); }

}  // namespace

// ---- Domain ----

Domain::Domain(Polygon boundary) : boundary_(std::move(boundary)) {
  if (boundary_.vertices.size() < 3) throw std::invalid_argument("domain needs at least 3 vertices");
  for (Point2 p : boundary_.vertices)
    if (!finite(p)) throw std::invalid_argument("domain vertex not finite");
  if (!polygon_is_simple(boundary_)) throw std::invalid_argument("domain polygon is not simple");
  if (polygon_signed_area(boundary_) < 0) std::reverse(boundary_.vertices.begin(), boundary_.vertices.end());
  area_ = polygon_signed_area(boundary_);
  for (Point2 p : boundary_.vertices) box_.add(p);
  std::size_t n = boundary_.vertices.size();
  convex_ = true;
  axis_aligned_ = true;
  for (std::size_t i = 0; i < n; ++i) {
    Point2 a = boundary_.vertices[i], b = boundary_.vertices[(i + 1) % n], c = boundary_.vertices[(i + 2) % n];
    if (cross(b - a, c - b) < 0) convex_ = false;
    if (a.x != b.x && a.y != b.y) axis_aligned_ = false;
  }
}

bool Domain::contains(Point2 z, double tol) const { return point_in_polygon(boundary_, z, tol); }

bool Domain::aligned_to(Point2 origin, double r) const {
  if (!axis_aligned_) return false;
  for (Point2 p : boundary_.vertices)
    if (!is_integer((p.x - origin.x) / r) || !is_integer((p.y - origin.y) / r)) return false;
  return true;
}

Domain parse_domain(const std::string& spec) {
  auto colon = spec.find(':');
  std::string name = spec.substr(0, colon);
  std::string args = colon == std::string::npos ? "" : spec.substr(colon + 1);
  Polygon p;
  if (name == "unit_square" && args.empty()) {
    p = rect(0, 0, 1, 1);
  } else if (name == "lshape" && args.empty()) {
    p = Polygon{{{0, 0}, {1, 0}, {1, 0.5}, {0.5, 0.5}, {0.5, 1}, {0, 1}}};
  } else if (name == "rect") {
    auto v = split(args, ',');
    if (v.size() != 4) throw std::invalid_argument("rect expects x0,y0,x1,y1");
    double x0 = parse_double(v[0]), y0 = parse_double(v[1]), x1 = parse_double(v[2]), y1 = parse_double(v[3]);
    if (!(x1 > x0 && y1 > y0)) throw std::invalid_argument("rect must have positive extent");
    p = rect(x0, y0, x1, y1);
  } else if (name == "polygon") {
    for (const std::string& pt : split(args, ';')) {
      auto v = split(pt, ',');
      if (v.size() != 2) throw std::invalid_argument("polygon expects x,y;x,y;...");
      p.vertices.push_back({parse_double(v[0]), parse_double(v[1])});
    }
  } else {
    throw std::invalid_argument("unknown domain '" + spec + "'");
  }
  Domain d(p);
  d.set_spec(spec);
  return d;
}

// ---- MapOracle ----

MapOracle::MapOracle(Domain domain, double L) : domain_(std::move(domain)), L_(L) {
  if (!(L >= 1.0) || !std::isfinite(L)) throw std::invalid_argument("declared L must be >= 1");
  double diam = domain_.diameter();
  h_ = 1e-6 * diam;
  tol_ = 1e-9 * diam;
}

Point2 MapOracle::eval(Point2 z) const {
  if (!domain_.contains(z, tol_)) throw std::domain_error("point outside domain");
  return map(z);
}

Mat2 MapOracle::diff(Point2 z) const {
  if (!analytic_jacobian()) return fd_diff(z);
  if (!domain_.contains(z, tol_)) throw std::domain_error("point outside domain");
  return jacobian(z);
}

Mat2 MapOracle::fd_diff(Point2 z) const {
  for (Point2 d : {Point2{h_, 0}, Point2{-h_, 0}, Point2{0, h_}, Point2{0, -h_}})
    if (!domain_.contains(z + d, tol_)) throw std::domain_error("difference stencil leaves domain");
  return central_difference(z);
}

Mat2 MapOracle::central_difference(Point2 z) const {
  Point2 dx = (map(z + Point2{h_, 0}) - map(z - Point2{h_, 0})) * (0.5 / h_);
  Point2 dy = (map(z + Point2{0, h_}) - map(z - Point2{0, h_})) * (0.5 / h_);
  return {dx.x, dy.x, dx.y, dy.y};
}

Mat2 MapOracle::jacobian(Point2 z) const { return central_difference(z); }

Point2 MapOracle::grid_seed(Point2 w) const {
  const BBox& b = domain_.box();
  constexpr int n = 24;
  Point2 best = 0.5 * (b.lo + b.hi);
  double bd = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) {
      Point2 z{b.lo.x + (b.hi.x - b.lo.x) * i / n, b.lo.y + (b.hi.y - b.lo.y) * j / n};
      if (!domain_.contains(z, tol_)) continue;
      double d = dist(map(z), w);
      if (d < bd) {
        bd = d;
        best = z;
      }
    }
  return best;
}

Point2 MapOracle::newton(Point2 w, Point2 z) const {
  double scale = std::max(1.0, domain_.diameter());
  Point2 f = map(z) - w;
  double r = norm(f);
  for (int it = 0; it < 100 && r > 1e-14 * scale; ++it) {
    Mat2 J = jacobian(z);
    if (J.det() == 0.0) break;
    Point2 step = J.inverse() * f;
    double lam = 1.0;
    bool moved = false;
    while (lam > 1e-8) {
      Point2 zn = z - lam * step;
      Point2 fn = map(zn) - w;
      double rn = norm(fn);
      if (rn < r) {
        z = zn;
        f = fn;
        r = rn;
        moved = true;
        break;
      }
      lam *= 0.5;
    }
    if (!moved) break;
  }
  if (!(r <= 1e-10 * scale)) throw std::runtime_error("inverse did not converge");
  return z;
}

Point2 MapOracle::inverse_ext(Point2 w, const Point2* seed) const {
  if (auto z = inverse_closed(w)) return *z;
  return newton(w, seed ? *seed : grid_seed(w));
}

Point2 MapOracle::invert(Point2 w) const {
  Point2 z = inverse_ext(w, nullptr);
  double scale = std::max(1.0, domain_.diameter());
  if (!(dist(map(z), w) <= 1e-10 * scale)) throw std::runtime_error("inverse residual too large");
  if (!domain_.contains(z, tol_)) throw std::runtime_error("point not in the image of the domain");
  return z;
}

// ---- builtins ----

IdentityMap::IdentityMap(Domain d) : MapOracle(std::move(d), 1.0) {}

AffineMap::AffineMap(Domain d, Mat2 M, Point2 b)
    : MapOracle(std::move(d), std::max(1.0, bilip_constant(M))), M_(M), b_(b) {
  if (!(M.det() > 0.0)) throw std::invalid_argument("affine map must have positive determinant");
  Minv_ = M.inverse();
}

std::string AffineMap::spec() const {
  return "affine:a11=" + num(M_.a11) + ",a12=" + num(M_.a12) + ",a21=" + num(M_.a21) + ",a22=" + num(M_.a22) +
         ",b1=" + num(b_.x) + ",b2=" + num(b_.y);
}

ShearSineMap::ShearSineMap(Domain d, double a, double k)
    : MapOracle(std::move(d), shear_constant(2.0 * std::numbers::pi * a * k)), a_(a), k_(k) {}

std::string ShearSineMap::spec() const { return "shear_sine:a=" + num(a_) + ",k=" + num(k_); }

Point2 ShearSineMap::map(Point2 z) const {
  return {z.x + a_ * std::sin(2.0 * std::numbers::pi * k_ * z.y), z.y};
}

Mat2 ShearSineMap::jacobian(Point2 z) const {
  double w = 2.0 * std::numbers::pi * k_;
  return {1.0, a_ * w * std::cos(w * z.y), 0.0, 1.0};
}

std::optional<Point2> ShearSineMap::inverse_closed(Point2 w) const {
  return Point2{w.x - a_ * std::sin(2.0 * std::numbers::pi * k_ * w.y), w.y};
}

namespace {
double max_radius(const Domain& d, Point2 c) {
  double m = 0.0;
  for (Point2 p : d.boundary().vertices) m = std::max(m, dist(p, c));
  return m;
}
}  // namespace

PolarTwistMap::PolarTwistMap(Domain d, double tau, Point2 c)
    : MapOracle(d, shear_constant(tau * max_radius(d, c))), tau_(tau), c_(c) {}

std::string PolarTwistMap::spec() const {
  return "polar_twist:tau=" + num(tau_) + ",cx=" + num(c_.x) + ",cy=" + num(c_.y);
}

Point2 PolarTwistMap::map(Point2 z) const {
  Point2 d = z - c_;
  return c_ + Mat2::rotation(tau_ * norm(d)) * d;
}

Mat2 PolarTwistMap::jacobian(Point2 z) const {
  Point2 d = z - c_;
  double rho = norm(d);
  Mat2 R = Mat2::rotation(tau_ * rho);
  if (rho == 0.0) return R;
  // R (I + tau J d d^T / rho), J the quarter turn
  Point2 jd{-d.y, d.x};
  Mat2 A{1.0 + tau_ * jd.x * d.x / rho, tau_ * jd.x * d.y / rho, tau_ * jd.y * d.x / rho,
         1.0 + tau_ * jd.y * d.y / rho};
  return R * A;
}

std::optional<Point2> PolarTwistMap::inverse_closed(Point2 w) const {
  Point2 e = w - c_;
  return c_ + Mat2::rotation(-tau_ * norm(e)) * e;
}

FoldMap::FoldMap(Domain d, double s, double x0, double w, Point2 c)
    : MapOracle(std::move(d), 1.0), s_(s), x0_(x0), w_(w), c_(c) {
  if (!(w > 0.0)) throw std::invalid_argument("fold strip width must be positive");
  const BBox& b = domain_.box();
  double L = 1.0;
  constexpr int nx = 1024, ny = 128;
  for (int i = 0; i <= nx; ++i)
    for (int j = 0; j <= ny; ++j) {
      Point2 z{b.lo.x + (b.hi.x - b.lo.x) * i / nx, b.lo.y + (b.hi.y - b.lo.y) * j / ny};
      if (!domain_.contains(z, tol_)) continue;
      Mat2 J = jacobian(z);
      if (!(J.det() > 0.0)) throw std::invalid_argument("fold map reverses orientation on the domain");
      L = std::max(L, bilip_constant(J));
    }
  set_L(1.02 * L);
}

std::string FoldMap::spec() const {
  return "fold_candidate:s=" + num(s_) + ",x0=" + num(x0_) + ",w=" + num(w_) + ",cx=" + num(c_.x) +
         ",cy=" + num(c_.y);
}

double FoldMap::theta(double x) const {
  double t = std::clamp((x - x0_) / w_ + 0.5, 0.0, 1.0);
  return -s_ * t * t * (3.0 - 2.0 * t);
}

double FoldMap::dtheta(double x) const {
  double t = (x - x0_) / w_ + 0.5;
  if (t <= 0.0 || t >= 1.0) return 0.0;
  return -s_ * 6.0 * t * (1.0 - t) / w_;
}

Point2 FoldMap::map(Point2 z) const { return c_ + Mat2::rotation(theta(z.x)) * (z - c_); }

Mat2 FoldMap::jacobian(Point2 z) const {
  double d = dtheta(z.x);
  Mat2 A{1.0 - d * (z.y - c_.y), 0.0, d * (z.x - c_.x), 1.0};
  return Mat2::rotation(theta(z.x)) * A;
}

// ---- sampled ----

SampledMap::SampledMap(Domain d, double L, std::vector<double> xs, std::vector<double> ys,
                       std::vector<Point2> values, std::string path)
    : MapOracle(std::move(d), L), xs_(std::move(xs)), ys_(std::move(ys)), vals_(std::move(values)),
      path_(std::move(path)) {
  if (xs_.size() < 2 || ys_.size() < 2 || vals_.size() != xs_.size() * ys_.size())
    throw std::invalid_argument("sampled map needs at least a 2x2 grid");
}

void SampledMap::locate(Point2 z, std::size_t& i, std::size_t& j, double& s, double& t) const {
  auto cell = [](const std::vector<double>& v, double x) {
    auto it = std::upper_bound(v.begin(), v.end(), x);
    std::size_t k = it == v.begin() ? 0 : static_cast<std::size_t>(it - v.begin()) - 1;
    return std::min(k, v.size() - 2);
  };
  i = cell(xs_, z.x);
  j = cell(ys_, z.y);
  s = (z.x - xs_[i]) / (xs_[i + 1] - xs_[i]);
  t = (z.y - ys_[j]) / (ys_[j + 1] - ys_[j]);
}

Point2 SampledMap::map(Point2 z) const {
  std::size_t i, j;
  double s, t;
  locate(z, i, j, s, t);
  std::size_t nx = xs_.size();
  Point2 v00 = vals_[j * nx + i], v10 = vals_[j * nx + i + 1], v01 = vals_[(j + 1) * nx + i],
         v11 = vals_[(j + 1) * nx + i + 1];
  return (1 - s) * (1 - t) * v00 + s * (1 - t) * v10 + (1 - s) * t * v01 + s * t * v11;
}

Mat2 SampledMap::jacobian(Point2 z) const {
  std::size_t i, j;
  double s, t;
  locate(z, i, j, s, t);
  std::size_t nx = xs_.size();
  Point2 v00 = vals_[j * nx + i], v10 = vals_[j * nx + i + 1], v01 = vals_[(j + 1) * nx + i],
         v11 = vals_[(j + 1) * nx + i + 1];
  double hx = xs_[i + 1] - xs_[i], hy = ys_[j + 1] - ys_[j];
  Point2 dx = ((1 - t) * (v10 - v00) + t * (v11 - v01)) * (1.0 / hx);
  Point2 dy = ((1 - s) * (v01 - v00) + s * (v11 - v10)) * (1.0 / hy);
  return {dx.x, dy.x, dx.y, dy.y};
}

std::unique_ptr<SampledMap> read_sampled_map(const std::string& path, const std::optional<Domain>& domain) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open sampled map '" + path + "'");
  std::string tag;
  std::size_t rows = 0, cols = 0;
  double L = 0.0;
  if (!(in >> tag >> rows >> cols >> L) || tag != "SAMPLEDMAP")
    throw std::runtime_error("bad SAMPLEDMAP header in '" + path + "'");
  if (rows < 2 || cols < 2) throw std::runtime_error("sampled map needs at least 2 rows and 2 columns");
  struct Rec {
    double zx, zy, ux, uy;
  };
  std::vector<Rec> recs;
  recs.reserve(rows * cols);
  Rec r{};
  while (in >> r.zx >> r.zy >> r.ux >> r.uy) recs.push_back(r);
  if (!in.eof()) throw std::runtime_error("malformed sample line in '" + path + "'");
  if (recs.size() != rows * cols) throw std::runtime_error("sample count does not match header");
  std::vector<double> xs, ys;
  for (const Rec& q : recs) {
    xs.push_back(q.zx);
    ys.push_back(q.zy);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
  if (xs.size() != cols || ys.size() != rows) throw std::runtime_error("samples do not form a regular grid");
  std::vector<Point2> vals(rows * cols);
  std::vector<char> seen(rows * cols, 0);
  for (const Rec& q : recs) {
    std::size_t i = static_cast<std::size_t>(std::lower_bound(xs.begin(), xs.end(), q.zx) - xs.begin());
    std::size_t j = static_cast<std::size_t>(std::lower_bound(ys.begin(), ys.end(), q.zy) - ys.begin());
    if (seen[j * cols + i]) throw std::runtime_error("duplicate grid sample");
    seen[j * cols + i] = 1;
    vals[j * cols + i] = {q.ux, q.uy};
  }
  Domain d = domain ? *domain : Domain(rect(xs.front(), ys.front(), xs.back(), ys.back()));
  if (!domain) d.set_spec("rect:" + num(xs.front()) + "," + num(ys.front()) + "," + num(xs.back()) + "," + num(ys.back()));
  for (Point2 p : d.boundary().vertices)
    if (p.x < xs.front() || p.x > xs.back() || p.y < ys.front() || p.y > ys.back())
      throw std::runtime_error("domain extends beyond the sampled grid");
  return std::make_unique<SampledMap>(d, L, xs, ys, vals, path);
}

void write_sampled_map(const MapOracle& o, std::size_t rows, std::size_t cols, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  const BBox& b = o.domain().box();
  // headroom for the bilinear interpolant
  out << "SAMPLEDMAP " << rows << ' ' << cols << ' ' << num(1.05 * o.L()) << '\n';
  for (std::size_t j = 0; j < rows; ++j)
    for (std::size_t i = 0; i < cols; ++i) {
      double x = i + 1 == cols ? b.hi.x : b.lo.x + (b.hi.x - b.lo.x) * static_cast<double>(i) / (cols - 1);
      double y = j + 1 == rows ? b.hi.y : b.lo.y + (b.hi.y - b.lo.y) * static_cast<double>(j) / (rows - 1);
      Point2 u = o.map({x, y});
      out << num(x) << ' ' << num(y) << ' ' << num(u.x) << ' ' << num(u.y) << '\n';
    }
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::unique_ptr<MapOracle> make_map(const std::string& spec, const std::optional<Domain>& domain) {
  auto colon = spec.find(':');
  std::string name = spec.substr(0, colon);
  std::string args = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (name == "sampled") {
    if (args.empty()) throw std::invalid_argument("sampled map needs a path");
    return read_sampled_map(args, domain);
  }
  Domain d = domain ? *domain : parse_domain("unit_square");
  if (name == "identity") {
    parse_params(args, {});
    return std::make_unique<IdentityMap>(d);
  }
  if (name == "affine") {
    auto p = parse_params(args, {{"a11", 1}, {"a12", 0}, {"a21", 0}, {"a22", 1}, {"b1", 0}, {"b2", 0}});
    return std::make_unique<AffineMap>(d, Mat2{p["a11"], p["a12"], p["a21"], p["a22"]}, Point2{p["b1"], p["b2"]});
  }
  if (name == "shear_sine") {
    auto p = parse_params(args, {{"a", 0.1}, {"k", 1}});
    return std::make_unique<ShearSineMap>(d, p["a"], p["k"]);
  }
  if (name == "polar_twist") {
    auto p = parse_params(args, {{"tau", 1}, {"cx", 0.5}, {"cy", 0.5}});
    return std::make_unique<PolarTwistMap>(d, p["tau"], Point2{p["cx"], p["cy"]});
  }
  if (name == "fold_candidate") {
    auto p = parse_params(args, {{"s", 1.5}, {"x0", 0.5625}, {"w", 0.1875}, {"cx", 1}, {"cy", 0}});
    return std::make_unique<FoldMap>(d, p["s"], p["x0"], p["w"], Point2{p["cx"], p["cy"]});
  }
  throw std::invalid_argument("unknown map '" + spec + "'");
}

double estimate_L(const MapOracle& o, int samples) {
  if (samples < 2) throw std::invalid_argument("estimate_L needs samples >= 2");
  const Domain& d = o.domain();
  const BBox& b = d.box();
  double best = 1.0;
  for (int i = 0; i < samples; ++i)
    for (int j = 0; j < samples; ++j) {
      Point2 z{b.lo.x + (b.hi.x - b.lo.x) * i / (samples - 1), b.lo.y + (b.hi.y - b.lo.y) * j / (samples - 1)};
      if (!d.contains(z)) continue;
      best = std::max(best, bilip_constant(o.diff(z)));
    }
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> ux(b.lo.x, b.hi.x), uy(b.lo.y, b.hi.y);
  auto draw = [&] {
    for (;;) {
      Point2 z{ux(rng), uy(rng)};
      if (d.contains(z)) return z;
    }
  };
  long pairs = static_cast<long>(samples) * samples;
  for (long k = 0; k < pairs; ++k) {
    Point2 z = draw(), w = draw();
    double dz = dist(z, w);
    if (dz == 0.0) continue;
    double du = dist(o.map(z), o.map(w));
    best = std::max({best, du / dz, dz / du});
  }
  return best;
}

}  // namespace bilip
