#include "bilip/extension.hpp"

#include <Eigen/Sparse>
#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <unordered_map>

namespace bilip {

namespace {

constexpr double kSideTol = 1e-9;

// perimeter parameter in [0, 4), counterclockwise from the south-west corner
double perimeter_param(const Square& sq, Point2 p) {
  Point2 lo = sq.lo(), hi = sq.hi();
  double s = sq.side, tol = kSideTol * s;
  if (std::abs(p.y - lo.y) <= tol && p.x >= lo.x - tol && p.x < hi.x - tol) return (p.x - lo.x) / s;
  if (std::abs(p.x - hi.x) <= tol && p.y >= lo.y - tol && p.y < hi.y - tol) return 1.0 + (p.y - lo.y) / s;
  if (std::abs(p.y - hi.y) <= tol && p.x <= hi.x + tol && p.x > lo.x + tol) return 2.0 + (hi.x - p.x) / s;
  if (std::abs(p.x - lo.x) <= tol && p.y <= hi.y + tol && p.y > lo.y + tol) return 3.0 + (hi.y - p.y) / s;
  return -1.0;
}

// bit k set when p is on closed side k (bottom, right, top, left)
unsigned side_mask(const Square& sq, Point2 p) {
  Point2 lo = sq.lo(), hi = sq.hi();
  double tol = kSideTol * sq.side;
  unsigned m = 0;
  if (std::abs(p.y - lo.y) <= tol) m |= 1u;
  if (std::abs(p.x - hi.x) <= tol) m |= 2u;
  if (std::abs(p.y - hi.y) <= tol) m |= 4u;
  if (std::abs(p.x - lo.x) <= tol) m |= 8u;
  return m;
}

struct Affine {
  Mat2 A;
  Point2 c;
  Point2 operator()(Point2 z) const { return A * z + c; }
};

std::optional<Affine> affine_fit(const std::vector<Point2>& z, const std::vector<Point2>& w) {
  std::size_t n = z.size();
  Point2 mz, mw;
  for (std::size_t i = 0; i < n; ++i) {
    mz = mz + z[i];
    mw = mw + w[i];
  }
  mz = (1.0 / n) * mz;
  mw = (1.0 / n) * mw;
  Mat2 sxx, swx;
  for (std::size_t i = 0; i < n; ++i) {
    Point2 dz = z[i] - mz, dw = w[i] - mw;
    sxx = sxx + Mat2{dz.x * dz.x, dz.x * dz.y, dz.y * dz.x, dz.y * dz.y};
    swx = swx + Mat2{dw.x * dz.x, dw.x * dz.y, dw.y * dz.x, dw.y * dz.y};
  }
  try {
    Mat2 A = swx * sxx.inverse();
    if (!(A.det() > 0.0)) return std::nullopt;
    return Affine{A, mw - A * mz};
  } catch (const std::domain_error&) {
    return std::nullopt;
  }
}

BBox box_of(const std::vector<Point2>& pts) {
  BBox b;
  for (Point2 p : pts) b.add(p);
  return b;
}

bool all_positive(const std::vector<Point2>& pts, const std::vector<std::array<int, 3>>& tris) {
  Snapper sn(box_of(pts));
  for (const auto& t : tris)
    if (orient(sn.snap(pts[t[0]]), sn.snap(pts[t[1]]), sn.snap(pts[t[2]])) <= 0) return false;
  return true;
}

double mesh_bilip(const std::vector<Point2>& dom, const std::vector<Point2>& img,
                  const std::vector<std::array<int, 3>>& tris) {
  PAMap m;
  m.domain.vertices = dom;
  m.domain.triangles = tris;
  m.image = img;
  return measured_bilip(m);
}

double min_angle(Point2 a, Point2 b, Point2 c) {
  auto ang = [](Point2 p, Point2 q, Point2 r) {
    Point2 u = q - p, v = r - p;
    return std::atan2(std::abs(cross(u, v)), dot(u, v));
  };
  return std::min({ang(a, b, c), ang(b, c, a), ang(c, a, b)});
}

std::vector<std::array<int, 3>> ear_clip(const std::vector<Point2>& poly) {
  Snapper sn(box_of(poly));
  const int n = static_cast<int>(poly.size());
  std::vector<I2> q(n);
  for (int i = 0; i < n; ++i) q[i] = sn.snap(poly[i]);
  std::vector<int> prev(n), next(n);
  for (int i = 0; i < n; ++i) {
    prev[i] = (i + n - 1) % n;
    next[i] = (i + 1) % n;
  }
  std::vector<char> alive(n, 1), ear(n, 0);
  std::vector<double> score(n, -1.0);
  // only vertices that are not strictly convex can lie in an ear
  std::vector<int> blockers;
  for (int i = 0; i < n; ++i)
    if (orient(q[prev[i]], q[i], q[next[i]]) <= 0) blockers.push_back(i);
  auto update = [&](int b) {
    int a = prev[b], c = next[b];
    ear[b] = 0;
    if (orient(q[a], q[b], q[c]) <= 0) return;
    for (int v : blockers) {
      if (!alive[v] || v == a || v == b || v == c) continue;
      if (point_in_triangle(q[v], q[a], q[b], q[c])) return;
    }
    ear[b] = 1;
    score[b] = min_angle(poly[a], poly[b], poly[c]);
  };
  for (int i = 0; i < n; ++i) update(i);
  std::vector<std::array<int, 3>> tris;
  int remaining = n;
  while (remaining > 3) {
    int best = -1;
    for (int i = 0; i < n; ++i)
      if (alive[i] && ear[i] && (best < 0 || score[i] > score[best])) best = i;
    if (best < 0) throw std::runtime_error("ear clipping found no ear");
    int a = prev[best], c = next[best];
    tris.push_back({a, best, c});
    alive[best] = 0;
    next[a] = c;
    prev[c] = a;
    --remaining;
    std::erase_if(blockers, [&](int v) { return !alive[v]; });
    update(a);
    update(c);
  }
  int a = -1;
  for (int i = 0; i < n; ++i)
    if (alive[i]) {
      a = i;
      break;
    }
  int b = next[a], c = next[b];
  if (orient(q[a], q[b], q[c]) <= 0) throw std::runtime_error("ear clipping left a degenerate triangle");
  tris.push_back({a, b, c});
  return tris;
}

}  // namespace

void validate_boundary_map(const BoundaryMap& bm) {
  std::size_t n = bm.breakpoints.size();
  if (!(bm.square.side > 0.0)) throw std::invalid_argument("square side must be positive");
  if (n < 4 || bm.images.size() != n) throw std::invalid_argument("boundary map needs matching breakpoints and images");
  std::vector<double> t(n);
  int corners = 0;
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = perimeter_param(bm.square, bm.breakpoints[i]);
    if (t[i] < 0.0) throw std::invalid_argument("breakpoint off the square boundary");
    double frac = t[i] - std::floor(t[i] + kSideTol);
    if (std::abs(frac) <= kSideTol) ++corners;
  }
  if (corners != 4) throw std::invalid_argument("the four corners must be breakpoints");
  int descents = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (t[(i + 1) % n] <= t[i]) ++descents;
  if (descents != 1) throw std::invalid_argument("breakpoints are not counterclockwise along the square");
  Polygon img{bm.images};
  if (!polygon_is_simple(img)) throw std::invalid_argument("image polygon is not simple");
  if (!(polygon_signed_area(img) > 0.0)) throw std::invalid_argument("image polygon is not counterclockwise");
}

namespace {

constexpr int kMaxSplitDepth = 5;

// centroid of the vertices of the kernel of a ccw polygon, if the kernel has interior
std::optional<Point2> kernel_point(const std::vector<Point2>& poly) {
  BBox b = box_of(poly);
  double pad = b.diameter();
  std::vector<Point2> k{{b.lo.x - pad, b.lo.y - pad}, {b.hi.x + pad, b.lo.y - pad}, {b.hi.x + pad, b.hi.y + pad},
                        {b.lo.x - pad, b.hi.y + pad}};
  std::size_t n = poly.size();
  for (std::size_t i = 0; i < n && !k.empty(); ++i) {
    Point2 a = poly[i], d = poly[(i + 1) % n] - a;
    std::vector<Point2> out;
    for (std::size_t j = 0; j < k.size(); ++j) {
      Point2 p = k[j], q = k[(j + 1) % k.size()];
      double sp = cross(d, p - a), sq = cross(d, q - a);
      if (sp >= 0.0) out.push_back(p);
      if ((sp > 0.0 && sq < 0.0) || (sp < 0.0 && sq > 0.0)) out.push_back(lerp(p, q, sp / (sp - sq)));
    }
    k = std::move(out);
  }
  if (k.size() < 3 || !(polygon_signed_area(Polygon{k}) > 0.0)) return std::nullopt;
  Point2 c;
  for (Point2 p : k) c = c + p;
  return (1.0 / k.size()) * c;
}

std::optional<ExtensionMesh> try_fan(const BoundaryMap& bm, const std::optional<Affine>& fit,
                                     const ExtensionOptions& opts) {
  const int N = static_cast<int>(bm.breakpoints.size());
  std::vector<std::array<int, 3>> tris;
  for (int i = 0; i < N; ++i) tris.push_back({N, i, (i + 1) % N});
  std::vector<Point2> dom = bm.breakpoints;
  dom.push_back(bm.square.center);
  std::vector<Point2> candidates;
  if (opts.forward) candidates.push_back(opts.forward(bm.square.center));
  if (fit) candidates.push_back((*fit)(bm.square.center));
  {
    double a = 0.0;
    Point2 c;
    for (int i = 0; i < N; ++i) {
      Point2 p = bm.images[i], q = bm.images[(i + 1) % N];
      double w = cross(p, q);
      a += w;
      c = c + w * (p + q);
    }
    candidates.push_back((1.0 / (3.0 * a)) * c);
  }
  if (auto kp = kernel_point(bm.images)) candidates.push_back(*kp);
  std::optional<ExtensionMesh> em;
  double best = std::numeric_limits<double>::infinity();
  for (Point2 cand : candidates) {
    if (!finite(cand)) continue;
    std::vector<Point2> img = bm.images;
    img.push_back(cand);
    if (!all_positive(img, tris)) continue;
    double b = mesh_bilip(dom, img, tris);
    if (b < best) {
      best = b;
      em.emplace();
      em->map.domain.vertices = dom;
      em->map.domain.triangles = tris;
      em->map.image = std::move(img);
      em->boundary_count = bm.breakpoints.size();
      em->method = "fan";
    }
  }
  return em;
}

// image-side ear clipping, same-side chords split, interior vertices placed between
// the pulled-back positions and the Tutte embedding
std::optional<ExtensionMesh> try_compatible(const BoundaryMap& bm, const std::optional<Affine>& fit,
                                            const ExtensionOptions& opts) {
  const std::size_t n = bm.breakpoints.size();
  const int N = static_cast<int>(n);
  std::vector<Point2> img = bm.images;
  std::vector<std::array<int, 3>> tris;
  try {
    tris = ear_clip(img);
  } catch (const std::runtime_error&) {
    return std::nullopt;
  }
  std::vector<unsigned> mask(n);
  for (std::size_t i = 0; i < n; ++i) mask[i] = side_mask(bm.square, bm.breakpoints[i]);
  auto boundary_edge = [&](int a, int b) { return b == (a + 1) % N || a == (b + 1) % N; };
  for (;;) {
    int ea = -1, eb = -1;
    for (const auto& t : tris) {
      for (int k = 0; k < 3 && ea < 0; ++k) {
        int a = t[k], b = t[(k + 1) % 3];
        if (a < N && b < N && !boundary_edge(a, b) && (mask[a] & mask[b])) ea = a, eb = b;
      }
      if (ea >= 0) break;
    }
    if (ea < 0) break;
    int s = static_cast<int>(img.size());
    img.push_back(0.5 * (img[ea] + img[eb]));
    std::vector<std::array<int, 3>> next;
    for (const auto& t : tris) {
      int k = -1;
      for (int j = 0; j < 3; ++j)
        if ((t[j] == ea && t[(j + 1) % 3] == eb) || (t[j] == eb && t[(j + 1) % 3] == ea)) k = j;
      if (k < 0) {
        next.push_back(t);
        continue;
      }
      int x = t[k], y = t[(k + 1) % 3], c = t[(k + 2) % 3];
      next.push_back({x, s, c});
      next.push_back({s, y, c});
    }
    tris = std::move(next);
  }

  std::size_t m = img.size() - n;
  std::vector<Point2> tutte(img.size());
  for (std::size_t i = 0; i < n; ++i) tutte[i] = bm.breakpoints[i];
  if (m > 0) {
    std::vector<std::vector<int>> nb(img.size());
    for (const auto& t : tris)
      for (int k = 0; k < 3; ++k) {
        nb[t[k]].push_back(t[(k + 1) % 3]);
        nb[t[k]].push_back(t[(k + 2) % 3]);
      }
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd bx = Eigen::VectorXd::Zero(m), by = Eigen::VectorXd::Zero(m);
    for (std::size_t i = n; i < img.size(); ++i) {
      auto& l = nb[i];
      std::sort(l.begin(), l.end());
      l.erase(std::unique(l.begin(), l.end()), l.end());
      int row = static_cast<int>(i - n);
      trip.emplace_back(row, row, static_cast<double>(l.size()));
      for (int j : l) {
        if (j >= N)
          trip.emplace_back(row, j - N, -1.0);
        else {
          bx[row] += bm.breakpoints[j].x;
          by[row] += bm.breakpoints[j].y;
        }
      }
    }
    Eigen::SparseMatrix<double> A(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    A.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(A);
    if (solver.info() != Eigen::Success) return std::nullopt;
    Eigen::VectorXd x = solver.solve(bx), y = solver.solve(by);
    for (std::size_t i = 0; i < m; ++i) tutte[n + i] = {x[i], y[i]};
  }

  std::vector<Point2> pull(img.size());
  for (std::size_t i = 0; i < img.size(); ++i) {
    if (i < n) {
      pull[i] = bm.breakpoints[i];
      continue;
    }
    Point2 p{std::nan(""), std::nan("")};
    if (opts.backward) {
      try {
        p = opts.backward(img[i]);
      } catch (const std::exception&) {
      }
    }
    if (!finite(p) && fit) p = fit->A.inverse() * (img[i] - fit->c);
    pull[i] = finite(p) ? p : tutte[i];
  }

  for (double lambda : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    std::vector<Point2> dom(img.size());
    for (std::size_t i = 0; i < img.size(); ++i) dom[i] = i < n ? bm.breakpoints[i] : lerp(pull[i], tutte[i], lambda);
    if (!all_positive(dom, tris)) continue;
    ExtensionMesh em;
    em.map.domain.vertices = std::move(dom);
    em.map.domain.triangles = std::move(tris);
    em.map.image = std::move(img);
    em.boundary_count = n;
    em.method = "tutte";
    em.blend = lambda;
    return em;
  }
  return std::nullopt;
}

ExtensionMesh extend_impl(const BoundaryMap& bm, const ExtensionOptions& opts, int depth);

// four half-size squares with inner lines sampled from the forward guide
std::optional<ExtensionMesh> try_split(const BoundaryMap& bm, const ExtensionOptions& opts, int depth) {
  const std::size_t n = bm.breakpoints.size();
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = perimeter_param(bm.square, bm.breakpoints[i]);
  std::size_t i0 = static_cast<std::size_t>(std::min_element(t.begin(), t.end()) - t.begin());
  std::vector<Point2> B, W;
  std::vector<double> T;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t i = (i0 + k) % n;
    B.push_back(bm.breakpoints[i]);
    W.push_back(bm.images[i]);
    T.push_back(t[i]);
  }
  // exact corner coordinates from the data
  std::array<Point2, 4> C;
  for (std::size_t i = 0; i < n; ++i) {
    double r = std::round(T[i]);
    if (std::abs(T[i] - r) <= kSideTol && r < 4.0) C[static_cast<int>(r)] = B[i];
  }
  std::array<Point2, 4> M{Point2{0.5 * (C[0].x + C[1].x), C[0].y}, Point2{C[1].x, 0.5 * (C[1].y + C[2].y)},
                          Point2{0.5 * (C[2].x + C[3].x), C[2].y}, Point2{C[3].x, 0.5 * (C[3].y + C[0].y)}};
  Point2 c{M[0].x, M[1].y};
  // breakpoint sequence with the side midpoints present
  std::vector<Point2> B2, W2;
  std::array<std::size_t, 4> mi{};
  for (std::size_t i = 0; i < n; ++i) {
    B2.push_back(B[i]);
    W2.push_back(W[i]);
    double ta = T[i], tb = i + 1 < n ? T[i + 1] : 4.0;
    for (int k = 0; k < 4; ++k) {
      double tm = k + 0.5;
      if (std::abs(ta - tm) <= kSideTol) {
        mi[k] = B2.size() - 1;
        M[k] = B[i];
      } else if (ta < tm && tm < tb && std::abs(tb - tm) > kSideTol) {
        mi[k] = B2.size();
        B2.push_back(M[k]);
        // ordered endpoints so a neighbour inserting the same point gets the same bits
        Point2 pz = B[i], qz = i + 1 < n ? B[i + 1] : B[0];
        Point2 pw = W[i], qw = i + 1 < n ? W[i + 1] : W[0];
        if (std::pair(qz.x, qz.y) < std::pair(pz.x, pz.y)) std::swap(pz, qz), std::swap(pw, qw);
        double s = k % 2 == 0 ? (M[k].x - pz.x) / (qz.x - pz.x) : (M[k].y - pz.y) / (qz.y - pz.y);
        W2.push_back(lerp(pw, qw, s));
      }
    }
  }
  c = Point2{M[0].x, M[1].y};
  std::size_t n2 = B2.size();
  int m = static_cast<int>(std::clamp<std::size_t>(n / 8, 2, 32));
  Point2 uc = opts.forward(c);
  std::array<std::vector<Point2>, 4> line_z, line_w;  // interior points from M_k toward c
  for (int k = 0; k < 4; ++k)
    for (int j = 1; j < m; ++j) {
      Point2 z = lerp(M[k], c, static_cast<double>(j) / m);
      line_z[k].push_back(z);
      line_w[k].push_back(opts.forward(z));
    }
  std::vector<ExtensionMesh> parts;
  for (int k = 0; k < 4; ++k) {
    int km = (k + 3) % 4;
    BoundaryMap child;
    child.square = Square{0.5 * (C[k] + c), 0.5 * bm.square.side};
    for (std::size_t i = mi[km];; i = (i + 1) % n2) {
      child.breakpoints.push_back(B2[i]);
      child.images.push_back(W2[i]);
      if (i == mi[k]) break;
    }
    for (std::size_t j = 0; j < line_z[k].size(); ++j) {
      child.breakpoints.push_back(line_z[k][j]);
      child.images.push_back(line_w[k][j]);
    }
    child.breakpoints.push_back(c);
    child.images.push_back(uc);
    for (std::size_t j = line_z[km].size(); j-- > 0;) {
      child.breakpoints.push_back(line_z[km][j]);
      child.images.push_back(line_w[km][j]);
    }
    try {
      parts.push_back(extend_impl(child, opts, depth + 1));
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }
  ExtensionMesh em;
  em.boundary_count = n;
  em.method = "split";
  std::unordered_map<std::uint64_t, std::unordered_map<std::uint64_t, int>> ids;
  auto id_of = [&](Point2 z, Point2 w) {
    auto [it, fresh] = ids[std::bit_cast<std::uint64_t>(z.x)].try_emplace(std::bit_cast<std::uint64_t>(z.y),
                                                                          static_cast<int>(em.map.image.size()));
    if (fresh) {
      em.map.domain.vertices.push_back(z);
      em.map.image.push_back(w);
    }
    return it->second;
  };
  for (std::size_t i = 0; i < n; ++i) id_of(bm.breakpoints[i], bm.images[i]);
  for (const ExtensionMesh& p : parts) {
    std::vector<int> map(p.map.num_vertices());
    for (std::size_t i = 0; i < map.size(); ++i) map[i] = id_of(p.map.domain.vertices[i], p.map.image[i]);
    for (const auto& tr : p.map.domain.triangles) em.map.domain.triangles.push_back({map[tr[0]], map[tr[1]], map[tr[2]]});
  }
  conform_mesh(em.map);
  return em;
}

ExtensionMesh extend_impl(const BoundaryMap& bm, const ExtensionOptions& opts, int depth) {
  validate_boundary_map(bm);
  auto fit = affine_fit(bm.breakpoints, bm.images);
  auto fan = try_fan(bm, fit, opts);
  auto tutte = try_compatible(bm, fit, opts);
  if (fan && tutte) return measured_bilip(tutte->map) < measured_bilip(fan->map) ? std::move(*tutte) : std::move(*fan);
  if (fan) return std::move(*fan);
  if (tutte) return std::move(*tutte);
  if (opts.forward && depth < kMaxSplitDepth)
    if (auto em = try_split(bm, opts, depth)) return std::move(*em);
  throw std::runtime_error("could not untangle the extension");
}

}  // namespace

ExtensionMesh extend_square(const BoundaryMap& bm, const ExtensionOptions& opts) { return extend_impl(bm, opts, 0); }

std::vector<std::size_t> conform_mesh(PAMap& m) {
  std::vector<std::size_t> origin(m.num_triangles());
  for (std::size_t k = 0; k < origin.size(); ++k) origin[k] = k;
  for (;;) {
    std::map<std::pair<int, int>, std::size_t> owner;  // directed edge -> triangle
    for (std::size_t k = 0; k < m.num_triangles(); ++k) {
      const auto& t = m.domain.triangles[k];
      for (int j = 0; j < 3; ++j) owner[{t[j], t[(j + 1) % 3]}] = k;
    }
    std::vector<std::pair<int, int>> open;
    std::vector<int> verts;
    for (const auto& [e, k] : owner)
      if (!owner.count({e.second, e.first})) {
        open.push_back(e);
        verts.push_back(e.first);
      }
    if (open.empty()) break;
    std::sort(verts.begin(), verts.end());
    verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
    const auto& V = m.domain.vertices;
    BBox all;
    for (int v : verts) all.add(V[v]);
    Snapper sn(all);
    std::vector<IBox> boxes;
    for (const auto& [a, b] : open) {
      I2 p = sn.snap(V[a]), q = sn.snap(V[b]);
      boxes.push_back({std::min(p.x, q.x) - 1, std::min(p.y, q.y) - 1, std::max(p.x, q.x) + 1, std::max(p.y, q.y) + 1});
    }
    for (int v : verts) {
      I2 p = sn.snap(V[v]);
      boxes.push_back({p.x, p.y, p.x, p.y});
    }
    const std::size_t ne = open.size();
    std::vector<std::vector<std::pair<double, int>>> hits(ne);
    for_each_overlapping_pair(boxes, [&](std::size_t i, std::size_t j) {
      if (i > j) std::swap(i, j);
      if (i >= ne || j < ne) return true;
      auto [a, b] = open[i];
      int v = verts[j - ne];
      if (v == a || v == b) return true;
      Point2 d = V[b] - V[a], e = V[v] - V[a];
      double len2 = dot(d, d), s = dot(d, e) / len2;
      if (s > 1e-9 && s < 1.0 - 1e-9 && std::abs(cross(d, e)) <= 1e-9 * len2) hits[i].push_back({s, v});
      return true;
    });
    std::vector<char> split(m.num_triangles(), 0);
    std::vector<std::array<int, 3>> extra;
    std::vector<std::size_t> extra_origin;
    for (std::size_t i = 0; i < ne; ++i) {
      if (hits[i].empty()) continue;
      auto [a, b] = open[i];
      std::size_t k = owner[{a, b}];
      if (split[k]) continue;  // one edge per triangle per pass
      split[k] = 1;
      const auto& t = m.domain.triangles[k];
      int c = t[0] + t[1] + t[2] - a - b;
      std::sort(hits[i].begin(), hits[i].end());
      int prev = a;
      for (auto [s, v] : hits[i]) {
        extra.push_back({prev, v, c});
        extra_origin.push_back(origin[k]);
        prev = v;
      }
      extra.push_back({prev, b, c});
      extra_origin.push_back(origin[k]);
    }
    if (extra.empty()) break;
    std::vector<std::array<int, 3>> tris;
    std::vector<std::size_t> org;
    for (std::size_t k = 0; k < m.num_triangles(); ++k)
      if (!split[k]) {
        tris.push_back(m.domain.triangles[k]);
        org.push_back(origin[k]);
      }
    tris.insert(tris.end(), extra.begin(), extra.end());
    org.insert(org.end(), extra_origin.begin(), extra_origin.end());
    m.domain.triangles = std::move(tris);
    origin = std::move(org);
  }
  return origin;
}

double measured_bilip(const PAMap& m) {
  double best = 1.0;
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    double b = bilip_constant(m.gradient(t));
    if (!std::isfinite(b)) throw std::domain_error("degenerate triangle");
    best = std::max(best, b);
  }
  return best;
}

double boundary_bilip(const BoundaryMap& bm) {
  std::vector<Point2> z, w;
  std::size_t n = bm.breakpoints.size();
  for (std::size_t i = 0; i < n; ++i) {
    z.push_back(bm.breakpoints[i]);
    w.push_back(bm.images[i]);
    z.push_back(0.5 * (bm.breakpoints[i] + bm.breakpoints[(i + 1) % n]));
    w.push_back(0.5 * (bm.images[i] + bm.images[(i + 1) % n]));
  }
  double best = 1.0;
  for (std::size_t i = 0; i < z.size(); ++i)
    for (std::size_t j = i + 1; j < z.size(); ++j) {
      double dz = dist(z[i], z[j]), dw = dist(w[i], w[j]);
      if (dz == 0.0 || dw == 0.0) return std::numeric_limits<double>::infinity();
      best = std::max({best, dw / dz, dz / dw});
    }
  return best;
}

}  // namespace bilip
