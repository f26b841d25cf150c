#include "bilip/pipeline.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <unordered_map>

#include "bilip/format.hpp"
#include "bilip/parallel.hpp"

namespace bilip {

void validate_config(const PipelineConfig& c) {
  if (!(c.eps > 0.0) || !std::isfinite(c.eps)) throw std::invalid_argument("eps must be positive");
  if (!(c.p >= 1.0) || !std::isfinite(c.p)) throw std::invalid_argument("p must lie in [1, inf)");
  if (!(c.r0 > 0.0) || !std::isfinite(c.r0)) throw std::invalid_argument("r0 must be positive");
  if (c.max_halvings < 0 || c.max_halvings > 30) throw std::invalid_argument("max_halvings must lie in [0, 30]");
  if (c.quad_n < 1) throw std::invalid_argument("quad_n must be positive");
  if (c.max_depth < 0 || c.max_depth > 30) throw std::invalid_argument("max_depth must lie in [0, 30]");
  if (c.pairs < 1) throw std::invalid_argument("pairs must be positive");
  if (c.metric_quad_n < 1 || c.linf_samples < 1) throw std::invalid_argument("metric sample counts must be positive");
}

double internal_eps(double eps_bar, double L, double p) {
  if (!(eps_bar > 0.0 && L >= 1.0 && p >= 1.0)) throw std::invalid_argument("internal_eps: invalid arguments");
  double K = L + kC1 * std::pow(L, 4);
  auto g = [&](double e) {
    return e + 2.0 * K * std::pow(e, 1.0 / p) + 2.0 * (K * std::sqrt(e / std::numbers::pi) + e);
  };
  if (g(eps_bar) <= eps_bar) return eps_bar;
  double lo = 1e-300, hi = eps_bar;
  if (g(lo) > eps_bar) return lo;
  for (int it = 0; it < 200; ++it) {
    double mid = std::sqrt(lo * hi);
    if (mid <= lo || mid >= hi) break;
    (g(mid) <= eps_bar ? lo : hi) = mid;
  }
  return lo;
}

namespace {

class Stopwatch {
 public:
  double lap() {
    auto now = std::chrono::steady_clock::now();
    double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }
  double total() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now(), last_ = start_;
};

struct PointKey {
  std::uint64_t x, y;
  bool operator==(const PointKey&) const = default;
};
struct PointKeyHash {
  std::size_t operator()(const PointKey& k) const { return std::hash<std::uint64_t>()(k.x * 0x9E3779B97F4A7C15ULL ^ k.y); }
};

class Gluer {
 public:
  explicit Gluer(PAMap& m) : m_(m) {}
  void add(const PAMap& piece) {
    std::vector<int> ids(piece.num_vertices());
    for (std::size_t i = 0; i < ids.size(); ++i) {
      Point2 z = piece.domain.vertices[i], w = piece.image[i];
      PointKey k{std::bit_cast<std::uint64_t>(z.x), std::bit_cast<std::uint64_t>(z.y)};
      auto [it, fresh] = index_.try_emplace(k, static_cast<int>(m_.domain.vertices.size()));
      if (fresh) {
        m_.domain.vertices.push_back(z);
        m_.image.push_back(w);
      } else if (std::bit_cast<std::uint64_t>(m_.image[it->second].x) != std::bit_cast<std::uint64_t>(w.x) ||
                 std::bit_cast<std::uint64_t>(m_.image[it->second].y) != std::bit_cast<std::uint64_t>(w.y)) {
        throw std::runtime_error("glued pieces disagree at (" + num(z.x) + ", " + num(z.y) + ")");
      }
      ids[i] = it->second;
    }
    for (const auto& t : piece.domain.triangles) m_.domain.triangles.push_back({ids[t[0]], ids[t[1]], ids[t[2]]});
  }

 private:
  PAMap& m_;
  std::unordered_map<PointKey, int, PointKeyHash> index_;
};

BoundaryMap square_boundary(const Tiling& t, const GridQ& g, const GridMap& gm, std::size_t k) {
  BoundaryMap bm;
  bm.square = t.square(k);
  for (auto [side, forward] : g.square_sides[k]) {
    const SideMap& m = gm.sides[side];
    std::size_t n = m.z.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
      std::size_t j = forward ? i : n - 1 - i;
      bm.breakpoints.push_back(m.z[j]);
      bm.images.push_back(m.img[j]);
    }
  }
  return bm;
}

double safe_bilip(const PAMap& m, const TriangleMask& mask) {
  double best = 1.0;
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    if (!mask.empty() && !mask[t]) continue;
    double b;
    try {
      b = bilip_constant(m.gradient(t));
    } catch (const std::domain_error&) {
      b = std::numeric_limits<double>::infinity();
    }
    best = std::max(best, b);
  }
  return best;
}

template <class F>
double guarded(F&& f) {
  try {
    return f();
  } catch (const std::exception&) {
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace

RunArtifacts run(const PipelineConfig& cfg) {
  validate_config(cfg);
  RunArtifacts ra;
  ra.cfg = cfg;
  Stopwatch sw;
  Domain omega = parse_domain(cfg.domain_spec);
  std::unique_ptr<MapOracle> o = make_map(cfg.map_spec, omega);
  ra.map_spec = o->spec();
  ra.L = o->L();
  const double L = ra.L;
  ra.eps_internal = internal_eps(cfg.eps, L, cfg.p);
  auto& ex = ra.extras;
  auto put = [&](const std::string& k, const std::string& v) { ex.push_back({k, v}); };
  put("map_canonical", ra.map_spec);
  put("L", num(L));
  put("eps_internal", num(ra.eps_internal));
  put("c1_ceiling", num(kC1 * std::pow(L, 4)));
  put("domain_convex", omega.convex() ? "true" : "false");

  try {
    if (cfg.naive) {
      InterpolationMesh im = naive_interpolation(*o, cfg.r0);
      ra.mesh = std::move(im.map);
      ra.eps_triangle.assign(ra.mesh.num_triangles(), 0);
      ra.report.r = cfg.r0;
      ra.report.area_deficit = std::max(0.0, omega.area() - static_cast<double>(im.cells.size()) * cfg.r0 * cfg.r0);
      ra.timings.push_back({"interpolate", sw.lap()});
    } else {
      for (int k = 0; k <= cfg.max_halvings; ++k) {
        RAttempt at;
        at.r = std::ldexp(cfg.r0, -k);
        at.eta = eta_budget(L, ra.eps_internal, cfg.p, at.r, omega.area());
        at.delta = delta_of_eta(at.eta, L);
        ra.cls = classify(*o, at.r, at.delta, cfg.quad_n);
        at.accepted = ra.cls.accepted.cells.size();
        at.area_deficit = ra.cls.area_deficit;
        ra.attempts.push_back(at);
        if (at.area_deficit <= ra.eps_internal) break;
      }
      const RAttempt& fin = ra.attempts.back();
      ra.report.r = fin.r;
      ra.report.eta = fin.eta;
      ra.report.delta = fin.delta;
      ra.report.area_deficit = fin.area_deficit;
      ra.timings.push_back({"classify", sw.lap()});
      std::string hist;
      for (const RAttempt& a : ra.attempts) {
        if (!hist.empty()) hist += ';';
        hist += num(a.r) + ":" + std::to_string(a.accepted) + ":" + num(a.area_deficit);
      }
      put("r_attempts", hist);
      put("halving_cap_reached", fin.area_deficit > ra.eps_internal ? "true" : "false");

      double r = fin.r;
      ra.omega_eps.r = r;
      ra.omega_eps.origin = ra.cls.origin;
      bool aligned = omega.aligned_to(ra.cls.origin, r);
      for (Cell c : ra.cls.accepted.cells) {
        // quadtree balancing needs room between the frozen squares and the boundary
        if (!aligned) {
          Point2 lo = lattice_point(ra.cls.origin, r, c.i - 4, c.j - 4);
          Point2 hi = lattice_point(ra.cls.origin, r, c.i + 5, c.j + 5);
          if (!box_compactly_inside(omega, lo, hi)) continue;
        }
        ra.omega_eps.cells.push_back(c);
      }
      put("omega_eps.squares", std::to_string(ra.omega_eps.cells.size()));
      PAMap eps_mesh;
      if (!ra.omega_eps.cells.empty()) eps_mesh = interpolate_cells(*o, ra.omega_eps).map;
      ra.timings.push_back({"interpolate", sw.lap()});

      ra.tiling = build_tiling(omega, ra.omega_eps, cfg.max_depth);
      put("tiling.squares", std::to_string(ra.tiling.squares.size()));
      put("tiling.uniform", ra.tiling.uniform ? "true" : "false");
      put("uncovered_area", num(ra.tiling.uncovered_area));
      ra.grid = build_grid(ra.tiling, omega);
      put("grid.vertices", std::to_string(ra.grid.vertices.size()));
      put("grid.sides", std::to_string(ra.grid.sides.size()));
      ra.timings.push_back({"tiling", sw.lap()});

      GridMap bmap = eps_boundary_map(*o, ra.grid);
      std::vector<int> need;
      for (std::size_t v = 0; v < ra.grid.vertices.size(); ++v)
        if (ra.grid.vertices[v].needs_cross) need.push_back(static_cast<int>(v));
      ra.crosses.resize(need.size());
      parallel_for(need.size(), [&](std::size_t k) { ra.crosses[k] = compute_cross(*o, ra.grid, bmap, need[k]); });
      int max_halv = 0;
      double max_frac = 0.0;
      for (const Cross& c : ra.crosses) {
        max_halv = std::max(max_halv, c.halvings);
        for (double f : c.frac) max_frac = std::max(max_frac, f);
      }
      put("crosses", std::to_string(ra.crosses.size()));
      put("cross.max_halvings", std::to_string(max_halv));
      put("cross.max_fraction", num(max_frac));
      ra.timings.push_back({"crosses", sw.lap()});

      ra.grid_map = build_grid_map(*o, ra.grid, ra.crosses, bmap);
      long violations = 0;
      for (const Cross& c : ra.crosses)
        for (double f : c.frac)
          if (!(f > 0.0 && f <= 1.0 / 3.0)) ++violations;
      for (const SideMap& m : ra.grid_map.sides)
        if (!(m.cross_a + m.cross_b < 1.0)) ++violations;
      put("cross.violations", std::to_string(violations));
      ra.timings.push_back({"grid_map", sw.lap()});

      GridInjectivity gi = check_grid_injective(ra.grid, ra.grid_map);
      GridBilip gp = verify_grid_bilip(ra.grid, ra.grid_map, cfg.pairs, cfg.seed);
      GridBilip ga = verify_grid_bilip(
          ra.grid, ra.grid_map, [&](int s, double t) { return adjusted_eval(*o, ra.grid, ra.grid_map, s, t); },
          cfg.pairs, cfg.seed);
      put("grid.injective", gi.ok ? "true" : "false");
      put("grid.prime.lower", num(gp.lower));
      put("grid.prime.upper", num(gp.upper));
      put("grid.prime.bound", num(72.0 * L));
      put("grid.adj.lower", num(ga.lower));
      put("grid.adj.upper", num(ga.upper));
      put("grid.adj.bound", num(18.0 * L));
      ra.timings.push_back({"grid_verify", sw.lap()});

      for (std::size_t k = 0; k < ra.tiling.squares.size(); ++k)
        if (!ra.tiling.squares[k].in_eps) ra.extension_square.push_back(static_cast<int>(k));
      ra.extensions.resize(ra.extension_square.size());
      std::vector<std::string> errs(ra.extension_square.size());
      ExtensionOptions eo;
      eo.forward = [&](Point2 z) { return o->map(z); };
      eo.backward = [&](Point2 w) { return o->inverse_ext(w); };
      parallel_for(ra.extension_square.size(), [&](std::size_t k) {
        try {
          BoundaryMap bm = square_boundary(ra.tiling, ra.grid, ra.grid_map, ra.extension_square[k]);
          ra.extensions[k] = extend_square(bm, eo);
        } catch (const std::exception& e) {
          errs[k] = e.what();
        }
      });
      int fans = 0, tuttes = 0, splits = 0;
      double ext_max = 1.0;
      for (std::size_t k = 0; k < ra.extensions.size(); ++k) {
        if (!errs[k].empty()) {
          if (ra.failed_square < 0) {
            ra.failed_square = ra.extension_square[k];
            ra.error = "extension failed on square " + std::to_string(ra.failed_square) + ": " + errs[k];
          }
          continue;
        }
        fans += ra.extensions[k].method == "fan";
        tuttes += ra.extensions[k].method == "tutte";
        splits += ra.extensions[k].method == "split";
        ext_max = std::max(ext_max, measured_bilip(ra.extensions[k]));
      }
      put("extensions", std::to_string(ra.extensions.size()));
      put("extensions.fan", std::to_string(fans));
      put("extensions.tutte", std::to_string(tuttes));
      put("extensions.split", std::to_string(splits));
      put("extension_bilip_max", num(ext_max));
      ra.timings.push_back({"extensions", sw.lap()});

      Gluer glue(ra.mesh);
      glue.add(eps_mesh);
      ra.eps_triangle.assign(ra.mesh.num_triangles(), 1);
      for (std::size_t k = 0; k < ra.extensions.size(); ++k)
        if (errs[k].empty()) glue.add(ra.extensions[k].map);
      ra.eps_triangle.resize(ra.mesh.num_triangles(), 0);
      std::vector<std::size_t> origin = conform_mesh(ra.mesh);
      std::vector<char> mask(origin.size());
      for (std::size_t k = 0; k < origin.size(); ++k) mask[k] = ra.eps_triangle[origin[k]];
      ra.eps_triangle = std::move(mask);
      ra.timings.push_back({"glue", sw.lap()});
    }
  } catch (const std::exception& e) {
    if (ra.error.empty()) ra.error = e.what();
  }

  put("mesh.vertices", std::to_string(ra.mesh.num_vertices()));
  put("mesh.triangles", std::to_string(ra.mesh.num_triangles()));
  ApproxReport& rep = ra.report;
  rep.eps_target = cfg.eps;
  if (ra.mesh.num_triangles() > 0) {
    try {
      ra.injectivity = check_injective(ra.mesh);
    } catch (const std::exception& e) {
      if (ra.error.empty()) ra.error = e.what();
    }
    rep.injective = ra.injectivity.injective;
    rep.orientation_ok = ra.injectivity.orientation_ok;
    put("injectivity.witness", ra.injectivity.witness);
    if (ra.injectivity.triangle >= 0) put("injectivity.triangle", std::to_string(ra.injectivity.triangle));
    rep.bilip_v = safe_bilip(ra.mesh, {});
    rep.linf_map = guarded([&] { return linf_error(*o, ra.mesh, cfg.linf_samples, false); });
    rep.linf_inv = guarded([&] { return linf_error(*o, ra.mesh, cfg.linf_samples, true); });
    rep.w1p_map = guarded([&] { return w1p_error(*o, ra.mesh, cfg.p, cfg.metric_quad_n, false); });
    rep.w1p_inv = guarded([&] { return w1p_error(*o, ra.mesh, cfg.p, cfg.metric_quad_n, true); });
    bool any_eps = std::find(ra.eps_triangle.begin(), ra.eps_triangle.end(), 1) != ra.eps_triangle.end();
    if (any_eps) {
      const TriangleMask& mk = ra.eps_triangle;
      put("omega_eps.linf_map", num(guarded([&] { return linf_error(*o, ra.mesh, cfg.linf_samples, false, mk); })));
      put("omega_eps.linf_inv", num(guarded([&] { return linf_error(*o, ra.mesh, cfg.linf_samples, true, mk); })));
      put("omega_eps.w1p_map", num(guarded([&] { return w1p_error(*o, ra.mesh, cfg.p, cfg.metric_quad_n, false, mk); })));
      put("omega_eps.w1p_inv", num(guarded([&] { return w1p_error(*o, ra.mesh, cfg.p, cfg.metric_quad_n, true, mk); })));
      put("omega_eps.bilip_v", num(safe_bilip(ra.mesh, mk)));
      put("omega_eps.bilip_bound", num(L + ra.eps_internal));
      put("omega_eps.linf_ceiling",
          num(std::min(6.0 * rep.eta * rep.r, std::numbers::sqrt2 * rep.r / (6.0 * L * L * L))));
    }
    put("bilip_below_c1_ceiling", rep.bilip_v <= kC1 * std::pow(L, 4) ? "true" : "false");
  }
  ra.timings.push_back({"metrics", sw.lap()});
  ra.timings.push_back({"total", sw.total()});
  ra.success = ra.error.empty() && rep.injective && rep.orientation_ok && rep.linf_map <= cfg.eps &&
               rep.linf_inv <= cfg.eps && rep.w1p_map <= cfg.eps && rep.w1p_inv <= cfg.eps;
  if (!cfg.out_dir.empty()) write_outputs(ra);
  return ra;
}

}  // namespace bilip
