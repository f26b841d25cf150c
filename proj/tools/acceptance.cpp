// Acceptance driver: one PASS/FAIL line per criterion, exit status 0 only if all pass.

#include <CLI11.hpp>
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "bilip/extension.hpp"
#include "bilip/gridapprox.hpp"
#include "bilip/lebesgue.hpp"
#include "bilip/maps.hpp"
#include "bilip/metrics.hpp"
#include "bilip/parallel.hpp"
#include "bilip/pipeline.hpp"
#include "oracles.hpp"

using namespace bilip;
namespace fs = std::filesystem;

namespace {

struct Clock {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

// collects failures of one criterion with the first few reasons
struct Verdict {
  long checks = 0, failures = 0;
  std::string why;
  void expect(bool ok, const std::string& what) {
    ++checks;
    if (ok) return;
    if (++failures <= 3) why += (why.empty() ? "" : "; ") + what;
  }
};

int g_failed = 0;

void report(int id, const char* title, const Verdict& v, double secs, const std::string& info) {
  bool ok = v.failures == 0;
  if (!ok) ++g_failed;
  std::printf("criterion %d %s: %s  (%ld checks, %.1f s%s%s)\n", id, title, ok ? "PASS" : "FAIL", v.checks, secs,
              info.empty() ? "" : ", ", info.c_str());
  if (!ok) std::printf("  failures: %ld, first: %s\n", v.failures, v.why.c_str());
  std::fflush(stdout);
}

std::string fmt(double x) {
  char b[32];
  std::snprintf(b, sizeof b, "%.4g", x);
  return b;
}

std::map<std::string, std::string> read_report(const fs::path& path) {
  std::map<std::string, std::string> kv;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    auto at = line.find(" = ");
    if (at != std::string::npos) kv[line.substr(0, at)] = line.substr(at + 3);
  }
  return kv;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// 1. affine maps are reproduced on the Lebesgue region
void affine_exactness(const fs::path& out) {
  Clock clk;
  Verdict v;
  PipelineConfig c;
  c.map_spec = "affine:a11=1.2,a12=0.3,a21=-0.2,a22=0.9,b1=0.1";
  c.max_halvings = 2;
  c.out_dir = (out / "c1").string();
  RunArtifacts ra = run(c);
  auto o = make_map(c.map_spec);
  v.expect(bilip_constant(o->diff({0.5, 0.5})) <= 2.0, "matrix outside the class");
  v.expect(ra.error.empty(), "run error: " + ra.error);
  std::vector<std::size_t> eps_tris;
  for (std::size_t k = 0; k < ra.eps_triangle.size(); ++k)
    if (ra.eps_triangle[k]) eps_tris.push_back(k);
  v.expect(!eps_tris.empty(), "empty Lebesgue region");
  if (!eps_tris.empty()) {
    PAEvaluator ev(ra.mesh);
    std::mt19937_64 rng(101);
    std::uniform_int_distribution<std::size_t> pick(0, eps_tris.size() - 1);
    std::uniform_real_distribution<double> U(0, 1);
    double worst = 0.0;
    for (int k = 0; k < 10000; ++k) {
      Triangle t = ra.mesh.domain_triangle(eps_tris[pick(rng)]);
      double a = U(rng), b = U(rng);
      if (a + b > 1) a = 1 - a, b = 1 - b;
      Point2 z = t.v0 + a * (t.v1 - t.v0) + b * (t.v2 - t.v0);
      worst = std::max(worst, dist(ev.eval(z), o->eval(z)));
    }
    v.expect(worst <= 1e-12, "pointwise gap " + fmt(worst));
  }
  std::map<std::string, std::string> ex(ra.extras.begin(), ra.extras.end());
  for (const char* key : {"omega_eps.linf_map", "omega_eps.linf_inv", "omega_eps.w1p_map", "omega_eps.w1p_inv"}) {
    auto it = ex.find(key);
    v.expect(it != ex.end() && std::stod(it->second) <= 1e-10, std::string(key) + " too large or missing");
  }
  double secs = clk.seconds();
  v.expect(secs < 5.0, "runtime " + fmt(secs) + " s");
  report(1, "affine exactness", v, secs, std::to_string(eps_tris.size()) + " Lebesgue triangles");
}

// 2. the folded square, the naive fold and its repaired counterpart
void fold_figure(const fs::path& out) {
  Clock clk;
  Verdict v;
  PAMap m;
  m.domain.vertices = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  m.domain.triangles = {{0, 1, 2}, {0, 2, 3}};
  m.image = {{0, 0}, {0.2, 0.4}, {1, 1}, {0, 1}};
  InjectivityReport fig = check_injective(m);
  v.expect(!fig.injective, "folded square reported injective");
  v.expect(fig.witness == "flipped_triangle" && fig.triangle == 0, "wrong witness " + fig.witness);
  v.expect(std::abs(oracle::tri_area(m.image[0], m.image[1], m.image[2]) + 0.1) <= 1e-15, "area of ABC");

  PipelineConfig c;
  c.map_spec = "fold_candidate";
  c.eps = 0.2;
  c.r0 = 0.25;
  c.naive = true;
  c.svg = true;
  c.out_dir = (out / "c2_naive").string();
  RunArtifacts naive = run(c);
  int flipped = 0;
  for (std::size_t k = 0; k < naive.mesh.num_triangles(); ++k)
    flipped += oracle::tri_area(naive.mesh.image[naive.mesh.domain.triangles[k][0]],
                                naive.mesh.image[naive.mesh.domain.triangles[k][1]],
                                naive.mesh.image[naive.mesh.domain.triangles[k][2]]) <= 0.0;
  v.expect(flipped >= 1, "naive fold has no flipped triangle");
  v.expect(!naive.report.orientation_ok, "naive fold reported orientation preserving");

  c.naive = false;
  c.max_halvings = 2;
  c.out_dir = (out / "c2_full").string();
  RunArtifacts full = run(c);
  v.expect(full.error.empty(), "run error: " + full.error);
  v.expect(full.report.injective, "full pipeline not injective");
  v.expect(full.report.orientation_ok, "full pipeline reverses orientation");
  double secs = clk.seconds();
  v.expect(secs < 30.0, "runtime " + fmt(secs) + " s");
  report(2, "fold reproduction", v, secs,
         std::to_string(flipped) + " naive flips, " + std::to_string(full.mesh.num_triangles()) + " triangles");
}

// 3. affine approximation on random squares of the shear
void affine_gap_check() {
  Clock clk;
  Verdict v;
  auto sh = make_map("shear_sine:a=0.1,k=1");
  double L = sh->L();
  std::mt19937_64 rng(103);
  std::uniform_real_distribution<double> U(0, 1);
  double tightest = 0.0;
  for (int k = 0; k < 20; ++k) {
    double rho = 0.05 + 0.25 * U(rng);
    Point2 c{0.5 * rho + (1 - rho) * U(rng), 0.5 * rho + (1 - rho) * U(rng)};
    Mat2 M = sh->diff(c);
    double dhat = avg_deviation(*sh, Square{c, rho}, M, 32);
    double sup = oracle::sup_affine_gap(*sh, c, rho, M, 64);
    double bound = 4.0 * std::sqrt(2.0 * std::numbers::sqrt2 * L * dhat) * rho;
    v.expect(sup <= bound, "square " + std::to_string(k) + ": " + fmt(sup) + " > " + fmt(bound));
    tightest = std::max(tightest, sup / bound);
  }
  report(3, "affine approximation on squares", v, clk.seconds(), "max sup/bound " + fmt(tightest));
}

// 4. budgeted Lebesgue interpolation
void lebesgue_bounds() {
  Clock clk;
  Verdict v;
  int checked = 0, vacuous = 0;
  for (const char* spec : {"identity", "affine:a11=2,a22=0.5", "affine:a11=1.2,a12=0.3,a21=-0.2,a22=0.9",
                           "shear_sine", "polar_twist", "fold_candidate"}) {
    auto o = make_map(spec);
    double L = o->L(), eps = 0.1;
    for (double r : {1.0 / 8, 1.0 / 16, 1.0 / 32}) {
      double eta = eta_budget(L, eps, 2.0, r, o->domain().area());
      LebesgueClassification cls = classify(*o, r, delta_of_eta(eta, L), 16);
      if (cls.accepted.cells.empty()) {
        ++vacuous;
        continue;
      }
      ++checked;
      InterpolationMesh mesh = interpolate(*o, cls);
      std::string tag = std::string(spec) + " r=" + fmt(r);
      // vertex values carry a few ulps of rounding into conformal pieces
      v.expect(pa_bilip(mesh.map) <= (L + eps) * (1 + 1e-12), tag + " bilip " + fmt(pa_bilip(mesh.map)));
      double sup = oracle::dense_linf(*o, mesh.map, 20, 107);
      double ceil = std::min(6 * eta * r, std::numbers::sqrt2 * r / (6 * L * L * L));
      v.expect(sup <= ceil, tag + " sup " + fmt(sup) + " > " + fmt(ceil));
    }
  }
  report(4, "Lebesgue square bounds", v, clk.seconds(),
         std::to_string(checked) + " meshes checked, " + std::to_string(vacuous) + " with no accepted square");
}

// 5. grid map ratios and crosses
void grid_bounds() {
  Clock clk;
  Verdict v;
  double worst_prime = 0.0, worst_adj = 0.0;
  for (const char* spec : {"identity", "shear_sine", "polar_twist", "fold_candidate"}) {
    for (double delta : {1e-9, 0.3}) {
      for (double r : {1.0 / 8, 1.0 / 16}) {
        auto o = make_map(spec);
        double L = o->L();
        std::string tag = std::string(spec) + " r=" + fmt(r) + " delta=" + fmt(delta);
        LebesgueClassification cls = classify(*o, r, delta, 8);
        Tiling t = build_tiling(o->domain(), cls.accepted, 6);
        GridQ g = build_grid(t, o->domain());
        GridMap bmap = eps_boundary_map(*o, g);
        std::vector<Cross> crosses;
        for (std::size_t a = 0; a < g.vertices.size(); ++a)
          if (g.vertices[a].needs_cross) crosses.push_back(compute_cross(*o, g, bmap, static_cast<int>(a)));
        GridMap gm = build_grid_map(*o, g, crosses, bmap);
        for (const Cross& c : crosses)
          for (double f : c.frac) v.expect(f > 0.0 && f <= 1.0 / 3.0, tag + " fraction " + fmt(f));
        for (std::size_t i = 0; i < crosses.size(); ++i)
          for (std::size_t j = i + 1; j < crosses.size(); ++j) {
            const Cross &a = crosses[i], &b = crosses[j];
            v.expect(dist(bmap.vertex_image[a.alpha], bmap.vertex_image[b.alpha]) > a.xi + b.xi, tag + " crosses meet");
          }
        GridBilip p = verify_grid_bilip(g, gm, 100000, 7);
        oracle::Ratio po = oracle::grid_pair_ratios(g, gm, 100000, 9);
        GridBilip q = verify_grid_bilip(
            g, gm, [&](int s, double tt) { return adjusted_eval(*o, g, gm, s, tt); }, 100000, 7);
        for (auto [lo, hi] : {std::pair{p.lower, p.upper}, std::pair{po.lower, po.upper}}) {
          v.expect(lo >= 1.0 / (72 * L) && hi <= 72 * L, tag + " prime ratio [" + fmt(lo) + ", " + fmt(hi) + "]");
          worst_prime = std::max({worst_prime, hi / (72 * L), 1.0 / (72 * L * lo)});
        }
        v.expect(q.lower >= 1.0 / (18 * L) && q.upper <= 18 * L,
                 tag + " adjusted ratio [" + fmt(q.lower) + ", " + fmt(q.upper) + "]");
        worst_adj = std::max({worst_adj, q.upper / (18 * L), 1.0 / (18 * L * q.lower)});
      }
    }
  }
  report(5, "grid map bounds", v, clk.seconds(),
         "closest approach to the ceilings " + fmt(worst_prime) + " / " + fmt(worst_adj));
}

// 6. random boundary data
void extension_corpus() {
  Clock clk;
  Verdict v;
  std::mt19937_64 rng(109);
  std::uniform_int_distribution<int> count(4, 16);
  double worst = 1.0;
  for (int k = 0; k < 100; ++k) {
    BoundaryMap bm = oracle::random_boundary_map(rng, count(rng), k % 2 == 0);
    std::string tag = "map " + std::to_string(k);
    ExtensionMesh em;
    try {
      em = extend_square(bm);
    } catch (const std::exception& e) {
      v.expect(false, tag + ": " + e.what());
      continue;
    }
    for (std::size_t t = 0; t < em.map.num_triangles(); ++t)
      v.expect(oracle::tri_area(em.map.image[em.map.domain.triangles[t][0]], em.map.image[em.map.domain.triangles[t][1]],
                                em.map.image[em.map.domain.triangles[t][2]]) > 0.0,
               tag + " non-positive image area");
    const std::size_t n = bm.breakpoints.size();
    v.expect(em.boundary_count == n, tag + " boundary count");
    for (std::size_t i = 0; i < n && i < em.map.num_vertices(); ++i)
      v.expect(em.map.domain.vertices[i] == bm.breakpoints[i] && em.map.image[i] == bm.images[i], tag + " breakpoint moved");
    for (std::size_t i = 0; i < n; ++i)
      for (int s = 1; s < 8; ++s) {
        Point2 z = lerp(bm.breakpoints[i], bm.breakpoints[(i + 1) % n], s / 8.0);
        Point2 want = lerp(bm.images[i], bm.images[(i + 1) % n], s / 8.0);
        v.expect(dist(oracle::eval_linear_search(em.map, z), want) <= 1e-12, tag + " boundary edge not exact");
      }
    if (em.map.num_triangles() <= 200) v.expect(oracle::images_disjoint(em.map), tag + " images overlap");
    double L = boundary_bilip(bm), mb = oracle::mesh_bilip(em.map);
    v.expect(mb <= kExtensionCeilingFactor * std::pow(L, 4), tag + " constant above the ceiling");
    worst = std::max(worst, mb);
  }
  double secs = clk.seconds();
  v.expect(secs < 60.0, "runtime " + fmt(secs) + " s");
  report(6, "extension validity", v, secs, "largest measured constant " + fmt(worst));
}

int run_cli(const std::string& args) {
  std::string cmd = std::string("\"") + BILIP_APPROX + "\" " + args + " > /dev/null 2>&1";
  int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

// 7. end-to-end errors for the shear and their behaviour under halving
void end_to_end(const fs::path& out) {
  Clock total;
  Verdict v;
  std::string info;
  for (int p : {1, 2}) {
    Clock clk;
    fs::path dir = out / ("c7_p" + std::to_string(p));
    int code = run_cli("--map shear_sine --eps 0.1 --p " + std::to_string(p) + " --out \"" + dir.string() + "\"");
    double secs = clk.seconds();
    auto kv = read_report(dir / "report.txt");
    std::string tag = "p=" + std::to_string(p);
    v.expect(code == 0, tag + " exit code " + std::to_string(code));
    for (const char* key : {"linf_map", "linf_inv", "w1p_map", "w1p_inv"}) {
      bool ok = kv.count(key) && std::stod(kv[key]) <= 0.1;
      v.expect(ok, tag + " " + key + " = " + (kv.count(key) ? kv[key] : "missing"));
    }
    v.expect(secs < 60.0, tag + " runtime " + fmt(secs) + " s");
    info += tag + " " + fmt(secs) + " s, w1p " + (kv.count("w1p_map") ? fmt(std::stod(kv["w1p_map"])) : "?") + "; ";
  }
  for (double p : {1.0, 2.0}) {
    double prev_linf = INFINITY, prev_w = INFINITY;
    for (int h = 0; h <= 3; ++h) {
      PipelineConfig c;
      c.map_spec = "shear_sine";
      c.p = p;
      c.r0 = 0.125;
      c.max_halvings = h;
      RunArtifacts ra = run(c);
      std::string tag = "p=" + fmt(p) + " halvings " + std::to_string(h);
      v.expect(ra.error.empty(), tag + " error " + ra.error);
      v.expect(ra.report.linf_map <= prev_linf + 1e-9, tag + " sup error grew to " + fmt(ra.report.linf_map));
      v.expect(ra.report.w1p_map <= prev_w + 1e-9, tag + " Sobolev error grew to " + fmt(ra.report.w1p_map));
      prev_linf = ra.report.linf_map;
      prev_w = ra.report.w1p_map;
    }
  }
  report(7, "end-to-end errors", v, total.seconds(), info.substr(0, info.size() - 2));
}

// 8. repeatability and oracle agreement
void determinism(const fs::path& out) {
  Clock clk;
  Verdict v;
  std::vector<std::vector<std::string>> got;
  for (unsigned w : {1u, 4u, 1u}) {
    set_workers(w);
    PipelineConfig c;
    c.map_spec = "polar_twist";
    c.r0 = 0.125;
    c.max_halvings = 1;
    c.svg = true;
    c.out_dir = (out / ("c8_run" + std::to_string(got.size()))).string();
    run(c);
    std::vector<std::string> files;
    for (const char* f : {"mesh.pamesh", "report.txt", "grid.txt", "classification.txt", "figure.svg"})
      files.push_back(slurp(fs::path(c.out_dir) / f));
    got.push_back(files);
  }
  set_workers(0);
  for (std::size_t k = 1; k < got.size(); ++k)
    for (std::size_t f = 0; f < got[0].size(); ++f)
      v.expect(!got[0][f].empty() && got[k][f] == got[0][f], "output file " + std::to_string(f) + " differs");

  // independent recomputations on a pipeline mesh
  PipelineConfig c;
  c.map_spec = "shear_sine";
  c.r0 = 0.0625;
  c.max_halvings = 0;
  RunArtifacts ra = run(c);
  auto o = make_map("shear_sine");
  const PAMap& m = ra.mesh;
  PAEvaluator ev(m);
  std::mt19937_64 rng(113);
  std::uniform_real_distribution<double> U(0, 1);
  for (int k = 0; k < 500; ++k) {
    Point2 z{U(rng), U(rng)};
    v.expect(dist(ev.eval(z), oracle::eval_linear_search(m, z)) <= 1e-12, "evaluation");
    Point2 w = ev.eval(z);
    v.expect(dist(ev.eval(ev.invert(w)), w) <= 1e-9, "inversion round trip");
  }
  double b = pa_bilip(m);
  v.expect(std::abs(b - oracle::mesh_bilip(m)) <= 1e-10 * b, "bi-Lipschitz constant");
  for (const ExtensionMesh& e : ra.extensions) {
    double mb = measured_bilip(e);
    v.expect(std::abs(mb - oracle::mesh_bilip(e.map)) <= 1e-10 * mb, "extension constant");
    if (e.map.num_triangles() <= 200)
      v.expect(brute_force_injective(e.map) == oracle::images_disjoint(e.map, 0.0), "injectivity oracle");
  }
  double lib = linf_error(*o, m, 4, false), dense = oracle::dense_linf(*o, m, 200, 127);
  v.expect(std::abs(lib - dense) <= 0.05 * dense, "sup error " + fmt(lib) + " vs " + fmt(dense));
  double wl = w1p_error(*o, m, 2.0, 16, false), wg = oracle::gauss_w1p(*o, m, 2.0, 16, false);
  v.expect(std::abs(wl - wg) <= 0.01 * wg, "Sobolev error " + fmt(wl) + " vs " + fmt(wg));
  for (double L : {1.0, 1.5, 3.0})
    for (double eta : {1e-3, 0.05}) {
      double d = delta_of_eta(eta, L), dref = oracle::delta_for_eta(eta, L);
      v.expect(std::abs(d - dref) <= 1e-6 * dref, "delta of eta");
    }
  v.expect(std::abs(eta_budget(1.3, 0.1, 2, 0.0625, 1) - oracle::eta_budget(1.3, 0.1, 2, 0.0625, 1)) <=
               1e-9 * oracle::eta_budget(1.3, 0.1, 2, 0.0625, 1),
           "eta budget");
  report(8, "determinism and oracles", v, clk.seconds(), "");
}

}  // namespace

int main(int argc, char** argv) {
  std::string out = "acceptance_runs";
  std::vector<int> only;
  CLI::App app{"Acceptance checks"};
  app.add_option("--out", out, "directory for run outputs")->capture_default_str();
  app.add_option("--only", only, "criteria to run (default all)");
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(out);
  auto want = [&](int k) { return only.empty() || std::find(only.begin(), only.end(), k) != only.end(); };
  fs::path dir(out);
  auto guarded = [&](int k, const char* title, auto&& f) {
    if (!want(k)) return;
    try {
      f();
    } catch (const std::exception& e) {
      ++g_failed;
      std::printf("criterion %d %s: FAIL  (exception: %s)\n", k, title, e.what());
    }
  };
  guarded(1, "affine exactness", [&] { affine_exactness(dir); });
  guarded(2, "fold reproduction", [&] { fold_figure(dir); });
  guarded(3, "affine approximation on squares", [&] { affine_gap_check(); });
  guarded(4, "Lebesgue square bounds", [&] { lebesgue_bounds(); });
  guarded(5, "grid map bounds", [&] { grid_bounds(); });
  guarded(6, "extension validity", [&] { extension_corpus(); });
  guarded(7, "end-to-end errors", [&] { end_to_end(dir); });
  guarded(8, "determinism and oracles", [&] { determinism(dir); });
  std::printf("%s\n", g_failed == 0 ? "all criteria passed" : "some criteria failed");
  return g_failed == 0 ? 0 : 1;
}
