#include <doctest.h>

#include <random>

#include "bilip/lebesgue.hpp"
#include "bilip/metrics.hpp"
#include "oracles.hpp"

using namespace bilip;

namespace {

// n x n grid on the unit square, two triangles per cell, images f(vertex)
template <class F>
PAMap grid_mesh(int n, F f) {
  PAMap m;
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) {
      Point2 z{static_cast<double>(i) / n, static_cast<double>(j) / n};
      m.domain.vertices.push_back(z);
      m.image.push_back(f(z));
    }
  auto id = [&](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      m.domain.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      m.domain.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  return m;
}

PAMap figure_one_mesh() {
  PAMap m;
  m.domain.vertices = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  m.domain.triangles = {{0, 1, 2}, {0, 2, 3}};
  m.image = {{0, 0}, {0.2, 0.4}, {1, 1}, {0, 1}};
  return m;
}

}  // namespace

TEST_CASE("evaluation") {
  PAMap id = grid_mesh(4, [](Point2 z) { return z; });
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0, 1);
  for (int k = 0; k < 100; ++k) {
    Point2 z{U(rng), U(rng)};
    CHECK(dist(pa_eval(id, z), z) <= 1e-15);
  }
  PAMap tri;
  tri.domain.vertices = {{0, 0}, {1, 0}, {0, 1}};
  tri.domain.triangles = {{0, 1, 2}};
  tri.image = {{1, 1}, {3, 1.5}, {0.5, 2}};
  for (int v = 0; v < 3; ++v) CHECK(pa_eval(tri, tri.domain.vertices[v]) == tri.image[v]);
  CHECK_THROWS_AS(pa_eval(tri, {0.8, 0.8}), std::domain_error);

  auto sh = make_map("shear_sine:a=0.1,k=1");
  InterpolationMesh mesh = naive_interpolation(*sh, 1.0 / 16);
  PAEvaluator ev(mesh.map);
  for (int k = 0; k < 2000; ++k) {
    Point2 z{U(rng), U(rng)};
    CHECK(dist(ev.eval(z), oracle::eval_linear_search(mesh.map, z)) <= 1e-12);
  }
}

TEST_CASE("inversion") {
  PAMap id = grid_mesh(4, [](Point2 z) { return z; });
  CHECK(dist(pa_invert(id, {0.3, 0.9}), {0.3, 0.9}) <= 1e-15);
  Mat2 M{1.5, 0.2, -0.4, 0.8};
  PAMap af = grid_mesh(6, [&](Point2 z) { return M * z; });
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0, 1);
  for (int k = 0; k < 200; ++k) {
    Point2 z0{U(rng), U(rng)};
    CHECK(dist(pa_invert(af, M * z0), z0) <= 1e-12);
  }
  CHECK_THROWS_AS(pa_invert(af, {-5, -5}), std::domain_error);

  auto sh = make_map("shear_sine:a=0.1,k=1");
  InterpolationMesh mesh = naive_interpolation(*sh, 1.0 / 16);
  PAEvaluator ev(mesh.map);
  for (int k = 0; k < 1000; ++k) {
    Point2 w = ev.eval({U(rng), U(rng)});
    CHECK(dist(ev.eval(ev.invert(w)), w) <= 1e-9);
  }
}

TEST_CASE("the folded square is not injective") {
  PAMap m = figure_one_mesh();
  CHECK(oracle::tri_area(m.image[0], m.image[1], m.image[2]) == doctest::Approx(-0.1));
  InjectivityReport r = check_injective(m);
  CHECK_FALSE(r.injective);
  CHECK_FALSE(r.orientation_ok);
  CHECK(r.witness == "flipped_triangle");
  CHECK(r.triangle == 0);
  CHECK(r.brute_force_checked);
  // the image of ABC sits inside the image of ACD
  Point2 g = (1.0 / 3.0) * (m.image[0] + m.image[1] + m.image[2]);
  CHECK(oracle::tri_area(m.image[0], m.image[2], g) > 0);
  CHECK(oracle::tri_area(m.image[2], m.image[3], g) > 0);
  CHECK(oracle::tri_area(m.image[3], m.image[0], g) > 0);
}

TEST_CASE("injectivity agrees with the pairwise overlap oracle") {
  PAMap id = grid_mesh(5, [](Point2 z) { return z; });
  InjectivityReport r = check_injective(id);
  CHECK(r.injective);
  CHECK(r.orientation_ok);
  CHECK(r.witness == "none");

  std::mt19937_64 rng(11);
  int bad = 0, good = 0;
  for (int k = 0; k < 150; ++k) {
    double amp = 0.02 + 0.3 * (k % 10) / 10.0;
    std::uniform_real_distribution<double> J(-amp, amp);
    PAMap m = grid_mesh(6, [](Point2 z) { return z; });
    for (std::size_t v = 0; v < m.num_vertices(); ++v) m.image[v] = m.image[v] + Point2{J(rng), J(rng)};
    REQUIRE(m.num_triangles() <= 200);
    InjectivityReport ir = check_injective(m);  // throws on internal disagreement
    CHECK(ir.brute_force_checked);
    bool positive = true;
    for (std::size_t t = 0; t < m.num_triangles(); ++t) positive = positive && signed_area(m.image_triangle(t)) > 0;
    bool want = positive && oracle::images_disjoint(m, 0.0);
    CHECK(ir.injective == want);
    CHECK(brute_force_injective(m) == want);
    (want ? good : bad) += 1;
  }
  CHECK(good > 0);
  CHECK(bad > 0);

  // a fold that keeps every triangle positive but wraps over itself
  PAMap fold = grid_mesh(2, [](Point2 z) { return z; });
  fold.image[4] = {1.6, 0.5};
  InjectivityReport fr = check_injective(fold);
  CHECK_FALSE(fr.injective);
  CHECK(fr.injective == brute_force_injective(fold));
}

TEST_CASE("piecewise bi-Lipschitz constant") {
  CHECK(pa_bilip(grid_mesh(3, [](Point2 z) { return z; })) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(pa_bilip(grid_mesh(3, [](Point2 z) { return Point2{2 * z.x, 0.5 * z.y}; })) ==
        doctest::Approx(2.0).epsilon(1e-14));
  auto sh = make_map("shear_sine:a=0.1,k=1");
  InterpolationMesh mesh = naive_interpolation(*sh, 1.0 / 16);
  double b = pa_bilip(mesh.map);
  CHECK(std::abs(b - oracle::mesh_bilip(mesh.map)) <= 1e-10 * b);
  PAMap flat = grid_mesh(1, [](Point2 z) { return Point2{z.x, 0}; });
  CHECK_THROWS(pa_bilip(flat));
}

TEST_CASE("sup norm errors") {
  auto af = make_map("affine:a11=1.2,a12=0.3,a21=-0.2,a22=0.9,b1=0.1");
  PAMap m = grid_mesh(8, [&](Point2 z) { return af->eval(z); });
  CHECK(linf_error(*af, m, 3, false) <= 1e-12);
  CHECK(linf_error(*af, m, 3, true) <= 1e-12);
  auto id = make_map("identity");
  CHECK(linf_error(*id, grid_mesh(4, [](Point2 z) { return z; }), 2, false) == 0.0);

  auto sh = make_map("shear_sine:a=0.1,k=1");
  InterpolationMesh mesh = naive_interpolation(*sh, 1.0 / 16);
  double lib = linf_error(*sh, mesh.map, 4, false);
  // about 10^6 samples in total
  int per = static_cast<int>(1000000 / mesh.map.num_triangles());
  double dense = oracle::dense_linf(*sh, mesh.map, per, 17);
  CHECK(lib > 0.0);
  CHECK(std::abs(lib - dense) <= 0.05 * dense);
}

TEST_CASE("Sobolev errors") {
  auto af = make_map("affine:a11=1.2,a12=0.3,a21=-0.2,a22=0.9,b1=0.1");
  PAMap m = grid_mesh(8, [&](Point2 z) { return af->eval(z); });
  for (double p : {1.0, 2.0, 3.5}) {
    CHECK(w1p_error(*af, m, p, 4, false) <= 1e-12);
    CHECK(w1p_error(*af, m, p, 4, true) <= 1e-12);
  }

  // constant integrand: Du = M everywhere, Dv = N everywhere, unit area
  Mat2 M{1.2, 0.3, -0.2, 0.9}, N{1.0, 0.1, 0.05, 1.1};
  PAMap nm = grid_mesh(4, [&](Point2 z) { return N * z; });
  for (double p : {1.0, 2.0, 5.0}) CHECK(w1p_error(*af, nm, p, 3, false) == doctest::Approx(op_norm(M - N)).epsilon(1e-12));

  auto sh = make_map("shear_sine:a=0.1,k=1");
  InterpolationMesh mesh = naive_interpolation(*sh, 1.0 / 16);
  double lib = w1p_error(*sh, mesh.map, 2.0, 16, false);
  double ref = oracle::gauss_w1p(*sh, mesh.map, 2.0, 64, false);
  CHECK(std::abs(lib - ref) <= 0.01 * ref);
  double lib_inv = w1p_error(*sh, mesh.map, 2.0, 16, true);
  double ref_inv = oracle::gauss_w1p(*sh, mesh.map, 2.0, 64, true);
  CHECK(std::abs(lib_inv - ref_inv) <= 0.01 * ref_inv);

  // Hoelder on the unit square
  for (const char* spec : {"shear_sine", "polar_twist"}) {
    CAPTURE(spec);
    auto o = make_map(spec);
    InterpolationMesh im = naive_interpolation(*o, 1.0 / 8);
    for (bool inv : {false, true})
      CHECK(w1p_error(*o, im.map, 1.0, 6, inv) <= w1p_error(*o, im.map, 2.0, 6, inv) * (1 + 1e-12));
  }
}

TEST_CASE("report field names") {
  ApproxReport r;
  r.linf_map = 0.5;
  r.injective = true;
  auto f = report_fields(r);
  std::vector<std::string> names;
  for (auto& [k, v] : f) names.push_back(k);
  CHECK(names == std::vector<std::string>{"linf_map", "linf_inv", "w1p_map", "w1p_inv", "bilip_v", "area_deficit",
                                          "injective", "orientation_ok", "r", "eta", "delta", "eps_target"});
  CHECK(f[0].second.find("0.5") == 0);
  CHECK(f[6].second == "true");
}
