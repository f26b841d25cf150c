#include <doctest.h>

#include <random>

#include "bilip/extension.hpp"
#include "bilip/metrics.hpp"
#include "oracles.hpp"

using namespace bilip;

namespace {

BoundaryMap affine_boundary(const Mat2& M, Point2 b) {
  BoundaryMap bm;
  bm.square = {{0.5, 0.5}, 1.0};
  for (Point2 z : bm.square.corners()) {
    bm.breakpoints.push_back(z);
    bm.images.push_back(M * z + b);
  }
  return bm;
}

// every boundary breakpoint keeps its image, and along every boundary edge of the
// data the mesh agrees with the linear interpolation of the end images
void check_boundary_exact(const BoundaryMap& bm, const ExtensionMesh& em) {
  REQUIRE(em.boundary_count == bm.breakpoints.size());
  for (std::size_t i = 0; i < bm.breakpoints.size(); ++i) {
    CHECK(em.map.domain.vertices[i] == bm.breakpoints[i]);
    CHECK(em.map.image[i] == bm.images[i]);
  }
  const std::size_t n = bm.breakpoints.size();
  for (std::size_t i = 0; i < n; ++i) {
    Point2 a = bm.breakpoints[i], b = bm.breakpoints[(i + 1) % n];
    Point2 wa = bm.images[i], wb = bm.images[(i + 1) % n];
    double scale = std::max(1.0, dist(wa, wb));
    for (int k = 0; k <= 16; ++k) {
      double t = k / 16.0;
      Point2 got = oracle::eval_linear_search(em.map, lerp(a, b, t));
      CHECK(dist(got, lerp(wa, wb, t)) <= 1e-12 * scale);
    }
  }
}

void check_valid(const BoundaryMap& bm, const ExtensionMesh& em) {
  for (std::size_t t = 0; t < em.map.num_triangles(); ++t) {
    CHECK(signed_area(em.map.domain_triangle(t)) > 0.0);
    CHECK(signed_area(em.map.image_triangle(t)) > 0.0);
  }
  CHECK(oracle::conforming(em.map.domain));
  CHECK(oracle::images_disjoint(em.map));
  check_boundary_exact(bm, em);
}

}  // namespace

TEST_CASE("identity boundary data") {
  BoundaryMap bm = affine_boundary(Mat2{1, 0, 0, 1}, {0, 0});
  ExtensionOptions opts;
  opts.forward = [](Point2 z) { return z; };
  ExtensionMesh em = extend_square(bm, opts);
  check_valid(bm, em);
  CHECK(measured_bilip(em) == doctest::Approx(1.0).epsilon(1e-12));
  double area = 0.0;
  for (std::size_t t = 0; t < em.map.num_triangles(); ++t) area += signed_area(em.map.image_triangle(t));
  CHECK(area == doctest::Approx(1.0));
  // without a guide the result is still a valid extension onto the square
  ExtensionMesh plain = extend_square(bm);
  check_valid(bm, plain);
  CHECK(measured_bilip(plain) >= 1.0);
}

TEST_CASE("affine boundary data") {
  Mat2 M{2, 0, 0, 0.5};
  BoundaryMap bm = affine_boundary(M, {0.3, -0.1});
  ExtensionOptions opts;
  opts.forward = [&](Point2 z) { return M * z + Point2{0.3, -0.1}; };
  ExtensionMesh em = extend_square(bm, opts);
  check_valid(bm, em);
  CHECK(measured_bilip(em) == doctest::Approx(2.0).epsilon(1e-12));
  Mat2 S{1.2, 0.4, -0.3, 0.8};
  BoundaryMap sheared = affine_boundary(S, {0, 0});
  ExtensionMesh es = extend_square(sheared);
  check_valid(sheared, es);
  double area = 0.0;
  for (std::size_t t = 0; t < es.map.num_triangles(); ++t) area += signed_area(es.map.image_triangle(t));
  CHECK(area == doctest::Approx(S.a11 * S.a22 - S.a12 * S.a21).epsilon(1e-12));
}

TEST_CASE("non-convex L-shaped image") {
  BoundaryMap bm = oracle::lshape_boundary_map();
  ExtensionMesh em = extend_square(bm);
  check_valid(bm, em);
  InjectivityReport inj = check_injective(em.map);
  CHECK(inj.injective);
  CHECK(inj.orientation_ok);
  double mb = measured_bilip(em);
  CHECK(std::abs(mb - oracle::mesh_bilip(em.map)) <= 1e-10 * mb);
  double L = boundary_bilip(bm);
  CHECK(L >= 1.0);
  CHECK(mb <= kExtensionCeilingFactor * L * L * L * L);
}

TEST_CASE("boundary constant of the data") {
  CHECK(boundary_bilip(affine_boundary(Mat2{1, 0, 0, 1}, {0, 0})) == doctest::Approx(1.0));
  CHECK(boundary_bilip(affine_boundary(Mat2{2, 0, 0, 0.5}, {0, 0})) == doctest::Approx(2.0));
}

TEST_CASE("malformed boundary data is rejected") {
  BoundaryMap good = affine_boundary(Mat2{1, 0, 0, 1}, {0, 0});
  CHECK_NOTHROW(validate_boundary_map(good));

  BoundaryMap cw = good;
  std::reverse(cw.images.begin(), cw.images.end());
  std::reverse(cw.breakpoints.begin(), cw.breakpoints.end());
  CHECK_THROWS_AS(validate_boundary_map(cw), std::invalid_argument);

  BoundaryMap mismatch = good;
  mismatch.images.pop_back();
  CHECK_THROWS_AS(validate_boundary_map(mismatch), std::invalid_argument);

  BoundaryMap off = good;
  off.breakpoints.insert(off.breakpoints.begin() + 1, Point2{0.5, 0.2});
  off.images.insert(off.images.begin() + 1, Point2{0.5, 0.0});
  CHECK_THROWS_AS(validate_boundary_map(off), std::invalid_argument);

  BoundaryMap missing_corner;
  missing_corner.square = good.square;
  missing_corner.breakpoints = {{0, 0}, {1, 0}, {1, 1}};
  missing_corner.images = {{0, 0}, {1, 0}, {1, 1}};
  CHECK_THROWS_AS(validate_boundary_map(missing_corner), std::invalid_argument);

  BoundaryMap bowtie = good;
  std::swap(bowtie.images[1], bowtie.images[2]);
  CHECK_THROWS_AS(validate_boundary_map(bowtie), std::invalid_argument);
  CHECK_THROWS(extend_square(bowtie));
}

TEST_CASE("T-junctions are removed by splitting") {
  PAMap m;
  m.domain.vertices = {{0, 0}, {2, 0}, {1, 1}, {1, -1}, {1, 0}};
  m.domain.triangles = {{0, 1, 2}, {0, 3, 4}, {4, 3, 1}};
  m.image = m.domain.vertices;
  CHECK_FALSE(oracle::conforming(m.domain));
  std::vector<std::size_t> origin = conform_mesh(m);
  CHECK(m.num_triangles() == 4);
  REQUIRE(origin.size() == 4);
  int from_big = 0;
  for (std::size_t o : origin) from_big += o == 0;
  CHECK(from_big == 2);
  CHECK(oracle::conforming(m.domain));
  double area = 0.0;
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    CHECK(signed_area(m.domain_triangle(t)) > 0.0);
    area += signed_area(m.domain_triangle(t));
  }
  CHECK(area == doctest::Approx(2.0));
  // already conforming meshes are left alone
  PAMap before = m;
  origin = conform_mesh(m);
  CHECK(m.num_triangles() == before.num_triangles());
  for (std::size_t k = 0; k < origin.size(); ++k) CHECK(origin[k] == k);
}

TEST_CASE("random boundary corpus") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> count(4, 16);
  for (int k = 0; k < 40; ++k) {
    bool convex = k % 2 == 0;
    BoundaryMap bm = oracle::random_boundary_map(rng, count(rng), convex);
    CAPTURE(k);
    ExtensionMesh em = extend_square(bm);
    check_valid(bm, em);
    if (em.map.num_triangles() <= 200) CHECK(brute_force_injective(em.map));
    double L = boundary_bilip(bm);
    CHECK(measured_bilip(em) <= kExtensionCeilingFactor * L * L * L * L);
  }
}

TEST_CASE("extensions are deterministic") {
  std::mt19937_64 a(5), b(5);
  for (int k = 0; k < 5; ++k) {
    ExtensionMesh x = extend_square(oracle::random_boundary_map(a, 12, false));
    ExtensionMesh y = extend_square(oracle::random_boundary_map(b, 12, false));
    REQUIRE(x.map.num_vertices() == y.map.num_vertices());
    for (std::size_t i = 0; i < x.map.num_vertices(); ++i) {
      CHECK(x.map.domain.vertices[i] == y.map.domain.vertices[i]);
      CHECK(x.map.image[i] == y.map.image[i]);
    }
    CHECK(x.map.domain.triangles == y.map.domain.triangles);
  }
}
