#include <doctest.h>

#include <filesystem>
#include <random>

#include "bilip/maps.hpp"
#include "oracles.hpp"

using namespace bilip;

namespace {

const char* kBuiltins[] = {"identity", "affine:a11=2,a22=0.5", "affine:a11=1.2,a12=0.3,a21=-0.2,a22=0.9,b1=0.1",
                           "shear_sine", "polar_twist", "fold_candidate"};

Point2 interior_point(std::mt19937_64& rng, const Domain& d, double margin) {
  const BBox& b = d.box();
  std::uniform_real_distribution<double> ux(b.lo.x, b.hi.x), uy(b.lo.y, b.hi.y);
  for (;;) {
    Point2 z{ux(rng), uy(rng)};
    if (d.contains(z) && d.boundary_distance(z) > margin) return z;
  }
}

}  // namespace

TEST_CASE("evaluation of builtins") {
  auto id = make_map("identity");
  CHECK(id->eval({0.3, 0.7}) == Point2{0.3, 0.7});
  auto af = make_map("affine:a11=2,a22=0.5");
  Point2 w = af->eval({1, 1});
  CHECK(w.x == doctest::Approx(2.0));
  CHECK(w.y == doctest::Approx(0.5));
  auto sh = make_map("shear_sine:a=0.1,k=1");
  w = sh->eval({0, 0.25});
  CHECK(w.x == doctest::Approx(0.1));
  CHECK(w.y == doctest::Approx(0.25));
  CHECK_THROWS_AS(sh->eval({1.5, 0.5}), std::domain_error);
}

TEST_CASE("differentials") {
  auto af = make_map("affine:a11=2,a12=0.3,a21=0.1,a22=0.5");
  CHECK(af->diff({0.4, 0.4}) == Mat2{2, 0.3, 0.1, 0.5});
  auto sh = make_map("shear_sine:a=0.1,k=1");
  Mat2 d = sh->diff({0, 0});
  CHECK(d.a11 == doctest::Approx(1.0));
  CHECK(d.a12 == doctest::Approx(0.2 * 3.141592653589793));
  CHECK(d.a21 == doctest::Approx(0.0));
  CHECK(d.a22 == doctest::Approx(1.0));
  auto id = make_map("identity");
  Mat2 f = id->fd_diff({0.5, 0.3});
  CHECK(std::abs(f.a11 - 1) <= 1e-8);
  CHECK(std::abs(f.a12) <= 1e-8);
  CHECK(std::abs(f.a21) <= 1e-8);
  CHECK(std::abs(f.a22 - 1) <= 1e-8);
}

TEST_CASE("inversion examples") {
  auto id = make_map("identity");
  CHECK(id->invert({0.4, 0.4}) == Point2{0.4, 0.4});
  auto af = make_map("affine:a11=2,a22=0.5");
  Point2 z = af->invert({2, 0.5});
  CHECK(z.x == doctest::Approx(1.0));
  CHECK(z.y == doctest::Approx(1.0));
  auto sh = make_map("shear_sine:a=0.1,k=1");
  z = sh->invert(sh->eval({0.3, 0.6}));
  CHECK(dist(z, {0.3, 0.6}) <= 1e-9);
}

TEST_CASE("round trip on every builtin") {
  for (const char* spec : kBuiltins) {
    CAPTURE(spec);
    auto o = make_map(spec);
    std::mt19937_64 rng(41);
    for (int k = 0; k < 1000; ++k) {
      Point2 z = interior_point(rng, o->domain(), 1e-3);
      Point2 back = o->invert(o->eval(z));
      CHECK(dist(back, z) <= 1e-9);
    }
  }
}

TEST_CASE("finite differences match the analytic Jacobians") {
  for (const char* spec : kBuiltins) {
    CAPTURE(spec);
    auto o = make_map(spec);
    std::mt19937_64 rng(43);
    for (int k = 0; k < 100; ++k) {
      Point2 z = interior_point(rng, o->domain(), 1e-3);
      Mat2 a = o->diff(z), f = o->fd_diff(z);
      CHECK(op_norm(a - f) <= 1e-6 * std::max(1.0, op_norm(a)));
    }
  }
}

TEST_CASE("sampled Jacobians lie in the declared class") {
  for (const char* spec : kBuiltins) {
    if (std::string(spec) == "fold_candidate") continue;
    CAPTURE(spec);
    auto o = make_map(spec);
    std::mt19937_64 rng(47);
    for (int k = 0; k < 400; ++k) CHECK(in_L_class(o->diff(interior_point(rng, o->domain(), 0.0)), o->L()));
  }
}

TEST_CASE("estimated constants") {
  CHECK(std::abs(estimate_L(*make_map("identity"), 32) - 1.0) <= 1e-12);
  CHECK(std::abs(estimate_L(*make_map("affine:a11=2,a22=0.5"), 32) - 2.0) <= 1e-9);
  auto sh = make_map("shear_sine:a=0.1,k=1");
  double sweep = 1.0;
  for (int i = 0; i < 512; ++i)
    for (int j = 0; j < 512; ++j) {
      Point2 z{i / 511.0, j / 511.0};
      sweep = std::max(sweep, oracle::bilip_of(oracle::shear_sine_jacobian(0.1, 1.0, z)));
    }
  double est = estimate_L(*sh, 512);
  CHECK(est == doctest::Approx(sweep).epsilon(1e-9));
  CHECK(est <= sh->L() * (1 + 1e-9));
  for (const char* spec : kBuiltins) {
    CAPTURE(spec);
    auto o = make_map(spec);
    CHECK(estimate_L(*o, 64) <= o->L() * (1 + 1e-6));
  }
}

TEST_CASE("sampled map files") {
  auto sh = make_map("shear_sine");
  auto path = (std::filesystem::temp_directory_path() / "bilip_test_sampled.txt").string();
  write_sampled_map(*sh, 65, 65, path);
  auto s = read_sampled_map(path);
  CHECK(s->L() >= 1.0);
  std::mt19937_64 rng(53);
  for (int k = 0; k < 200; ++k) {
    Point2 z = interior_point(rng, s->domain(), 1e-3);
    CHECK(dist(s->eval(z), sh->eval(z)) <= 2e-3);
    CHECK(dist(s->invert(s->eval(z)), z) <= 1e-9);
  }
  std::filesystem::remove(path);
}

TEST_CASE("domains") {
  Domain l = parse_domain("lshape");
  CHECK(l.area() == doctest::Approx(0.75));
  CHECK_FALSE(l.convex());
  CHECK(l.contains({0.25, 0.75}));
  CHECK_FALSE(l.contains({0.75, 0.75}));
  Domain p = parse_domain("polygon:0,0;1,0;0.5,1");
  CHECK(p.area() == doctest::Approx(0.5));
  CHECK(p.convex());
  CHECK_THROWS(parse_domain("polygon:0,0;1,1;1,0;0,1"));
  CHECK_THROWS(make_map("no_such_map"));
}
