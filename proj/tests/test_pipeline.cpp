#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "bilip/maps.hpp"
#include "bilip/parallel.hpp"
#include "bilip/pipeline.hpp"
#include "oracles.hpp"

using namespace bilip;
namespace fs = std::filesystem;

namespace {

PipelineConfig small(const std::string& map, const std::string& domain = "unit_square") {
  PipelineConfig c;
  c.map_spec = map;
  c.domain_spec = domain;
  c.r0 = 0.125;
  c.max_halvings = 0;
  c.quad_n = 4;
  c.pairs = 2000;
  c.max_depth = 5;
  return c;
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("bilip_pipeline_" + name);
  fs::remove_all(p);
  return p;
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

// mesh vertices on the outer boundary: endpoints of edges used by a single triangle
std::vector<int> boundary_vertices(const PAMap& m) {
  std::map<std::pair<int, int>, int> count;
  for (const auto& t : m.domain.triangles)
    for (int e = 0; e < 3; ++e) {
      int a = t[e], b = t[(e + 1) % 3];
      count[{std::min(a, b), std::max(a, b)}] += 1;
    }
  std::vector<char> on(m.num_vertices(), 0);
  for (const auto& [e, c] : count)
    if (c == 1) on[e.first] = on[e.second] = 1;
  std::vector<int> out;
  for (std::size_t v = 0; v < on.size(); ++v)
    if (on[v]) out.push_back(static_cast<int>(v));
  return out;
}

}  // namespace

TEST_CASE("identity and affine maps are reproduced exactly") {
  for (const char* spec : {"identity", "affine:a11=1.2,a12=0.3,a21=-0.2,a22=0.9,b1=0.1"}) {
    CAPTURE(spec);
    RunArtifacts ra = run(small(spec));
    CHECK(ra.error.empty());
    CHECK(ra.success);
    CHECK(ra.report.injective);
    CHECK(ra.report.orientation_ok);
    CHECK(ra.report.linf_map <= 1e-10);
    CHECK(ra.report.linf_inv <= 1e-10);
    CHECK(ra.report.w1p_map <= 1e-10);
    CHECK(ra.report.w1p_inv <= 1e-10);
    CHECK(!ra.omega_eps.cells.empty());
    CHECK(ra.report.bilip_v <= ra.L * (1 + 1e-9));
  }
}

TEST_CASE("report file carries every field") {
  fs::path dir = scratch("report");
  PipelineConfig c = small("shear_sine");
  c.out_dir = dir.string();
  RunArtifacts ra = run(c);
  auto kv = read_report(dir / "report.txt");
  for (const char* key : {"linf_map", "linf_inv", "w1p_map", "w1p_inv", "bilip_v", "area_deficit", "injective",
                          "orientation_ok", "r", "eta", "delta", "eps_target", "success"})
    CHECK(kv.count(key) == 1);
  CHECK(kv["injective"] == (ra.report.injective ? "true" : "false"));
  CHECK(std::stod(kv["eps_target"]) == doctest::Approx(c.eps));
  CHECK(fs::exists(dir / "mesh.pamesh"));
  CHECK(fs::exists(dir / "classification.txt"));
  CHECK(fs::exists(dir / "grid.txt"));
  CHECK(fs::exists(dir / "timings.txt"));
  CHECK_FALSE(fs::exists(dir / "figure.svg"));
  std::ifstream mf(dir / "mesh.pamesh");
  PAMap back = read_pamesh(mf);
  CHECK(back.num_triangles() == ra.mesh.num_triangles());
  CHECK(back.image == ra.mesh.image);
  fs::remove_all(dir);
}

TEST_CASE("glued mesh is a homeomorphism with consistent interfaces") {
  for (const char* domain : {"unit_square", "lshape"}) {
    CAPTURE(domain);
    RunArtifacts ra = run(small("shear_sine", domain));
    REQUIRE(ra.error.empty());
    CHECK(ra.report.injective);
    CHECK(ra.report.orientation_ok);
    CHECK(oracle::conforming(ra.mesh.domain));
    if (ra.mesh.num_triangles() <= 200) CHECK(oracle::images_disjoint(ra.mesh));

    // every extension breakpoint appears in the glued mesh with the same image
    std::map<std::pair<double, double>, Point2> img;
    for (std::size_t v = 0; v < ra.mesh.num_vertices(); ++v)
      img[{ra.mesh.domain.vertices[v].x, ra.mesh.domain.vertices[v].y}] = ra.mesh.image[v];
    bool glued = true;
    for (const ExtensionMesh& e : ra.extensions)
      for (std::size_t v = 0; v < e.map.num_vertices(); ++v) {
        auto it = img.find({e.map.domain.vertices[v].x, e.map.domain.vertices[v].y});
        glued = glued && it != img.end() && it->second == e.map.image[v];
      }
    CHECK(glued);

    // polygonal domain: the glued map agrees with u on the boundary
    auto o = make_map("shear_sine", parse_domain(domain));
    double worst = 0.0;
    for (int v : boundary_vertices(ra.mesh)) worst = std::max(worst, dist(ra.mesh.image[v], o->eval(ra.mesh.domain.vertices[v])));
    CHECK(worst <= 1e-12);

    double ext = 1.0;
    for (const ExtensionMesh& e : ra.extensions) ext = std::max(ext, measured_bilip(e));
    CHECK(ra.report.bilip_v <= std::max(ra.L + ra.eps_internal, ext) * (1 + 1e-12));
  }
}

TEST_CASE("outputs do not depend on the worker count") {
  std::vector<std::string> files{"mesh.pamesh", "report.txt", "classification.txt", "grid.txt"};
  std::vector<std::string> first;
  for (unsigned w : {1u, 3u}) {
    set_workers(w);
    fs::path dir = scratch("det" + std::to_string(w));
    PipelineConfig c = small("polar_twist");
    c.out_dir = dir.string();
    c.svg = true;
    run(c);
    std::vector<std::string> got;
    for (const auto& f : files) got.push_back(slurp(dir / f));
    got.push_back(slurp(dir / "figure.svg"));
    if (first.empty())
      first = got;
    else
      for (std::size_t k = 0; k < got.size(); ++k) CHECK(got[k] == first[k]);
    fs::remove_all(dir);
  }
  set_workers(0);
}

TEST_CASE("figure output") {
  fs::path dir = scratch("svg");
  PipelineConfig c = small("fold_candidate");
  c.naive = true;
  c.r0 = 0.25;
  c.svg = true;
  c.out_dir = dir.string();
  RunArtifacts ra = run(c);
  CHECK_FALSE(ra.success);
  CHECK_FALSE(ra.report.orientation_ok);
  std::string svg = slurp(dir / "figure.svg");
  CHECK(svg.find("width=\"500\"") != std::string::npos);
  CHECK(svg.find("id=\"domain\"") == std::string::npos);
  CHECK(svg.find("img flipped") != std::string::npos);
  CHECK(svg.find("#e02020") != std::string::npos);
  CHECK(svg.rfind("</svg>") != std::string::npos);

  c.naive = false;
  c.map_spec = "shear_sine";
  ra = run(c);
  REQUIRE_FALSE(ra.extensions.empty());
  svg = slurp(dir / "figure.svg");
  CHECK(svg.find("width=\"1000\"") != std::string::npos);
  CHECK(svg.find("id=\"domain\"") != std::string::npos);
  CHECK(svg.find("id=\"crosses\"") != std::string::npos);
  CHECK(svg.find("img flipped") == std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("failures are reported") {
  PipelineConfig bad = small("identity");
  bad.eps = -1;
  CHECK_THROWS_AS(run(bad), std::invalid_argument);
  bad = small("identity");
  bad.p = 0.5;
  CHECK_THROWS_AS(run(bad), std::invalid_argument);
  CHECK_THROWS(run(small("no_such_map")));

  // a failed stage keeps the partial artifacts and marks the report
  fs::path dir = scratch("error");
  RunArtifacts ra = run(small("identity"));
  ra.cfg.out_dir = dir.string();
  ra.error = "extension failed on square 3: test";
  ra.failed_square = 3;
  ra.success = false;
  write_outputs(ra);
  auto kv = read_report(dir / "report.txt");
  CHECK(kv["success"] == "false");
  CHECK(kv["failed_square"] == "3");
  CHECK(kv["error"].find("square 3") != std::string::npos);
  CHECK(fs::exists(dir / "mesh.pamesh"));
  fs::remove_all(dir);
}

TEST_CASE("internal target") {
  CHECK(internal_eps(0.1, 1.0, 2.0) > 0.0);
  CHECK(internal_eps(0.1, 1.0, 2.0) < 0.1);
  double e = internal_eps(0.1, 1.5, 1.0);
  double K = 1.5 + kC1 * std::pow(1.5, 4);
  CHECK(e + 2 * K * e + 2 * (K * std::sqrt(e / 3.141592653589793) + e) <= 0.1 * (1 + 1e-9));
  CHECK_THROWS(internal_eps(0.0, 1.0, 2.0));
}
