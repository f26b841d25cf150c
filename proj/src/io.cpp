#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "bilip/format.hpp"
#include "bilip/pipeline.hpp"

namespace bilip {

void write_pamesh(const PAMap& m, std::ostream& out) {
  std::string buf = "PAMESH " + std::to_string(m.num_vertices()) + " " + std::to_string(m.num_triangles()) + "\n";
  for (std::size_t i = 0; i < m.num_vertices(); ++i) {
    buf += "v ";
    append_num(buf, m.domain.vertices[i].x);
    buf += ' ';
    append_num(buf, m.domain.vertices[i].y);
    buf += ' ';
    append_num(buf, m.image[i].x);
    buf += ' ';
    append_num(buf, m.image[i].y);
    buf += '\n';
    if (buf.size() > (1u << 20)) {
      out << buf;
      buf.clear();
    }
  }
  for (const auto& t : m.domain.triangles) {
    buf += "t " + std::to_string(t[0]) + " " + std::to_string(t[1]) + " " + std::to_string(t[2]) + "\n";
    if (buf.size() > (1u << 20)) {
      out << buf;
      buf.clear();
    }
  }
  out << buf;
}

PAMap read_pamesh(std::istream& in) {
  std::string tag;
  std::size_t nv = 0, nt = 0;
  if (!(in >> tag >> nv >> nt) || tag != "PAMESH") throw std::runtime_error("bad PAMESH header");
  PAMap m;
  m.domain.vertices.resize(nv);
  m.image.resize(nv);
  m.domain.triangles.resize(nt);
  for (std::size_t i = 0; i < nv; ++i) {
    Point2 z, w;
    if (!(in >> tag >> z.x >> z.y >> w.x >> w.y) || tag != "v") throw std::runtime_error("bad PAMESH vertex line");
    m.domain.vertices[i] = z;
    m.image[i] = w;
  }
  for (std::size_t k = 0; k < nt; ++k) {
    auto& t = m.domain.triangles[k];
    if (!(in >> tag >> t[0] >> t[1] >> t[2]) || tag != "t") throw std::runtime_error("bad PAMESH triangle line");
    for (int i : t)
      if (i < 0 || static_cast<std::size_t>(i) >= nv) throw std::runtime_error("PAMESH triangle index out of range");
  }
  return m;
}

void emit_report(const RunArtifacts& ra, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  const PipelineConfig& c = ra.cfg;
  std::vector<std::pair<std::string, std::string>> kv = report_fields(ra.report);
  kv.push_back({"config.map", c.map_spec});
  kv.push_back({"config.domain", c.domain_spec});
  kv.push_back({"config.eps", num(c.eps)});
  kv.push_back({"config.p", num(c.p)});
  kv.push_back({"config.r0", num(c.r0)});
  kv.push_back({"config.max_halvings", std::to_string(c.max_halvings)});
  kv.push_back({"config.quad_n", std::to_string(c.quad_n)});
  kv.push_back({"config.max_depth", std::to_string(c.max_depth)});
  kv.push_back({"config.pairs", std::to_string(c.pairs)});
  kv.push_back({"config.seed", std::to_string(c.seed)});
  kv.push_back({"config.naive", c.naive ? "true" : "false"});
  kv.push_back({"config.metric_quad_n", std::to_string(c.metric_quad_n)});
  kv.push_back({"config.linf_samples", std::to_string(c.linf_samples)});
  kv.insert(kv.end(), ra.extras.begin(), ra.extras.end());
  kv.push_back({"success", ra.success ? "true" : "false"});
  if (!ra.error.empty()) {
    kv.push_back({"error", ra.error});
    kv.push_back({"failed_square", std::to_string(ra.failed_square)});
  }
  for (const auto& [k, v] : kv) out << k << " = " << v << '\n';
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

namespace {

struct Panel {
  BBox box;
  double ox = 0.0, size = 480.0, margin = 10.0;
  double scale = 1.0;
  Panel(BBox b, double offset) : box(b), ox(offset) {
    double w = std::max(b.hi.x - b.lo.x, b.hi.y - b.lo.y);
    scale = w > 0.0 ? size / w : 1.0;
  }
  void point(std::string& s, Point2 p) const {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f,%.3f ", ox + margin + (p.x - box.lo.x) * scale,
                  margin + size - (p.y - box.lo.y) * scale);
    s += buf;
  }
};

}  // namespace

void emit_svg(const RunArtifacts& ra, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  const PAMap& m = ra.mesh;
  bool two = !ra.cfg.naive && !ra.extensions.empty();
  double width = two ? 1000.0 : 500.0;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"500\" viewBox=\"0 0 " << width
      << " 500\">\n";
  out << "<rect width=\"" << width << "\" height=\"500\" fill=\"white\"/>\n";
  BBox db, ib;
  for (Point2 p : m.domain.vertices) db.add(p);
  for (Point2 p : m.image) ib.add(p);
  std::string s;
  auto eps = [&](std::size_t k) { return k < ra.eps_triangle.size() && ra.eps_triangle[k]; };
  if (two) {
    Panel pd(db, 0.0);
    out << "<g id=\"domain\" stroke=\"#444\" stroke-width=\"0.3\">\n";
    for (std::size_t k = 0; k < m.num_triangles(); ++k) {
      Triangle t = m.domain_triangle(k);
      s = "<polygon class=\"dom\" fill=\"";
      s += eps(k) ? "#c9dcf2" : "#ffffff";
      s += "\" points=\"";
      pd.point(s, t.v0);
      pd.point(s, t.v1);
      pd.point(s, t.v2);
      s += "\"/>\n";
      out << s;
    }
    out << "</g>\n<g id=\"crosses\" stroke=\"#d03030\" stroke-width=\"1\">\n";
    for (const Cross& c : ra.crosses) {
      Point2 w = ra.grid.vertices[c.alpha].z;
      for (Point2 p : c.p) {
        s = "<polyline class=\"cross\" points=\"";
        pd.point(s, w);
        pd.point(s, p);
        s += "\"/>\n";
        out << s;
      }
    }
    out << "</g>\n";
  }
  Panel pi(ib, two ? 500.0 : 0.0);
  Snapper sn(ib);
  out << "<g id=\"image\" stroke=\"#444\" stroke-width=\"0.3\">\n";
  for (std::size_t k = 0; k < m.num_triangles(); ++k) {
    const auto& t = m.domain.triangles[k];
    bool flipped = orient(sn.snap(m.image[t[0]]), sn.snap(m.image[t[1]]), sn.snap(m.image[t[2]])) <= 0;
    s = "<polygon class=\"";
    s += flipped ? "img flipped\" fill=\"#e02020\"" : (eps(k) ? "img\" fill=\"#c9dcf2\"" : "img\" fill=\"#ffffff\"");
    s += " points=\"";
    pi.point(s, m.image[t[0]]);
    pi.point(s, m.image[t[1]]);
    pi.point(s, m.image[t[2]]);
    s += "\"/>\n";
    out << s;
  }
  out << "</g>\n</svg>\n";
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

void write_outputs(const RunArtifacts& ra) {
  namespace fs = std::filesystem;
  fs::path dir(ra.cfg.out_dir);
  fs::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream f(dir / name);
    if (!f) throw std::runtime_error("cannot write '" + (dir / name).string() + "'");
    return f;
  };
  if (ra.mesh.num_triangles() > 0) {
    auto f = open("mesh.pamesh");
    write_pamesh(ra.mesh, f);
  }
  emit_report(ra, (dir / "report.txt").string());
  if (!ra.cls.cells.empty()) {
    auto f = open("classification.txt");
    write_classification(ra.cls, f);
  }
  if (!ra.grid.sides.empty() && ra.grid_map.sides.size() == ra.grid.sides.size()) {
    auto f = open("grid.txt");
    write_grid_map(ra.grid, ra.grid_map, f);
  }
  {
    auto f = open("timings.txt");
    for (const auto& [k, v] : ra.timings) f << k << " = " << num(v) << '\n';
  }
  if (ra.cfg.svg && ra.mesh.num_triangles() > 0) emit_svg(ra, (dir / "figure.svg").string());
}

}  // namespace bilip
