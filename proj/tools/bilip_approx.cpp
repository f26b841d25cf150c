#include <CLI11.hpp>
#include <iostream>

#include "bilip/parallel.hpp"
#include "bilip/pipeline.hpp"

int main(int argc, char** argv) {
  bilip::PipelineConfig cfg;
  cfg.out_dir = "out";
  unsigned workers = 0;
  CLI::App app{"Piecewise-affine approximation of planar bi-Lipschitz homeomorphisms"};
  app.add_option("--map", cfg.map_spec, "builtin name:key=val,... or sampled:path")->capture_default_str();
  app.add_option("--domain", cfg.domain_spec, "unit_square | rect:x0,y0,x1,y1 | lshape | polygon:x,y;...")
      ->capture_default_str();
  app.add_option("--eps", cfg.eps, "target for every error term")->capture_default_str();
  app.add_option("--p", cfg.p, "Sobolev exponent")->capture_default_str();
  app.add_option("--r0", cfg.r0, "initial square side")->capture_default_str();
  app.add_option("--max-halvings", cfg.max_halvings)->capture_default_str();
  app.add_option("--quad-n", cfg.quad_n, "quadrature points per axis for the mean deviation")->capture_default_str();
  app.add_option("--max-depth", cfg.max_depth, "quadtree depth below r")->capture_default_str();
  app.add_option("--pairs", cfg.pairs, "pairs sampled when checking the grid map")->capture_default_str();
  app.add_option("--seed", cfg.seed)->capture_default_str();
  app.add_option("--out", cfg.out_dir, "output directory")->capture_default_str();
  app.add_flag("--svg", cfg.svg, "write figure.svg");
  app.add_flag("--naive", cfg.naive, "plain interpolation at r0 without screening");
  app.add_option("--metric-quad-n", cfg.metric_quad_n)->capture_default_str();
  app.add_option("--linf-samples", cfg.linf_samples)->capture_default_str();
  app.add_option("--workers", workers, "threads, 0 for all cores")->capture_default_str();
  CLI11_PARSE(app, argc, argv);
  bilip::set_workers(workers);
  bilip::RunArtifacts ra;
  try {
    ra = bilip::run(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  const auto& r = ra.report;
  std::cout << "linf_map " << r.linf_map << "  linf_inv " << r.linf_inv << "  w1p_map " << r.w1p_map << "  w1p_inv "
            << r.w1p_inv << "\nbilip_v " << r.bilip_v << "  injective " << r.injective << "  orientation_ok "
            << r.orientation_ok << "  r " << r.r << "  triangles " << ra.mesh.num_triangles() << '\n';
  if (!ra.error.empty()) std::cerr << "error: " << ra.error << '\n';
  std::cout << "outputs in " << cfg.out_dir << '\n';
  return ra.success ? 0 : 1;
}
