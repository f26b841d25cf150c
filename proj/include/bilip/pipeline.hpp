#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "bilip/extension.hpp"
#include "bilip/gridapprox.hpp"
#include "bilip/lebesgue.hpp"
#include "bilip/metrics.hpp"
#include "bilip/pamap.hpp"

namespace bilip {

struct PipelineConfig {
  std::string map_spec = "shear_sine";
  std::string domain_spec = "unit_square";
  double eps = 0.1;  // target for every error term
  double p = 2.0;
  double r0 = 0.125;
  int max_halvings = 6;
  int quad_n = 16;
  int max_depth = 8;
  long pairs = 100000;
  std::uint64_t seed = 1;
  std::string out_dir;  // empty: nothing is written by run()
  bool svg = false;
  bool naive = false;
  int metric_quad_n = 2;
  int linf_samples = 1;
};

void validate_config(const PipelineConfig& cfg);

struct RAttempt {
  double r = 0.0;
  double eta = 0.0;
  double delta = 0.0;
  std::size_t accepted = 0;
  double area_deficit = 0.0;
};

struct RunArtifacts {
  PipelineConfig cfg;
  std::string map_spec;
  double L = 0.0;
  double eps_internal = 0.0;
  std::vector<RAttempt> attempts;
  LebesgueClassification cls;
  RightPolygon omega_eps;  // accepted squares kept for the interpolation
  Tiling tiling;
  GridQ grid;
  std::vector<Cross> crosses;
  GridMap grid_map;
  std::vector<int> extension_square;  // tiling index of each extension
  std::vector<ExtensionMesh> extensions;
  PAMap mesh;
  std::vector<char> eps_triangle;  // per mesh triangle: from the Lebesgue interpolation
  InjectivityReport injectivity;
  ApproxReport report;
  std::vector<std::pair<std::string, std::string>> extras;
  std::vector<std::pair<std::string, double>> timings;
  bool success = false;  // injective, orientation preserving and every term within eps
  std::string error;     // non-empty when a stage failed
  int failed_square = -1;
};

/// eps with eps + 2 (L + C1 L^4) eps^(1/p) + 2 ((L + C1 L^4) sqrt(eps / pi) + eps) <= eps_bar
double internal_eps(double eps_bar, double L, double p);

constexpr double kC3 = 636000.0;
constexpr double kC1 = 72.0 * 72.0 * 72.0 * 72.0 * kC3;

/// Full construction. Stage failures are recorded in RunArtifacts::error with the
/// artifacts built so far; outputs go to cfg.out_dir when it is set.
RunArtifacts run(const PipelineConfig& cfg);

void write_outputs(const RunArtifacts& ra);
void emit_report(const RunArtifacts& ra, const std::string& path);
void emit_svg(const RunArtifacts& ra, const std::string& path);

}  // namespace bilip
