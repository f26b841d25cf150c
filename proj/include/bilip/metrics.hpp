#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "bilip/geometry.hpp"
#include "bilip/maps.hpp"
#include "bilip/pamap.hpp"

namespace bilip {

/// Uniform bucket grid over a triangle soup, about two buckets per triangle.
class PointLocator {
 public:
  PointLocator(const std::vector<Point2>& vertices, const std::vector<std::array<int, 3>>& triangles);
  /// containing triangle (largest minimal barycentric weight wins) or -1
  int locate(Point2 z, std::array<double, 3>* bary = nullptr) const;

 private:
  const std::vector<Point2>* v_;
  const std::vector<std::array<int, 3>>* t_;
  BBox box_;
  int gx_ = 1, gy_ = 1;
  double cw_ = 1.0, ch_ = 1.0;
  std::vector<std::vector<int>> buckets_;
};

/// Forward and inverse evaluation of a PAMap via point location on either side.
class PAEvaluator {
 public:
  explicit PAEvaluator(const PAMap& m);
  Point2 eval(Point2 z) const;    // throws std::domain_error outside the domain
  Point2 invert(Point2 w) const;  // throws std::domain_error outside the image

 private:
  const PAMap& m_;
  PointLocator dom_, img_;
};

Point2 pa_eval(const PAMap& m, Point2 z);
Point2 pa_invert(const PAMap& m, Point2 w);

struct InjectivityReport {
  bool injective = false;
  bool orientation_ok = false;
  std::string witness = "none";  // none | flipped_triangle | crossing_edges
  int triangle = -1;
  std::array<int, 2> edge_a{-1, -1}, edge_b{-1, -1};
  bool brute_force_checked = false;
};

/// Positive image areas and a simple image boundary. Meshes with at most 200
/// triangles are also checked pairwise; disagreement throws std::logic_error.
InjectivityReport check_injective(const PAMap& m);
/// pairwise closed-triangle overlap test of the images, plus positive orientation
bool brute_force_injective(const PAMap& m);

double pa_bilip(const PAMap& m);

/// Optional triangle subset for restricted norms; empty means all triangles.
using TriangleMask = std::vector<char>;

/// Sup of |u - v| (or |u^-1 - v^-1| over the image) on a barycentric lattice of
/// level samples + 3 per triangle plus edge midpoints.
double linf_error(const MapOracle& o, const PAMap& m, int samples, bool inverse, const TriangleMask& mask = {});

/// L^p norm of Du - Dv (or of the inverse differentials by change of variables)
/// with quad_n^2 centroid nodes per triangle.
double w1p_error(const MapOracle& o, const PAMap& m, double p, int quad_n, bool inverse,
                 const TriangleMask& mask = {});

struct ApproxReport {
  double linf_map = 0.0;
  double linf_inv = 0.0;
  double w1p_map = 0.0;
  double w1p_inv = 0.0;
  double bilip_v = 0.0;
  double area_deficit = 0.0;
  bool injective = false;
  bool orientation_ok = false;
  double r = 0.0;
  double eta = 0.0;
  double delta = 0.0;
  double eps_target = 0.0;
};

/// (name, value) pairs with the field names above, in declaration order
std::vector<std::pair<std::string, std::string>> report_fields(const ApproxReport& r);

}  // namespace bilip
