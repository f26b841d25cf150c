#pragma once

#include <iosfwd>
#include <vector>

#include "bilip/geometry.hpp"
#include "bilip/maps.hpp"
#include "bilip/pamap.hpp"

namespace bilip {

struct CellRecord {
  Cell cell;
  bool eligible = false;  // the 3r square around it is compactly inside the domain
  bool accepted = false;
  Mat2 M;
  double deviation = 0.0;  // infinity when not eligible
};

struct LebesgueClassification {
  double r = 0.0;
  double delta = 0.0;
  int quad_n = 0;
  Point2 origin;
  std::vector<CellRecord> cells;  // every r-cell inside the domain, sorted
  RightPolygon accepted;          // the right polygon of accepted squares
  double area_deficit = 0.0;
};

struct InterpolationMesh {
  PAMap map;
  double r = 0.0;
  Point2 origin;
  std::vector<Cell> cells;
};

/// Midpoint-rule mean of |Du - m| over sq on a quad_n x quad_n subgrid.
double avg_deviation(const MapOracle& o, const Square& sq, const Mat2& m, int quad_n);

double delta_of_eta(double eta, double L);
/// inverse relation: the eta guaranteed by a measured mean deviation
double eta_of_delta(double delta, double L);

/// sup over a samples x samples grid of |u(z) - u(c) - m (z - c)| on the square of side rho
double check_linfty_lemma(const MapOracle& o, Point2 center, double rho, const Mat2& m, int samples = 64);

/// r-cells of the lattice origin + r Z^2 lying in the closed domain, sorted
std::vector<Cell> cells_inside(const Domain& d, Point2 origin, double r);
/// closed square [lo, hi] inside the closed domain
bool box_inside(const Domain& d, Point2 lo, Point2 hi);
/// closed square [lo, hi] inside the open domain
bool box_compactly_inside(const Domain& d, Point2 lo, Point2 hi);
/// the domain boundary passes through the open square
bool box_meets_boundary(const Domain& d, Point2 lo, Point2 hi);

LebesgueClassification classify(const MapOracle& o, double r, double delta, int quad_n);

InterpolationMesh interpolate(const MapOracle& o, const LebesgueClassification& cls);
/// interpolation on an arbitrary set of r-cells, two triangles per cell split along SW-NE
InterpolationMesh interpolate_cells(const MapOracle& o, const RightPolygon& cells);
/// interpolation of every r-cell of the domain, with no Lebesgue screening
InterpolationMesh naive_interpolation(const MapOracle& o, double r);

double eta_budget(double L, double eps, double p, double r, double area);

void write_classification(const LebesgueClassification& cls, std::ostream& out);

}  // namespace bilip
