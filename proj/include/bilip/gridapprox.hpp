#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "bilip/geometry.hpp"
#include "bilip/maps.hpp"

namespace bilip {

/// Square of the tiling in lattice units: [x, x + size] x [y, y + size].
struct TileSquare {
  std::int64_t x = 0, y = 0, size = 0;
  bool in_eps = false;
};

struct Tiling {
  Point2 origin;
  double unit = 0.0;          // lattice unit
  double r = 0.0;             // side of the Lebesgue squares
  std::int64_t r_units = 1;   // r / unit
  bool uniform = false;       // finite r-tiling of a right polygon
  std::vector<TileSquare> squares;
  std::vector<std::vector<int>> adjacency;  // squares sharing a segment of positive length
  double uncovered_area = 0.0;

  Point2 point(std::int64_t X, std::int64_t Y) const { return lattice_point(origin, unit, X, Y); }
  Square square(std::size_t k) const;
};

/// Uniform r-tiling when the domain is a right polygon on the r-grid, else a 2:1
/// balanced quadtree refined toward the boundary down to max_depth.
Tiling build_tiling(const Domain& omega, const RightPolygon& omega_eps, int max_depth);

/// Pairwise intersection rule for squares: empty, a common vertex, or a side of one of the two.
bool tiling_valid(const Tiling& t);

struct GridVertex {
  std::int64_t X = 0, Y = 0;
  Point2 z;
  std::vector<int> sides;
  double ell = 0.0;                 // shortest incident side
  bool on_eps = false;              // in the closure of the Lebesgue region
  bool needs_cross = false;         // has an incident side outside the Lebesgue region
  bool on_domain_boundary = false;
};

/// Segment between consecutive grid vertices, oriented from the smaller lattice coordinate.
struct GridSide {
  int a = -1, b = -1;
  int squares[2] = {-1, -1};
  bool in_eps = false;              // belongs to a Lebesgue square
  bool on_domain_boundary = false;  // lies on the boundary of the domain
  double length = 0.0;
};

struct GridQ {
  std::vector<GridVertex> vertices;
  std::vector<GridSide> sides;
  /// per square, its boundary sides counterclockwise; second = traversed from a to b
  std::vector<std::vector<std::pair<int, bool>>> square_sides;
  double r = 0.0;
};

GridQ build_grid(const Tiling& t, const Domain& omega);

struct Cross {
  int alpha = -1;
  double xi = 0.0;
  std::vector<int> sides;       // incident sides
  std::vector<double> frac;     // fraction along each side, measured from the vertex
  std::vector<Point2> p;        // endpoints in the domain
  std::vector<Point2> img;      // target values at the endpoints
  int halvings = 0;
};

struct Breakpoints {
  std::vector<double> t;
  std::vector<Point2> z;
  std::vector<Point2> img;
};

/// Interpolation of u along pq: consecutive breakpoints at the last
/// parameter whose image stays within rho of the previous breakpoint image.
Breakpoints segment_interpolation(const MapOracle& o, Point2 p, Point2 q, double rho);

/// Per side breakpoints of a piecewise-linear map on the grid.
struct SideMap {
  std::vector<double> t;
  std::vector<Point2> z;
  std::vector<Point2> img;
  double cross_a = 0.0, cross_b = 0.0;  // cross fractions from each end
  double rho = 0.0;
};

struct GridMap {
  std::vector<SideMap> sides;
  std::vector<Point2> vertex_image;
};

/// Piecewise-linear data on the Lebesgue sides (the interpolation restricted to them)
/// and images of every grid vertex.
GridMap eps_boundary_map(const MapOracle& o, const GridQ& grid);

Cross compute_cross(const MapOracle& o, const GridQ& grid, const GridMap& boundary_map, int alpha);

struct GridMapOptions {
  bool adaptive_rho = true;  // coarsest dyadic rho meeting the sup-error target
};

GridMap build_grid_map(const MapOracle& o, const GridQ& grid, const std::vector<Cross>& crosses,
                       const GridMap& boundary_map, const GridMapOptions& opts = {});

Point2 grid_eval(const GridMap& gm, int side, double t);
/// the adjusted map with chords on crosses and u elsewhere
Point2 adjusted_eval(const MapOracle& o, const GridQ& grid, const GridMap& gm, int side, double t);

struct GridBilip {
  double lower = std::numeric_limits<double>::infinity();
  double upper = 0.0;
  double lower_cross = std::numeric_limits<double>::infinity();    // both points in one cross
  double lower_outside = std::numeric_limits<double>::infinity();  // both outside crosses
  double lower_mixed = std::numeric_limits<double>::infinity();
  long pairs = 0;
};

using GridEval = std::function<Point2(int side, double t)>;

/// Ratios |f(z) - f(z')| / |z - z'| over pairs stratified into same-cross, same-side
/// and unrelated draws.
GridBilip verify_grid_bilip(const GridQ& grid, const GridMap& gm, const GridEval& f, long pairs,
                            std::uint64_t seed);
GridBilip verify_grid_bilip(const GridQ& grid, const GridMap& gm, long pairs, std::uint64_t seed);

struct GridInjectivity {
  bool ok = true;
  int side_a = -1, side_b = -1;
};

/// Exact pairwise test of all image pieces.
GridInjectivity check_grid_injective(const GridQ& grid, const GridMap& gm);

void write_grid_map(const GridQ& grid, const GridMap& gm, std::ostream& out);

}  // namespace bilip
