#pragma once

#include <functional>
#include <string>
#include <vector>

#include "bilip/geometry.hpp"
#include "bilip/pamap.hpp"

namespace bilip {

/// Piecewise-affine data on the boundary of a square: breakpoints counterclockwise
/// on the square boundary (all four corners among them) and their images.
struct BoundaryMap {
  Square square;
  std::vector<Point2> breakpoints;
  std::vector<Point2> images;
};

/// Extension of a BoundaryMap; vertices [0, boundary_count) are the breakpoints in order.
struct ExtensionMesh {
  PAMap map;
  std::size_t boundary_count = 0;
  std::string method;  // "fan", "split" or "tutte"
  double blend = 0.0;  // Tutte weight of the accepted interior placement
};

using Guide = std::function<Point2(Point2)>;

struct ExtensionOptions {
  Guide forward;   // optional map of the square used to place the fan centre
  Guide backward;  // optional inverse used to pull interior image points back
};

/// Throws std::invalid_argument when the data is not a simple counterclockwise loop
/// matching the square boundary.
void validate_boundary_map(const BoundaryMap& bm);

ExtensionMesh extend_square(const BoundaryMap& bm, const ExtensionOptions& opts = {});

/// Splits triangles whose edges pass through other mesh vertices (T-junctions);
/// returns, per resulting triangle, the index of the triangle it came from.
std::vector<std::size_t> conform_mesh(PAMap& m);

/// max over triangles of max(sigma_max, 1 / sigma_min) of the affine pieces
double measured_bilip(const PAMap& m);
inline double measured_bilip(const ExtensionMesh& em) { return measured_bilip(em.map); }

/// bi-Lipschitz ratio of the boundary data over all pairs of breakpoints and edge midpoints
double boundary_bilip(const BoundaryMap& bm);

/// 72^4 * 636000
constexpr double kExtensionCeilingFactor = 72.0 * 72.0 * 72.0 * 72.0 * 636000.0;

}  // namespace bilip
