#pragma once
// Reference computations used only by the tests. Each one takes a different route
// from the library code it checks: plain floating point instead of snapped integer
// predicates, eigenvalues of M^T M instead of the closed-form SVD, exhaustive
// scans instead of bisection, brute-force search instead of bucket grids.

#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "bilip/extension.hpp"
#include "bilip/geometry.hpp"
#include "bilip/gridapprox.hpp"
#include "bilip/maps.hpp"
#include "bilip/pamap.hpp"

namespace oracle {

using bilip::Mat2;
using bilip::Point2;

// sqrt of the largest / smallest eigenvalue of M^T M by the quadratic formula
double sigma_max(const Mat2& m);
double sigma_min(const Mat2& m);
double bilip_of(const Mat2& m);

// the linear part of the affine map taking triangle a onto triangle b, via a 6x6-free
// route: solve for the images of e1 and e2 from barycentric coordinates
Mat2 affine_part(const std::array<Point2, 3>& a, const std::array<Point2, 3>& b);

// max over triangles of bilip_of(affine_part)
double mesh_bilip(const bilip::PAMap& m);

double tri_area(Point2 a, Point2 b, Point2 c);

// segment intersection classified by parametric solve, closed segments
bool segments_touch(Point2 a, Point2 b, Point2 c, Point2 d);

// no two non-adjacent edges touch, adjacent ones only at their shared vertex
bool polygon_simple(const std::vector<Point2>& poly);

// area of the intersection of two ccw triangles (convex clipping)
double overlap_area(const std::array<Point2, 3>& a, const std::array<Point2, 3>& b);

// the images form a positively oriented, pairwise interior-disjoint family
bool images_disjoint(const bilip::PAMap& m, double rel_tol = 1e-12);

// every pair of domain triangles meets in nothing, a shared vertex or a shared side
bool conforming(const bilip::Triangulation& t);

// barycentric evaluation with a linear search over all triangles
Point2 eval_linear_search(const bilip::PAMap& m, Point2 z);

// numeric minimisation of f(R) = 4 sqrt2 L / R + 2 R delta over R, then a solve for
// delta such that the minimum equals eta
double delta_for_eta(double eta, double L);

// largest eta satisfying the six constraint inequalities, by bisection
double eta_budget(double L, double eps, double p, double r, double area);

// midpoint mean of |J(z) - m| with J supplied by the caller
double mean_deviation(const std::function<Mat2(Point2)>& J, const bilip::Square& sq, const Mat2& m, int n);

// sup of |u(z) - u(c) - m (z - c)| on an n x n grid over the square of side rho
double sup_affine_gap(const bilip::MapOracle& o, Point2 c, double rho, const Mat2& m, int n);

// closed form Jacobian of (x + a sin(2 pi k y), y)
Mat2 shear_sine_jacobian(double a, double k, Point2 z);

// first parameter in a uniform scan of n steps where |u(p + t(q-p)) - u(p)| exceeds
// radius, refined by one linear interpolation between the bracketing samples
double first_exit(const std::function<Point2(double)>& f, double radius, double tmax, int n);

// breakpoints by a dense scan: from each breakpoint, the last scan parameter whose
// image stays within rho, refined linearly towards the following sample
std::vector<double> scan_breakpoints(const bilip::MapOracle& o, Point2 p, Point2 q, double rho, int n);

// sup |u - v| over n random points of every triangle plus its vertices
double dense_linf(const bilip::MapOracle& o, const bilip::PAMap& m, int per_triangle, std::uint64_t seed);

// W^{1,p} error with each triangle split into k^2 congruent pieces and a 3-point
// Gauss rule on each piece
double gauss_w1p(const bilip::MapOracle& o, const bilip::PAMap& m, double p, int k, bool inverse);

// ratio range of a grid map over random pairs drawn uniformly by side
struct Ratio {
  double lower = 1e300, upper = 0.0;
};
Ratio grid_pair_ratios(const bilip::GridQ& g, const bilip::GridMap& gm, long pairs, std::uint64_t seed);

// piecewise-linear evaluation of a side map by linear search over its breakpoints
Point2 side_eval(const bilip::SideMap& s, double t);

// test corpus: boundary data on the unit square with the four corners plus extra
// breakpoints at least 0.05 apart in perimeter length; the image is a rotated star
// polygon (on a circle when convex, random radii in [0.4, 1.2] otherwise)
bilip::BoundaryMap random_boundary_map(std::mt19937_64& rng, int breakpoints, bool convex);

// the L-shaped image example: corners and side midpoints onto a six-cornered L
bilip::BoundaryMap lshape_boundary_map();

}  // namespace oracle
