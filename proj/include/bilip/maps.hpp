#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bilip/geometry.hpp"

namespace bilip {

/// Closed simple polygonal domain, stored counterclockwise.
class Domain {
 public:
  explicit Domain(Polygon boundary);
  const Polygon& boundary() const { return boundary_; }
  const BBox& box() const { return box_; }
  double area() const { return area_; }
  double diameter() const { return box_.diameter(); }
  bool convex() const { return convex_; }
  bool axis_aligned() const { return axis_aligned_; }
  /// closed containment up to tol (absolute)
  bool contains(Point2 z, double tol = 0.0) const;
  double boundary_distance(Point2 z) const { return distance_to_boundary(boundary_, z); }
  /// every vertex lies on the lattice origin + r * Z^2 and all edges are axis-aligned
  bool aligned_to(Point2 origin, double r) const;
  std::string spec() const { return spec_; }
  void set_spec(std::string s) { spec_ = std::move(s); }

 private:
  Polygon boundary_;
  BBox box_;
  double area_ = 0.0;
  bool convex_ = false;
  bool axis_aligned_ = false;
  std::string spec_;
};

/// unit_square | rect:x0,y0,x1,y1 | lshape | polygon:x,y;x,y;...
Domain parse_domain(const std::string& spec);

class MapOracle {
 public:
  MapOracle(Domain domain, double L);
  virtual ~MapOracle() = default;

  const Domain& domain() const { return domain_; }
  double L() const { return L_; }
  virtual std::string spec() const = 0;

  /// u(z); throws std::domain_error outside the domain
  Point2 eval(Point2 z) const;
  /// Du(z); analytic when available, else central differences
  Mat2 diff(Point2 z) const;
  /// central differences with step 1e-6 * diameter; throws if the stencil leaves the domain
  Mat2 fd_diff(Point2 z) const;
  /// u^{-1}(w) with |u(z) - w| <= 1e-10; throws std::runtime_error on failure
  Point2 invert(Point2 w) const;

  // Unchecked access, valid on a neighbourhood of the domain.
  virtual Point2 map(Point2 z) const = 0;
  virtual Mat2 jacobian(Point2 z) const;
  virtual bool analytic_jacobian() const { return false; }
  /// inverse without domain check; seed is a hint for iterative inverses
  Point2 inverse_ext(Point2 w, const Point2* seed = nullptr) const;

 protected:
  virtual std::optional<Point2> inverse_closed(Point2) const { return std::nullopt; }
  Point2 newton(Point2 w, Point2 seed) const;
  Point2 grid_seed(Point2 w) const;
  Mat2 central_difference(Point2 z) const;
  void set_L(double L) { L_ = L; }

  Domain domain_;
  double L_ = 1.0;
  double h_ = 1e-6;
  double tol_ = 1e-9;
};

class IdentityMap : public MapOracle {
 public:
  explicit IdentityMap(Domain d);
  std::string spec() const override { return "identity"; }
  Point2 map(Point2 z) const override { return z; }
  Mat2 jacobian(Point2) const override { return Mat2::identity(); }
  bool analytic_jacobian() const override { return true; }

 protected:
  std::optional<Point2> inverse_closed(Point2 w) const override { return w; }
};

class AffineMap : public MapOracle {
 public:
  AffineMap(Domain d, Mat2 M, Point2 b);
  std::string spec() const override;
  Point2 map(Point2 z) const override { return M_ * z + b_; }
  Mat2 jacobian(Point2) const override { return M_; }
  bool analytic_jacobian() const override { return true; }

 protected:
  std::optional<Point2> inverse_closed(Point2 w) const override { return Minv_ * (w - b_); }

 private:
  Mat2 M_, Minv_;
  Point2 b_;
};

/// u(x, y) = (x + a sin(2 pi k y), y)
class ShearSineMap : public MapOracle {
 public:
  ShearSineMap(Domain d, double a, double k);
  std::string spec() const override;
  Point2 map(Point2 z) const override;
  Mat2 jacobian(Point2 z) const override;
  bool analytic_jacobian() const override { return true; }

 protected:
  std::optional<Point2> inverse_closed(Point2 w) const override;

 private:
  double a_, k_;
};

/// u(z) = c + R(tau |z - c|)(z - c), area preserving
class PolarTwistMap : public MapOracle {
 public:
  PolarTwistMap(Domain d, double tau, Point2 c);
  std::string spec() const override;
  Point2 map(Point2 z) const override;
  Mat2 jacobian(Point2 z) const override;
  bool analytic_jacobian() const override { return true; }

 protected:
  std::optional<Point2> inverse_closed(Point2 w) const override;

 private:
  double tau_;
  Point2 c_;
};

/// u(z) = c + R(theta(x))(z - c) with theta ramping from 0 to -s across the strip
/// [x0 - w/2, x0 + w/2] along a C^1 smoothstep. Declared L comes from a dense sweep.
class FoldMap : public MapOracle {
 public:
  FoldMap(Domain d, double s, double x0, double w, Point2 c);
  std::string spec() const override;
  Point2 map(Point2 z) const override;
  Mat2 jacobian(Point2 z) const override;
  bool analytic_jacobian() const override { return true; }

 private:
  double theta(double x) const;
  double dtheta(double x) const;
  double s_, x0_, w_;
  Point2 c_;
};

/// Bilinear interpolation of samples on a regular grid.
class SampledMap : public MapOracle {
 public:
  SampledMap(Domain d, double L, std::vector<double> xs, std::vector<double> ys,
             std::vector<Point2> values, std::string path);
  std::string spec() const override { return "sampled:" + path_; }
  Point2 map(Point2 z) const override;
  Mat2 jacobian(Point2 z) const override;
  bool analytic_jacobian() const override { return true; }
  const std::vector<double>& xs() const { return xs_; }
  const std::vector<double>& ys() const { return ys_; }

 private:
  void locate(Point2 z, std::size_t& i, std::size_t& j, double& s, double& t) const;
  std::vector<double> xs_, ys_;
  std::vector<Point2> vals_;  // row-major, rows along y
  std::string path_;
};

/// Reads the SAMPLEDMAP text format; the domain is the sampled rectangle unless given.
std::unique_ptr<SampledMap> read_sampled_map(const std::string& path,
                                             const std::optional<Domain>& domain = std::nullopt);
void write_sampled_map(const MapOracle& o, std::size_t rows, std::size_t cols, const std::string& path);

/// name:key=val,... or sampled:path. Builtins default to the unit square.
std::unique_ptr<MapOracle> make_map(const std::string& spec, const std::optional<Domain>& domain = std::nullopt);

/// Max bilipschitz ratio over a samples x samples Jacobian sweep and as many random pairs.
double estimate_L(const MapOracle& o, int samples);

}  // namespace bilip
