#pragma once

#include <iosfwd>
#include <vector>

#include "bilip/geometry.hpp"

namespace bilip {

/// Triangulated domain plus one image point per vertex; affine on every triangle.
struct PAMap {
  Triangulation domain;
  std::vector<Point2> image;

  std::size_t num_vertices() const { return domain.vertices.size(); }
  std::size_t num_triangles() const { return domain.triangles.size(); }
  Triangle domain_triangle(std::size_t t) const {
    const auto& k = domain.triangles[t];
    return {domain.vertices[k[0]], domain.vertices[k[1]], domain.vertices[k[2]]};
  }
  Triangle image_triangle(std::size_t t) const {
    const auto& k = domain.triangles[t];
    return {image[k[0]], image[k[1]], image[k[2]]};
  }
  /// linear part of the affine piece on triangle t
  Mat2 gradient(std::size_t t) const {
    Triangle a = domain_triangle(t), b = image_triangle(t);
    Mat2 X{a.v1.x - a.v0.x, a.v2.x - a.v0.x, a.v1.y - a.v0.y, a.v2.y - a.v0.y};
    Mat2 Y{b.v1.x - b.v0.x, b.v2.x - b.v0.x, b.v1.y - b.v0.y, b.v2.y - b.v0.y};
    return Y * X.inverse();
  }
};

/// PAMESH text format: header "PAMESH nv nt", "v x y u_x u_y" lines, then "t i j k" lines.
void write_pamesh(const PAMap& m, std::ostream& out);
PAMap read_pamesh(std::istream& in);

}  // namespace bilip
