#pragma once

#include <array>
#include <vector>

#include "dirachom/shapes.hpp"

namespace dirachom {

struct Mesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;  // counterclockwise
  std::vector<std::array<int, 2>> boundary_edges;  // one closed loop, counterclockwise
  double h = 0.0;

  double max_edge() const;
  double min_triangle_area() const;
  double area() const;
  double boundary_length() const;
  Mesh scaled(double factor) const;
};

// Ring mesh: scaled copies of the boundary around the shape center, joined
// by strips of triangles. Boundary vertices lie on the analytic boundary and
// polygon corners are vertices.
Mesh mesh_shape(const Shape& shape, double h);

}  // namespace dirachom
