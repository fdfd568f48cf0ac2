#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "dirachom/quadrature.hpp"
#include "dirachom/types.hpp"

namespace dirachom {

enum class ShapeKind { disk, ellipse, regular_polygon, star_radial };

struct Disk {
  double radius;
};
// Axis-aligned, a >= b.
struct Ellipse {
  double a;
  double b;
};
// Vertices at angles rotation - pi/2 + pi/n + 2 pi k/n, so rotation = 0
// gives a square with axis-aligned sides.
struct RegularPolygon {
  int sides;
  double circumradius;
  double rotation = 0.0;
};
// Boundary r(phi) = r0 + amplitude cos(lobes phi) around the center.
struct StarRadial {
  double r0;
  double amplitude;
  int lobes;
};

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Shape {
 public:
  using Params = std::variant<Disk, Ellipse, RegularPolygon, StarRadial>;

  explicit Shape(Params params, Vec2 center = Vec2::Zero());

  static Shape disk(double radius, Vec2 center = Vec2::Zero());
  static Shape ellipse(double a, double b, Vec2 center = Vec2::Zero());
  static Shape regular_polygon(int sides, double circumradius, double rotation = 0.0,
                               Vec2 center = Vec2::Zero());
  static Shape star_radial(double r0, double amplitude, int lobes, Vec2 center = Vec2::Zero());
  // Unit square [-1/2, 1/2]^2 as a polygon.
  static Shape unit_square(Vec2 center = Vec2::Zero());

  ShapeKind kind() const;
  const Params& params() const { return params_; }
  const Vec2& center() const { return center_; }
  bool is_polygon() const { return kind() == ShapeKind::regular_polygon; }

  // Dilation about the origin (moves the center too).
  Shape scaled(double factor) const;
  Shape translated(const Vec2& shift) const;

  // Distance from the center to the boundary in direction phi.
  double radial(double phi) const;
  bool contains(const Vec2& p) const;
  std::vector<Vec2> vertices() const;

  std::string describe() const;

 private:
  Params params_;
  Vec2 center_;
};

struct InnerRadius {
  double radius;
  Vec2 center;
  // Upper bound on the amount by which `radius` may underestimate.
  double resolution;
};

struct BoundaryQuadrature {
  std::vector<Vec2> nodes;
  std::vector<double> weights;
  std::vector<Vec2> normals;

  double length() const;
  Vec2 normal_integral() const;
};

std::string to_string(ShapeKind kind);
ShapeKind shape_kind_from_string(const std::string& name);

double area(const Shape& shape);
double perimeter(const Shape& shape);
double outer_radius(const Shape& shape);
// Center of the smallest enclosing disk.
Vec2 circumcenter(const Shape& shape);
InnerRadius inner_radius(const Shape& shape);
double diameter(const Shape& shape);
bool is_convex(const Shape& shape);

// Integral over the shape of exp(-i q.(x - center)).
Complex indicator_fourier(const Shape& shape, const Vec2& q);

BoundaryQuadrature boundary_quadrature(const Shape& shape, int n_nodes);

// Polar rule around the center (sector triangles for polygons).
AreaRule area_rule(const Shape& shape, int radial_order, int angular_points);

// Copy scaled to outer radius 1 with the circumcenter at the origin.
Shape normalized(const Shape& shape);

// Flat key/value form: kind, parameter names, center_x, center_y.
std::map<std::string, std::string> shape_to_fields(const Shape& shape);
Shape shape_from_fields(const std::map<std::string, std::string>& fields);

std::string format_double(double value);
double parse_double(const std::string& text);

}  // namespace dirachom
