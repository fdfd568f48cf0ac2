#pragma once

#include <vector>

#include "dirachom/types.hpp"

namespace dirachom {

// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

const GaussRule& gauss_legendre(int n);

// Weighted point set for integrals over a planar region.
struct AreaRule {
  std::vector<Vec2> nodes;
  std::vector<double> weights;

  double total_weight() const;
  void append(const AreaRule& other);
};

// Tensor Gauss rule over [x0,x1]x[y0,y1] split into panels x panels squares.
AreaRule rectangle_rule(double x0, double x1, double y0, double y1, int panels, int order);

// Polar rule on the annulus r_in <= |x - c| <= r_out (disk when r_in = 0):
// Gauss in r on `radial_panels` panels, trapezoid in angle.
AreaRule annulus_rule(const Vec2& center, double r_in, double r_out, int radial_order,
                      int angular_points, int radial_panels = 1);

// Rule on a triangle from the collapsed-square map.
AreaRule triangle_rule(const Vec2& a, const Vec2& b, const Vec2& c, int order);

}  // namespace dirachom
