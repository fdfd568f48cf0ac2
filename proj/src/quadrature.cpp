#include "dirachom/quadrature.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

#include <gsl/gsl_integration.h>

namespace dirachom {

const GaussRule& gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: order must be positive");
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<GaussRule>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return *it->second;
  auto rule = std::make_unique<GaussRule>();
  gsl_integration_glfixed_table* table = gsl_integration_glfixed_table_alloc(n);
  if (table == nullptr) throw std::runtime_error("gauss_legendre: table allocation failed");
  rule->nodes.resize(n);
  rule->weights.resize(n);
  for (int i = 0; i < n; ++i) {
    gsl_integration_glfixed_point(-1.0, 1.0, i, &rule->nodes[i], &rule->weights[i], table);
  }
  gsl_integration_glfixed_table_free(table);
  const GaussRule& ref = *rule;
  cache.emplace(n, std::move(rule));
  return ref;
}

double AreaRule::total_weight() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

void AreaRule::append(const AreaRule& other) {
  nodes.insert(nodes.end(), other.nodes.begin(), other.nodes.end());
  weights.insert(weights.end(), other.weights.begin(), other.weights.end());
}

AreaRule rectangle_rule(double x0, double x1, double y0, double y1, int panels, int order) {
  const GaussRule& g = gauss_legendre(order);
  AreaRule rule;
  const double hx = (x1 - x0) / panels;
  const double hy = (y1 - y0) / panels;
  rule.nodes.reserve(static_cast<size_t>(panels * panels * order * order));
  rule.weights.reserve(rule.nodes.capacity());
  for (int px = 0; px < panels; ++px) {
    for (int py = 0; py < panels; ++py) {
      const double cx = x0 + (px + 0.5) * hx;
      const double cy = y0 + (py + 0.5) * hy;
      for (int i = 0; i < order; ++i) {
        for (int j = 0; j < order; ++j) {
          rule.nodes.emplace_back(cx + 0.5 * hx * g.nodes[i], cy + 0.5 * hy * g.nodes[j]);
          rule.weights.push_back(0.25 * hx * hy * g.weights[i] * g.weights[j]);
        }
      }
    }
  }
  return rule;
}

AreaRule annulus_rule(const Vec2& center, double r_in, double r_out, int radial_order,
                      int angular_points, int radial_panels) {
  const GaussRule& g = gauss_legendre(radial_order);
  AreaRule rule;
  const double dphi = 2.0 * kPi / angular_points;
  const double hr = (r_out - r_in) / radial_panels;
  for (int p = 0; p < radial_panels; ++p) {
    const double a = r_in + p * hr;
    for (int i = 0; i < radial_order; ++i) {
      const double r = a + 0.5 * hr * (g.nodes[i] + 1.0);
      const double wr = 0.5 * hr * g.weights[i] * r;
      for (int k = 0; k < angular_points; ++k) {
        const double phi = k * dphi;
        rule.nodes.emplace_back(center.x() + r * std::cos(phi), center.y() + r * std::sin(phi));
        rule.weights.push_back(wr * dphi);
      }
    }
  }
  return rule;
}

AreaRule triangle_rule(const Vec2& a, const Vec2& b, const Vec2& c, int order) {
  const GaussRule& g = gauss_legendre(order);
  AreaRule rule;
  const double jac = std::abs((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x());
  for (int i = 0; i < order; ++i) {
    const double s = 0.5 * (g.nodes[i] + 1.0);
    for (int j = 0; j < order; ++j) {
      const double t = 0.5 * (g.nodes[j] + 1.0);
      // (s, t) in the unit square -> (s, (1 - s) t) in the reference triangle.
      const double u = s;
      const double v = (1.0 - s) * t;
      rule.nodes.push_back(a + u * (b - a) + v * (c - a));
      rule.weights.push_back(0.25 * g.weights[i] * g.weights[j] * (1.0 - s) * jac);
    }
  }
  return rule;
}

}  // namespace dirachom
