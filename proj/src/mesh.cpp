#include "dirachom/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dirachom {
namespace {

constexpr double kSpacingFactor = 0.75;

// Boundary point at parameter t in [0, 1) with the ring's scale applied.
struct BoundaryCurve {
  const Shape& shape;
  std::vector<double> cum_length;  // arclength table over uniform phi samples
  std::vector<double> phis;
  double length = 0.0;

  explicit BoundaryCurve(const Shape& s) : shape(s) {
    constexpr int kTable = 8192;
    phis.resize(kTable + 1);
    cum_length.resize(kTable + 1);
    Vec2 prev = point_at_phi(0.0);
    cum_length[0] = 0.0;
    for (int i = 1; i <= kTable; ++i) {
      phis[i] = 2.0 * kPi * i / kTable;
      const Vec2 cur = point_at_phi(phis[i]);
      cum_length[i] = cum_length[i - 1] + (cur - prev).norm();
      prev = cur;
    }
    length = cum_length.back();
  }

  Vec2 point_at_phi(double phi) const {
    return shape.radial(phi) * Vec2(std::cos(phi), std::sin(phi));
  }

  // Point (relative to center) at arclength fraction s.
  Vec2 at_fraction(double s) const {
    const double target = s * length;
    auto it = std::lower_bound(cum_length.begin(), cum_length.end(), target);
    size_t i = static_cast<size_t>(std::max<std::ptrdiff_t>(1, it - cum_length.begin()));
    i = std::min(i, cum_length.size() - 1);
    const double seg = cum_length[i] - cum_length[i - 1];
    const double w = seg > 0.0 ? (target - cum_length[i - 1]) / seg : 0.0;
    const double phi = phis[i - 1] + w * (phis[i] - phis[i - 1]);
    return point_at_phi(phi);
  }
};

struct Ring {
  std::vector<int> ids;
  std::vector<double> fractions;
};

}  // namespace

double Mesh::max_edge() const {
  double best = 0.0;
  for (const auto& t : triangles)
    for (int k = 0; k < 3; ++k)
      best = std::max(best, (vertices[t[k]] - vertices[t[(k + 1) % 3]]).norm());
  return best;
}

double Mesh::min_triangle_area() const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& t : triangles) {
    const Vec2 a = vertices[t[1]] - vertices[t[0]];
    const Vec2 b = vertices[t[2]] - vertices[t[0]];
    best = std::min(best, 0.5 * (a.x() * b.y() - a.y() * b.x()));
  }
  return best;
}

double Mesh::area() const {
  double s = 0.0;
  for (const auto& t : triangles) {
    const Vec2 a = vertices[t[1]] - vertices[t[0]];
    const Vec2 b = vertices[t[2]] - vertices[t[0]];
    s += 0.5 * (a.x() * b.y() - a.y() * b.x());
  }
  return s;
}

double Mesh::boundary_length() const {
  double s = 0.0;
  for (const auto& e : boundary_edges) s += (vertices[e[0]] - vertices[e[1]]).norm();
  return s;
}

Mesh Mesh::scaled(double factor) const {
  Mesh m = *this;
  for (Vec2& v : m.vertices) v *= factor;
  m.h *= factor;
  return m;
}

Mesh mesh_shape(const Shape& shape, double h) {
  const InnerRadius inner = inner_radius(shape);
  if (!(h > 0.0) || h > 0.5 * inner.radius * (1.0 + 1e-12))
    throw std::invalid_argument("mesh_shape needs 0 < h <= inner_radius/2");
  const double spacing = kSpacingFactor * h;
  const Vec2 c = shape.center();
  double r_max = 0.0;
  for (int k = 0; k < 720; ++k) r_max = std::max(r_max, shape.radial(2.0 * kPi * k / 720));
  const int n_rings = std::max(2, static_cast<int>(std::ceil(r_max / spacing)));

  Mesh mesh;
  mesh.h = h;
  mesh.vertices.push_back(c);
  std::vector<Ring> rings;
  rings.push_back(Ring{{0}, {0.0}});

  if (shape.is_polygon()) {
    const auto verts = shape.vertices();
    const int sides = static_cast<int>(verts.size());
    const double side_len = (verts[1] - verts[0]).norm();
    for (int j = 1; j <= n_rings; ++j) {
      const double t = static_cast<double>(j) / n_rings;
      const int per_side = std::max(1, static_cast<int>(std::ceil(t * side_len / spacing)));
      Ring ring;
      for (int s = 0; s < sides; ++s) {
        const Vec2 a = verts[s] - c;
        const Vec2 b = verts[(s + 1) % sides] - c;
        for (int i = 0; i < per_side; ++i) {
          const double w = static_cast<double>(i) / per_side;
          ring.ids.push_back(static_cast<int>(mesh.vertices.size()));
          mesh.vertices.push_back(c + t * ((1.0 - w) * a + w * b));
          ring.fractions.push_back((s + w) / sides);
        }
      }
      rings.push_back(std::move(ring));
    }
  } else {
    const BoundaryCurve curve(shape);
    for (int j = 1; j <= n_rings; ++j) {
      const double t = static_cast<double>(j) / n_rings;
      const int count = std::max(6, static_cast<int>(std::ceil(t * curve.length / spacing)));
      Ring ring;
      for (int i = 0; i < count; ++i) {
        const double s = static_cast<double>(i) / count;
        ring.ids.push_back(static_cast<int>(mesh.vertices.size()));
        mesh.vertices.push_back(c + t * curve.at_fraction(s));
        ring.fractions.push_back(s);
      }
      rings.push_back(std::move(ring));
    }
  }

  // Center fan.
  {
    const Ring& r1 = rings[1];
    const int n = static_cast<int>(r1.ids.size());
    for (int i = 0; i < n; ++i) mesh.triangles.push_back({0, r1.ids[i], r1.ids[(i + 1) % n]});
  }
  // Strips between consecutive rings, merged by arclength fraction.
  for (size_t j = 2; j < rings.size(); ++j) {
    const Ring& in = rings[j - 1];
    const Ring& out = rings[j];
    const int ni = static_cast<int>(in.ids.size());
    const int no = static_cast<int>(out.ids.size());
    int a = 0, b = 0;
    while (a < ni || b < no) {
      const double fa = a < ni ? (a + 1 < ni ? in.fractions[a + 1] : 1.0) : 2.0;
      const double fb = b < no ? (b + 1 < no ? out.fractions[b + 1] : 1.0) : 2.0;
      const int ia = in.ids[a % ni];
      const int ob = out.ids[b % no];
      if (fb <= fa) {
        mesh.triangles.push_back({ia, ob, out.ids[(b + 1) % no]});
        ++b;
      } else {
        mesh.triangles.push_back({ia, ob, in.ids[(a + 1) % ni]});
        ++a;
      }
    }
  }
  const Ring& outer = rings.back();
  const int nb = static_cast<int>(outer.ids.size());
  for (int i = 0; i < nb; ++i) mesh.boundary_edges.push_back({outer.ids[i], outer.ids[(i + 1) % nb]});

  if (!(mesh.min_triangle_area() > 0.0)) throw std::runtime_error("mesh_shape: degenerate triangle");
  return mesh;
}

}  // namespace dirachom
