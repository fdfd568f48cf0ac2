#include "dirachom/shapes.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <sstream>

#include "dirachom/bessel.hpp"

namespace dirachom {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void validate(const Shape::Params& params) {
  std::visit(Overloaded{
                 [](const Disk& d) {
                   if (!(d.radius > 0.0) || !std::isfinite(d.radius))
                     throw std::invalid_argument("disk radius must be positive");
                 },
                 [](const Ellipse& e) {
                   if (!(e.b > 0.0) || !(e.a >= e.b) || !std::isfinite(e.a))
                     throw std::invalid_argument("ellipse needs a >= b > 0");
                 },
                 [](const RegularPolygon& p) {
                   if (p.sides < 3) throw std::invalid_argument("polygon needs at least 3 sides");
                   if (!(p.circumradius > 0.0) || !std::isfinite(p.circumradius))
                     throw std::invalid_argument("polygon circumradius must be positive");
                   if (!std::isfinite(p.rotation))
                     throw std::invalid_argument("polygon rotation must be finite");
                 },
                 [](const StarRadial& s) {
                   if (!(s.r0 > 0.0) || !std::isfinite(s.r0))
                     throw std::invalid_argument("star r0 must be positive");
                   if (!(s.amplitude >= 0.0) || !(s.amplitude < s.r0))
                     throw std::invalid_argument("star needs 0 <= amplitude < r0");
                   if (s.lobes < 1) throw std::invalid_argument("star needs at least one lobe");
                 },
             },
             params);
}

double polygon_first_angle(const RegularPolygon& p) {
  return p.rotation - 0.5 * kPi + kPi / p.sides;
}

// Star boundary derivatives with respect to phi.
double star_r(const StarRadial& s, double phi) { return s.r0 + s.amplitude * std::cos(s.lobes * phi); }
double star_dr(const StarRadial& s, double phi) {
  return -s.amplitude * s.lobes * std::sin(s.lobes * phi);
}
double star_ddr(const StarRadial& s, double phi) {
  return -s.amplitude * s.lobes * s.lobes * std::cos(s.lobes * phi);
}

// Periodic trapezoid rule with doubling until two successive values agree.
template <class F>
auto periodic_trapezoid(F&& f, double scale, int n0 = 64, int n_max = 1 << 18) {
  using T = decltype(f(0.0));
  auto eval = [&](int n) {
    T sum{};
    const double h = 2.0 * kPi / n;
    for (int k = 0; k < n; ++k) sum += f(k * h);
    return sum * h;
  };
  T prev = eval(n0);
  for (int n = 2 * n0; n <= n_max; n *= 2) {
    T cur = eval(n);
    if (std::abs(cur - prev) <= 1e-14 * scale) return cur;
    prev = cur;
  }
  throw QuadratureError("periodic trapezoid rule did not converge");
}

// (e^z - 1)/z
Complex expm1_over(Complex z) {
  if (std::abs(z) < 0.5) {
    Complex term = 1.0;
    Complex sum = 1.0;
    for (int k = 1; k < 30; ++k) {
      term *= z / static_cast<double>(k + 1);
      sum += term;
      if (std::abs(term) < 1e-18) break;
    }
    return sum;
  }
  return (std::exp(z) - 1.0) / z;
}

// Integral_0^R exp(-i a rho) rho d rho.
Complex radial_moment(double a, double r) {
  const Complex z(0.0, -a);
  if (std::abs(a * r) < 1.0) {
    Complex sum = 0.0;
    Complex zr_pow = 1.0;
    double fact = 1.0;
    for (int k = 0; k < 40; ++k) {
      const Complex term = zr_pow / (fact * (k + 2));
      sum += term;
      if (std::abs(term) < 1e-18 * std::abs(sum)) break;
      zr_pow *= z * r;
      fact *= (k + 1);
    }
    return sum * r * r;
  }
  const Complex zr = z * r;
  return (std::exp(zr) * (zr - 1.0) + 1.0) / (z * z);
}

// 2 J1(z)/z
double jinc(double z) {
  if (std::abs(z) < 1e-4) return 1.0 - z * z / 8.0;
  return 2.0 * special::bessel_j1(z) / z;
}

struct Circle {
  Vec2 c;
  double r;
};

Circle circle_two(const Vec2& a, const Vec2& b) { return {0.5 * (a + b), 0.5 * (a - b).norm()}; }

Circle circle_three(const Vec2& a, const Vec2& b, const Vec2& c) {
  const Vec2 ab = b - a;
  const Vec2 ac = c - a;
  const double d = 2.0 * (ab.x() * ac.y() - ab.y() * ac.x());
  if (std::abs(d) < 1e-300) {
    Circle best = circle_two(a, b);
    for (const Circle& cand : {circle_two(a, c), circle_two(b, c)})
      if (cand.r > best.r) best = cand;
    return best;
  }
  const double b2 = ab.squaredNorm();
  const double c2 = ac.squaredNorm();
  const Vec2 u((ac.y() * b2 - ab.y() * c2) / d, (ab.x() * c2 - ac.x() * b2) / d);
  return {a + u, u.norm()};
}

bool inside(const Circle& c, const Vec2& p) { return (p - c.c).norm() <= c.r * (1.0 + 1e-12); }

// Welzl's algorithm, iterative form, fixed shuffle for determinism.
Circle min_enclosing_circle(std::vector<Vec2> pts) {
  std::mt19937_64 rng(12345);
  std::shuffle(pts.begin(), pts.end(), rng);
  Circle c{pts[0], 0.0};
  for (size_t i = 1; i < pts.size(); ++i) {
    if (inside(c, pts[i])) continue;
    c = {pts[i], 0.0};
    for (size_t j = 0; j < i; ++j) {
      if (inside(c, pts[j])) continue;
      c = circle_two(pts[i], pts[j]);
      for (size_t k = 0; k < j; ++k) {
        if (inside(c, pts[k])) continue;
        c = circle_three(pts[i], pts[j], pts[k]);
      }
    }
  }
  return c;
}

std::vector<Vec2> boundary_samples(const Shape& shape, int n) {
  std::vector<Vec2> pts;
  pts.reserve(n);
  for (int k = 0; k < n; ++k) {
    const double phi = 2.0 * kPi * k / n;
    pts.push_back(shape.center() + shape.radial(phi) * Vec2(std::cos(phi), std::sin(phi)));
  }
  return pts;
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

double polyline_distance(const Vec2& p, const std::vector<Vec2>& poly) {
  double best = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < poly.size(); ++i) {
    best = std::min(best, point_segment_distance(p, poly[i], poly[(i + 1) % poly.size()]));
  }
  return best;
}

InnerRadius star_inner_radius(const Shape& shape, const StarRadial& s) {
  constexpr int kSamples = 4096;
  const std::vector<Vec2> poly = boundary_samples(shape, kSamples);
  // Chord-to-arc deviation bound: curvature * chord^2 / 8.
  double max_curv = 0.0;
  double max_chord = 0.0;
  for (int k = 0; k < kSamples; ++k) {
    const double phi = 2.0 * kPi * k / kSamples;
    const double r = star_r(s, phi), dr = star_dr(s, phi), ddr = star_ddr(s, phi);
    const double num = std::abs(r * r + 2.0 * dr * dr - r * ddr);
    const double den = std::pow(r * r + dr * dr, 1.5);
    max_curv = std::max(max_curv, num / den);
    max_chord = std::max(max_chord, (poly[(k + 1) % kSamples] - poly[k]).norm());
  }
  const double sagitta = max_curv * max_chord * max_chord / 8.0;
  auto objective = [&](const Vec2& p) {
    if (!shape.contains(p)) return -1.0;
    return polyline_distance(p, poly);
  };
  const double rmax = s.r0 + s.amplitude;
  Vec2 best_p = shape.center();
  double best = objective(best_p);
  constexpr int kGrid = 24;
  std::vector<std::pair<double, Vec2>> starts;
  for (int i = 0; i <= kGrid; ++i) {
    for (int j = 0; j <= kGrid; ++j) {
      const Vec2 p = shape.center() + rmax * Vec2(-1.0 + 2.0 * i / kGrid, -1.0 + 2.0 * j / kGrid);
      const double v = objective(p);
      if (v > 0.0) starts.emplace_back(v, p);
    }
  }
  starts.emplace_back(best, best_p);
  std::sort(starts.begin(), starts.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  const size_t n_starts = std::min<size_t>(6, starts.size());
  for (size_t st = 0; st < n_starts; ++st) {
    Vec2 p = starts[st].second;
    double v = starts[st].first;
    double step = rmax / kGrid;
    while (step > 1e-7 * rmax) {
      bool moved = false;
      for (int dir = 0; dir < 8; ++dir) {
        const double ang = dir * kPi / 4.0;
        const Vec2 q = p + step * Vec2(std::cos(ang), std::sin(ang));
        const double w = objective(q);
        if (w > v) {
          v = w;
          p = q;
          moved = true;
        }
      }
      if (!moved) step *= 0.5;
    }
    if (v > best) {
      best = v;
      best_p = p;
    }
  }
  return {best - sagitta, best_p, sagitta + 1e-7 * rmax};
}

}  // namespace

Shape::Shape(Params params, Vec2 center) : params_(params), center_(center) {
  validate(params_);
  if (!center_.allFinite()) throw std::invalid_argument("shape center must be finite");
}

Shape Shape::disk(double radius, Vec2 center) { return Shape(Disk{radius}, center); }
Shape Shape::ellipse(double a, double b, Vec2 center) { return Shape(Ellipse{a, b}, center); }
Shape Shape::regular_polygon(int sides, double circumradius, double rotation, Vec2 center) {
  return Shape(RegularPolygon{sides, circumradius, rotation}, center);
}
Shape Shape::star_radial(double r0, double amplitude, int lobes, Vec2 center) {
  return Shape(StarRadial{r0, amplitude, lobes}, center);
}
Shape Shape::unit_square(Vec2 center) { return regular_polygon(4, std::sqrt(0.5), 0.0, center); }

ShapeKind Shape::kind() const { return static_cast<ShapeKind>(params_.index()); }

Shape Shape::scaled(double factor) const {
  if (!(factor > 0.0)) throw std::invalid_argument("scale factor must be positive");
  Params p = std::visit(Overloaded{
                            [&](Disk d) -> Params { return Disk{d.radius * factor}; },
                            [&](Ellipse e) -> Params { return Ellipse{e.a * factor, e.b * factor}; },
                            [&](RegularPolygon r) -> Params {
                              return RegularPolygon{r.sides, r.circumradius * factor, r.rotation};
                            },
                            [&](StarRadial s) -> Params {
                              return StarRadial{s.r0 * factor, s.amplitude * factor, s.lobes};
                            },
                        },
                        params_);
  return Shape(p, center_ * factor);
}

Shape Shape::translated(const Vec2& shift) const { return Shape(params_, center_ + shift); }

double Shape::radial(double phi) const {
  return std::visit(Overloaded{
                        [&](const Disk& d) { return d.radius; },
                        [&](const Ellipse& e) {
                          const double c = std::cos(phi), s = std::sin(phi);
                          return e.a * e.b / std::sqrt(e.b * e.b * c * c + e.a * e.a * s * s);
                        },
                        [&](const RegularPolygon& p) {
                          const double sector = 2.0 * kPi / p.sides;
                          const double phi0 = polygon_first_angle(p);
                          double t = std::fmod(phi - phi0, sector);
                          if (t < 0.0) t += sector;
                          const double apothem = p.circumradius * std::cos(kPi / p.sides);
                          return apothem / std::cos(t - 0.5 * sector);
                        },
                        [&](const StarRadial& s) { return star_r(s, phi); },
                    },
                    params_);
}

bool Shape::contains(const Vec2& p) const {
  const Vec2 rel = p - center_;
  const double r = rel.norm();
  if (r == 0.0) return true;
  return r < radial(std::atan2(rel.y(), rel.x()));
}

std::vector<Vec2> Shape::vertices() const {
  const auto* p = std::get_if<RegularPolygon>(&params_);
  if (p == nullptr) throw std::logic_error("vertices() requires a polygon");
  std::vector<Vec2> v;
  const double phi0 = polygon_first_angle(*p);
  for (int k = 0; k < p->sides; ++k) {
    const double phi = phi0 + 2.0 * kPi * k / p->sides;
    v.push_back(center_ + p->circumradius * Vec2(std::cos(phi), std::sin(phi)));
  }
  return v;
}

std::string Shape::describe() const {
  std::ostringstream os;
  os << to_string(kind()) << "(";
  std::visit(Overloaded{
                 [&](const Disk& d) { os << "r=" << d.radius; },
                 [&](const Ellipse& e) { os << "a=" << e.a << ", b=" << e.b; },
                 [&](const RegularPolygon& p) {
                   os << "n=" << p.sides << ", R=" << p.circumradius;
                   if (p.rotation != 0.0) os << ", rot=" << p.rotation;
                 },
                 [&](const StarRadial& s) {
                   os << "r0=" << s.r0 << ", amp=" << s.amplitude << ", lobes=" << s.lobes;
                 },
             },
             params_);
  os << ")";
  return os.str();
}

double BoundaryQuadrature::length() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

Vec2 BoundaryQuadrature::normal_integral() const {
  Vec2 s = Vec2::Zero();
  for (size_t i = 0; i < weights.size(); ++i) s += weights[i] * normals[i];
  return s;
}

std::string to_string(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::disk: return "disk";
    case ShapeKind::ellipse: return "ellipse";
    case ShapeKind::regular_polygon: return "regular_polygon";
    case ShapeKind::star_radial: return "star_radial";
  }
  return "unknown";
}

ShapeKind shape_kind_from_string(const std::string& name) {
  if (name == "disk") return ShapeKind::disk;
  if (name == "ellipse") return ShapeKind::ellipse;
  if (name == "regular_polygon" || name == "polygon") return ShapeKind::regular_polygon;
  if (name == "star_radial" || name == "star") return ShapeKind::star_radial;
  throw std::invalid_argument("unknown shape kind '" + name + "'");
}

double area(const Shape& shape) {
  return std::visit(Overloaded{
                        [](const Disk& d) { return kPi * d.radius * d.radius; },
                        [](const Ellipse& e) { return kPi * e.a * e.b; },
                        [](const RegularPolygon& p) {
                          return 0.5 * p.sides * p.circumradius * p.circumradius *
                                 std::sin(2.0 * kPi / p.sides);
                        },
                        [](const StarRadial& s) {
                          return kPi * (s.r0 * s.r0 + 0.5 * s.amplitude * s.amplitude);
                        },
                    },
                    shape.params());
}

double perimeter(const Shape& shape) {
  return std::visit(
      Overloaded{
          [](const Disk& d) { return 2.0 * kPi * d.radius; },
          [](const Ellipse& e) {
            return periodic_trapezoid(
                [&](double t) {
                  return std::hypot(e.a * std::sin(t), e.b * std::cos(t));
                },
                e.a);
          },
          [](const RegularPolygon& p) {
            return 2.0 * p.sides * p.circumradius * std::sin(kPi / p.sides);
          },
          [](const StarRadial& s) {
            return periodic_trapezoid(
                [&](double phi) { return std::hypot(star_r(s, phi), star_dr(s, phi)); }, s.r0);
          },
      },
      shape.params());
}

Vec2 circumcenter(const Shape& shape) {
  if (const auto* s = std::get_if<StarRadial>(&shape.params()); s != nullptr && s->lobes == 1) {
    return min_enclosing_circle(boundary_samples(shape, 8192)).c;
  }
  // Every other shape is point-symmetric or rotationally symmetric about its center.
  return shape.center();
}

double outer_radius(const Shape& shape) {
  return std::visit(Overloaded{
                        [](const Disk& d) { return d.radius; },
                        [](const Ellipse& e) { return e.a; },
                        [](const RegularPolygon& p) { return p.circumradius; },
                        [&](const StarRadial& s) {
                          if (s.lobes >= 2) return s.r0 + s.amplitude;
                          const Vec2 c = circumcenter(shape);
                          double r = 0.0;
                          for (const Vec2& x : boundary_samples(shape, 8192))
                            r = std::max(r, (x - c).norm());
                          return r;
                        },
                    },
                    shape.params());
}

InnerRadius inner_radius(const Shape& shape) {
  return std::visit(Overloaded{
                        [&](const Disk& d) { return InnerRadius{d.radius, shape.center(), 0.0}; },
                        [&](const Ellipse& e) { return InnerRadius{e.b, shape.center(), 0.0}; },
                        [&](const RegularPolygon& p) {
                          return InnerRadius{p.circumradius * std::cos(kPi / p.sides),
                                             shape.center(), 0.0};
                        },
                        [&](const StarRadial& s) { return star_inner_radius(shape, s); },
                    },
                    shape.params());
}

double diameter(const Shape& shape) {
  return std::visit(Overloaded{
                        [](const Disk& d) { return 2.0 * d.radius; },
                        [](const Ellipse& e) { return 2.0 * e.a; },
                        [&](const RegularPolygon&) {
                          const auto v = shape.vertices();
                          double best = 0.0;
                          for (size_t i = 0; i < v.size(); ++i)
                            for (size_t j = i + 1; j < v.size(); ++j)
                              best = std::max(best, (v[i] - v[j]).norm());
                          return best;
                        },
                        [&](const StarRadial&) {
                          const auto v = boundary_samples(shape, 2048);
                          double best = 0.0;
                          for (size_t i = 0; i < v.size(); ++i)
                            for (size_t j = i + 1; j < v.size(); ++j)
                              best = std::max(best, (v[i] - v[j]).squaredNorm());
                          return std::sqrt(best);
                        },
                    },
                    shape.params());
}

bool is_convex(const Shape& shape) {
  const auto* s = std::get_if<StarRadial>(&shape.params());
  if (s == nullptr) return true;
  constexpr int kSamples = 8192;
  for (int k = 0; k < kSamples; ++k) {
    const double phi = 2.0 * kPi * k / kSamples;
    const double r = star_r(*s, phi), dr = star_dr(*s, phi), ddr = star_ddr(*s, phi);
    if (r * r + 2.0 * dr * dr - r * ddr < 0.0) return false;
  }
  return true;
}

Complex indicator_fourier(const Shape& shape, const Vec2& q) {
  const double qn = q.norm();
  return std::visit(
      Overloaded{
          [&](const Disk& d) -> Complex {
            return kPi * d.radius * d.radius * jinc(qn * d.radius);
          },
          [&](const Ellipse& e) -> Complex {
            const double z = std::hypot(e.a * q.x(), e.b * q.y());
            return kPi * e.a * e.b * jinc(z);
          },
          [&](const RegularPolygon& p) -> Complex {
            const Shape local(p);
            const auto v = local.vertices();
            const int n = p.sides;
            if (qn * p.circumradius < 1.0) {
              Complex sum = 0.0;
              for (int k = 0; k < n; ++k) {
                const AreaRule rule = triangle_rule(Vec2::Zero(), v[k], v[(k + 1) % n], 12);
                for (size_t i = 0; i < rule.nodes.size(); ++i)
                  sum += rule.weights[i] * std::exp(Complex(0.0, -q.dot(rule.nodes[i])));
              }
              return sum;
            }
            Complex sum = 0.0;
            for (int k = 0; k < n; ++k) {
              const Vec2& a = v[k];
              const Vec2& b = v[(k + 1) % n];
              const Vec2 edge = b - a;
              const double len = edge.norm();
              const Vec2 normal(edge.y() / len, -edge.x() / len);
              sum += q.dot(normal) * len * std::exp(Complex(0.0, -q.dot(a))) *
                     expm1_over(Complex(0.0, -q.dot(edge)));
            }
            return Complex(0.0, 1.0) * sum / (qn * qn);
          },
          [&](const StarRadial& s) -> Complex {
            return periodic_trapezoid(
                [&](double phi) {
                  const double a = q.x() * std::cos(phi) + q.y() * std::sin(phi);
                  return radial_moment(a, star_r(s, phi));
                },
                kPi * s.r0 * s.r0, 64, 1 << 20);
          },
      },
      shape.params());
}

BoundaryQuadrature boundary_quadrature(const Shape& shape, int n_nodes) {
  if (n_nodes < 16) throw std::invalid_argument("boundary_quadrature needs at least 16 nodes");
  BoundaryQuadrature bq;
  bq.nodes.reserve(n_nodes);
  const Vec2& c = shape.center();
  std::visit(
      Overloaded{
          [&](const Disk& d) {
            for (int k = 0; k < n_nodes; ++k) {
              const double t = 2.0 * kPi * k / n_nodes;
              const Vec2 nu(std::cos(t), std::sin(t));
              bq.nodes.push_back(c + d.radius * nu);
              bq.normals.push_back(nu);
              bq.weights.push_back(2.0 * kPi * d.radius / n_nodes);
            }
          },
          [&](const Ellipse& e) {
            for (int k = 0; k < n_nodes; ++k) {
              const double t = 2.0 * kPi * k / n_nodes;
              const double ct = std::cos(t), st = std::sin(t);
              const double speed = std::hypot(e.a * st, e.b * ct);
              bq.nodes.push_back(c + Vec2(e.a * ct, e.b * st));
              bq.normals.push_back(Vec2(e.b * ct, e.a * st) / speed);
              bq.weights.push_back(2.0 * kPi / n_nodes * speed);
            }
          },
          [&](const RegularPolygon& p) {
            const auto v = shape.vertices();
            const int per_side = std::max(2, (n_nodes + p.sides - 1) / p.sides);
            const GaussRule& g = gauss_legendre(per_side);
            for (int k = 0; k < p.sides; ++k) {
              const Vec2& a = v[k];
              const Vec2& b = v[(k + 1) % p.sides];
              const Vec2 edge = b - a;
              const double len = edge.norm();
              const Vec2 nu(edge.y() / len, -edge.x() / len);
              for (int i = 0; i < per_side; ++i) {
                bq.nodes.push_back(a + 0.5 * (g.nodes[i] + 1.0) * edge);
                bq.normals.push_back(nu);
                bq.weights.push_back(0.5 * len * g.weights[i]);
              }
            }
          },
          [&](const StarRadial& s) {
            for (int k = 0; k < n_nodes; ++k) {
              const double phi = 2.0 * kPi * k / n_nodes;
              const double r = star_r(s, phi), dr = star_dr(s, phi);
              const Vec2 er(std::cos(phi), std::sin(phi));
              const Vec2 ep(-std::sin(phi), std::cos(phi));
              const Vec2 tangent = dr * er + r * ep;
              const double speed = tangent.norm();
              bq.nodes.push_back(c + r * er);
              bq.normals.push_back(Vec2(tangent.y(), -tangent.x()) / speed);
              bq.weights.push_back(2.0 * kPi / n_nodes * speed);
            }
          },
      },
      shape.params());
  return bq;
}

AreaRule area_rule(const Shape& shape, int radial_order, int angular_points) {
  if (shape.is_polygon()) {
    const auto v = shape.vertices();
    AreaRule rule;
    const int n = static_cast<int>(v.size());
    for (int k = 0; k < n; ++k)
      rule.append(triangle_rule(shape.center(), v[k], v[(k + 1) % n], radial_order));
    return rule;
  }
  const GaussRule& g = gauss_legendre(radial_order);
  AreaRule rule;
  const double dphi = 2.0 * kPi / angular_points;
  for (int k = 0; k < angular_points; ++k) {
    const double phi = k * dphi;
    const double rmax = shape.radial(phi);
    const Vec2 dir(std::cos(phi), std::sin(phi));
    for (int i = 0; i < radial_order; ++i) {
      const double r = 0.5 * rmax * (g.nodes[i] + 1.0);
      rule.nodes.push_back(shape.center() + r * dir);
      rule.weights.push_back(0.5 * rmax * g.weights[i] * r * dphi);
    }
  }
  return rule;
}

Shape normalized(const Shape& shape) {
  const double r = outer_radius(shape);
  const Shape unit = shape.scaled(1.0 / r);
  return unit.translated(-circumcenter(unit));
}

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

double parse_double(const std::string& text) {
  const char* begin = text.c_str();
  while (*begin == ' ' || *begin == '\t') ++begin;
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  while (end != nullptr && (*end == ' ' || *end == '\t')) ++end;
  if (end == begin || *end != '\0' || errno == ERANGE || !std::isfinite(v)) {
    throw std::invalid_argument("not a finite number: '" + text + "'");
  }
  return v;
}

namespace {

int parse_int(const std::string& text) {
  const double v = parse_double(text);
  if (v != std::floor(v) || std::abs(v) > 1e9)
    throw std::invalid_argument("not an integer: '" + text + "'");
  return static_cast<int>(v);
}

}  // namespace

std::map<std::string, std::string> shape_to_fields(const Shape& shape) {
  std::map<std::string, std::string> f;
  f["kind"] = to_string(shape.kind());
  std::visit(Overloaded{
                 [&](const Disk& d) { f["radius"] = format_double(d.radius); },
                 [&](const Ellipse& e) {
                   f["a"] = format_double(e.a);
                   f["b"] = format_double(e.b);
                 },
                 [&](const RegularPolygon& p) {
                   f["sides"] = std::to_string(p.sides);
                   f["circumradius"] = format_double(p.circumradius);
                   f["rotation"] = format_double(p.rotation);
                 },
                 [&](const StarRadial& s) {
                   f["r0"] = format_double(s.r0);
                   f["amplitude"] = format_double(s.amplitude);
                   f["lobes"] = std::to_string(s.lobes);
                 },
             },
             shape.params());
  f["center_x"] = format_double(shape.center().x());
  f["center_y"] = format_double(shape.center().y());
  return f;
}

Shape shape_from_fields(const std::map<std::string, std::string>& fields) {
  auto get = [&](const std::string& key) -> const std::string& {
    auto it = fields.find(key);
    if (it == fields.end()) throw std::invalid_argument("shape field '" + key + "' missing");
    return it->second;
  };
  auto get_or = [&](const std::string& key, double fallback) {
    auto it = fields.find(key);
    return it == fields.end() ? fallback : parse_double(it->second);
  };
  const ShapeKind kind = shape_kind_from_string(get("kind"));
  const Vec2 center(get_or("center_x", 0.0), get_or("center_y", 0.0));
  std::vector<std::string> allowed = {"kind", "center_x", "center_y"};
  Shape::Params params;
  switch (kind) {
    case ShapeKind::disk:
      params = Disk{parse_double(get("radius"))};
      allowed.push_back("radius");
      break;
    case ShapeKind::ellipse:
      params = Ellipse{parse_double(get("a")), parse_double(get("b"))};
      allowed.insert(allowed.end(), {"a", "b"});
      break;
    case ShapeKind::regular_polygon:
      params = RegularPolygon{parse_int(get("sides")), parse_double(get("circumradius")),
                              get_or("rotation", 0.0)};
      allowed.insert(allowed.end(), {"sides", "circumradius", "rotation"});
      break;
    case ShapeKind::star_radial:
      params = StarRadial{parse_double(get("r0")), parse_double(get("amplitude")),
                          parse_int(get("lobes"))};
      allowed.insert(allowed.end(), {"r0", "amplitude", "lobes"});
      break;
  }
  for (const auto& [key, value] : fields) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw std::invalid_argument("shape field '" + key + "' not valid for " + to_string(kind));
  }
  return Shape(params, center);
}

}  // namespace dirachom
