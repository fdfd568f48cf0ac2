#include "dirachom/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "dirachom/linalg.hpp"
#include "dirachom/parallel.hpp"

namespace dirachom {
namespace {

double uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Relative floor added to every comparison on top of the quadrature error bar.
constexpr double kRoundoff = 1e-10;
constexpr double kTiny = 1e-28;

CheckRow inequality(const std::string& id, std::uint64_t seed, double lhs, double rhs, double error) {
  CheckRow row;
  row.id = id;
  row.seed = seed;
  row.lhs = lhs;
  row.rhs = rhs;
  row.slack = rhs - lhs;
  row.error = error;
  row.pass = lhs <= rhs + error + kRoundoff * std::max(std::abs(lhs), std::abs(rhs)) + kTiny;
  return row;
}

// Identity check: relative residual at most `tolerance`.
CheckRow identity(const std::string& id, std::uint64_t seed, double lhs, double rhs, double error,
                  double tolerance) {
  CheckRow row;
  row.id = id;
  row.seed = seed;
  row.lhs = lhs;
  row.rhs = rhs;
  row.slack = rhs - lhs;
  row.error = error;
  const double scale = std::max(std::abs(lhs), std::abs(rhs));
  const double residual = scale > 0.0 ? std::abs(lhs - rhs) / scale : 0.0;
  row.pass = residual <= tolerance;
  std::ostringstream note;
  note << "relative residual " << residual;
  row.note = note.str();
  return row;
}

CheckRow not_applicable(const std::string& id, std::uint64_t seed, const std::string& note) {
  CheckRow row;
  row.id = id;
  row.seed = seed;
  row.applicable = false;
  row.pass = true;
  row.note = note;
  return row;
}

struct Moments {
  double measure = 0.0;
  double f = 0.0;
  double f2 = 0.0;
  double grad2 = 0.0;

  double mean() const { return f / measure; }
};

Moments moments(const TestFunction& fn, const AreaRule& rule) {
  Moments m;
  for (size_t i = 0; i < rule.nodes.size(); ++i) {
    const Eigen::Vector3d j = fn.jet(rule.nodes[i]);
    const double w = rule.weights[i];
    m.measure += w;
    m.f += w * j(0);
    m.f2 += w * j(0) * j(0);
    m.grad2 += w * (j(1) * j(1) + j(2) * j(2));
  }
  return m;
}

double curve_mean(const TestFunction& fn, const BoundaryQuadrature& bq) {
  double sum = 0.0, len = 0.0;
  for (size_t i = 0; i < bq.nodes.size(); ++i) {
    sum += bq.weights[i] * fn.value(bq.nodes[i]);
    len += bq.weights[i];
  }
  return sum / len;
}

BoundaryQuadrature circle(const Vec2& center, double radius, int nodes) {
  return boundary_quadrature(Shape::disk(radius, center), nodes);
}

AreaRule square_rule(const Vec2& center, double side, int panels, int order) {
  const double h = 0.5 * side;
  return rectangle_rule(center.x() - h, center.x() + h, center.y() - h, center.y() + h, panels, order);
}

struct CellMoments {
  bool smooth = true;  // false when the function has a pole inside the cell
  Moments inclusion, ball, outer, annulus, cell, big_cell;
  double ball_boundary = 0.0, outer_boundary = 0.0;
};

CellMoments cell_moments(const TestFunction& f, const CellGeometry& g, const Resolution& r) {
  CellMoments m;
  const double eps = g.epsilon;
  m.smooth = f.kind() != TestFunction::Kind::radial_log;
  m.annulus = moments(f, annulus_rule(g.pole, g.d, eps, r.radial_order, r.angular_points, r.radial_panels));
  m.ball_boundary = curve_mean(f, circle(g.pole, g.d, r.boundary_nodes));
  m.outer_boundary = curve_mean(f, circle(g.pole, eps, r.boundary_nodes));
  if (!m.smooth) return m;
  m.inclusion = moments(f, area_rule(g.inclusion, r.radial_order, r.angular_points));
  m.ball = moments(f, annulus_rule(g.pole, 0.0, g.d, r.radial_order, r.angular_points, r.radial_panels));
  m.outer = moments(f, annulus_rule(g.pole, 0.0, eps, r.radial_order, r.angular_points, r.radial_panels));
  m.cell = moments(f, square_rule(Vec2::Zero(), eps, r.panels, r.order));
  m.big_cell = moments(f, square_rule(Vec2::Zero(), 3.0 * eps, 3 * r.panels, r.order));
  return m;
}

struct SidePair {
  double lhs, rhs;
  double floor = 0.0;  // round-off in a squared difference of means
};

// (a - b)^2 with a relative round-off floor on the difference.
SidePair mean_gap(double a, double b, double rhs) {
  const double r = 1e-11 * std::max(std::abs(a), std::abs(b));
  return {(a - b) * (a - b), rhs, r * r};
}

std::vector<std::pair<std::string, SidePair>> lemma_sides(const CellMoments& m, const CellGeometry& g,
                                                          const EstimateConstants& c) {
  std::vector<std::pair<std::string, SidePair>> out;
  const double lemma1 = c.c_tr_disk * c.c_tr_disk * (1.0 / c.lambda_N_disk + 1.0) / (2.0 * kPi);
  if (m.smooth) {
    out.push_back({"lemma1.ball", mean_gap(m.ball_boundary, m.ball.mean(), lemma1 * m.ball.grad2)});
    out.push_back({"lemma1.outer", mean_gap(m.outer_boundary, m.outer.mean(), lemma1 * m.outer.grad2)});
    out.push_back({"lemma2", mean_gap(m.inclusion.mean(), m.ball.mean(),
                                      m.ball.grad2 / (c.lambda_N_disk * kPi * c.rho * c.rho))});
  }
  out.push_back({"lemma3", mean_gap(m.outer_boundary, m.ball_boundary, g.log_ratio / (2.0 * kPi) * m.annulus.grad2)});
  if (m.smooth) {
    out.push_back({"lemma4.outer", mean_gap(m.outer.mean(), m.big_cell.mean(),
                                            9.0 / (c.lambda_N_square * kPi) * m.big_cell.grad2)});
    out.push_back({"lemma4.cell", mean_gap(m.cell.mean(), m.big_cell.mean(),
                                           9.0 / c.lambda_N_square * m.big_cell.grad2)});
    out.push_back({"lemma5", mean_gap(m.cell.mean(), m.inclusion.mean(), c.c1 * g.log_ratio * m.big_cell.grad2)});
  }
  return out;
}

std::vector<std::pair<std::string, SidePair>> lemma6_sides(const CellMoments& m, const CellGeometry& g,
                                                           const EstimateConstants& c) {
  if (!m.smooth) return {};
  const double ratio = g.d / g.epsilon;
  return {{"lemma6", {m.inclusion.f2, c.c2 * (ratio * ratio * m.outer.f2 +
                                              g.d * g.d * g.log_ratio * m.outer.grad2)}}};
}

const char* const kMeanLemmaIds[] = {"lemma1.ball", "lemma1.outer", "lemma2", "lemma3",
                                     "lemma4.outer", "lemma4.cell", "lemma5"};

CheckReport rows_from(const std::vector<std::pair<std::string, SidePair>>& coarse,
                      const std::vector<std::pair<std::string, SidePair>>& fine, std::uint64_t seed) {
  CheckReport report;
  for (size_t i = 0; i < fine.size(); ++i) {
    const auto& [id, f] = fine[i];
    const auto& c = coarse[i].second;
    report.rows.push_back(
        inequality(id, seed, f.lhs, f.rhs, std::abs(f.lhs - c.lhs) + std::abs(f.rhs - c.rhs) + f.floor));
  }
  return report;
}

CheckReport lemma_rows(const TestFunction& f, const CellGeometry& g, const EstimateConstants& c,
                       std::uint64_t seed, const Resolution& res, bool means, bool lemma6) {
  const CellMoments coarse = cell_moments(f, g, res);
  const CellMoments fine = cell_moments(f, g, res.doubled());
  CheckReport report;
  if (means) {
    report = rows_from(lemma_sides(coarse, g, c), lemma_sides(fine, g, c), seed);
    if (!fine.smooth)
      for (const char* id : kMeanLemmaIds)
        if (std::string(id) != "lemma3")
          report.rows.push_back(not_applicable(id, seed, "pole inside the domain"));
  }
  if (lemma6) {
    if (fine.smooth)
      report.append(rows_from(lemma6_sides(coarse, g, c), lemma6_sides(fine, g, c), seed));
    else
      report.rows.push_back(not_applicable("lemma6", seed, "pole inside the domain"));
  }
  return report;
}

// Kinetic part -i sigma.grad applied to a spinor jet.
Spinor kinetic(const SpinorJet& j) {
  const Complex i(0.0, 1.0);
  Spinor k;
  k(0) = -i * (j.dx(1) - i * j.dy(1));
  k(1) = -i * (j.dx(0) + i * j.dy(0));
  return k;
}

Spinor sigma3(const Spinor& v) { return Spinor(v(0), -v(1)); }

// -i sigma3 (sigma . nu)
Eigen::Matrix2cd boundary_matrix(const Vec2& nu) {
  const Complex i(0.0, 1.0);
  Eigen::Matrix2cd s3, sn;
  s3 << 1.0, 0.0, 0.0, -1.0;
  sn << 0.0, Complex(nu.x(), -nu.y()), Complex(nu.x(), nu.y()), 0.0;
  return -i * s3 * sn;
}

// Inner product (a, b) = b^* a.
Complex inner(const Spinor& a, const Spinor& b) { return b.dot(a); }

struct PatchRules {
  AreaRule cells;
  std::vector<AreaRule> inclusions;
  std::vector<BoundaryQuadrature> boundaries;
};

// Cells and inclusions meeting the disk of `radius` about `center`.
PatchRules patch_rules(const CellPatch& patch, const Vec2& center, double radius, const Resolution& r) {
  PatchRules rules;
  const double eps = patch.field.epsilon;
  const Shape& incl = patch.field.inclusion;
  const Vec2 pole = circumcenter(incl);
  const double reach = outer_radius(incl);
  for (const Vec2& c : patch.cell_centers()) {
    const Vec2 gap = ((center - c).cwiseAbs().array() - 0.5 * eps).max(0.0).matrix();
    if (gap.norm() >= radius) continue;
    rules.cells.append(square_rule(c, eps, r.panels, r.order));
    if ((c + pole - center).norm() >= radius + reach) continue;
    const Shape placed = incl.translated(c);
    rules.inclusions.push_back(area_rule(placed, r.radial_order, r.angular_points));
    rules.boundaries.push_back(boundary_quadrature(placed, r.boundary_nodes));
  }
  return rules;
}

SpinorNorms norms_at(const SpinorField& v, const CellPatch& patch, const Resolution& r) {
  SpinorNorms n;
  if (v.is_zero()) return n;
  const PatchRules rules = patch_rules(patch, v.center(), v.radius(), r);
  const double ms = patch.field.m_star;
  const double m = patch.field.m_value;
  for (size_t i = 0; i < rules.cells.nodes.size(); ++i) {
    const SpinorJet j = v.jet(rules.cells.nodes[i]);
    const double w = rules.cells.weights[i];
    const Spinor k = kinetic(j);
    n.l2 += w * j.value.squaredNorm();
    n.grad += w * (j.dx.squaredNorm() + j.dy.squaredNorm());
    n.dirac_eps += w * k.squaredNorm();
    n.dirac_limit += w * (k + ms * sigma3(j.value)).squaredNorm();
  }
  for (const AreaRule& rule : rules.inclusions)
    for (size_t i = 0; i < rule.nodes.size(); ++i) {
      const SpinorJet j = v.jet(rule.nodes[i]);
      const double w = rule.weights[i];
      const Spinor k = kinetic(j);
      n.dirac_eps += w * ((k + m * sigma3(j.value)).squaredNorm() - k.squaredNorm());
      n.mass_volume += w * m * m * j.value.squaredNorm();
    }
  const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
  for (const BoundaryQuadrature& bq : rules.boundaries)
    for (size_t i = 0; i < bq.nodes.size(); ++i) {
      const Spinor val = v.jet(bq.nodes[i]).value;
      const Eigen::Matrix2cd b = boundary_matrix(bq.normals[i]);
      const Spinor plus = 0.5 * (id + b) * val;
      const Spinor minus = 0.5 * (id - b) * val;
      n.mass_boundary += bq.weights[i] * m * (plus.squaredNorm() - minus.squaredNorm());
    }
  return n;
}

Complex form_at(const SpinorField& u, const SpinorField& v, const CellPatch& patch, const Resolution& r) {
  if (u.is_zero() || v.is_zero()) return 0.0;
  // The integrand vanishes off the smaller support.
  const SpinorField& small = u.radius() <= v.radius() ? u : v;
  const PatchRules rules = patch_rules(patch, small.center(), small.radius(), r);
  const double ms = patch.field.m_star;
  const double m = patch.field.m_value;
  Complex s = 0.0;
  for (size_t i = 0; i < rules.cells.nodes.size(); ++i) {
    const SpinorJet ju = u.jet(rules.cells.nodes[i]);
    const SpinorJet jv = v.jet(rules.cells.nodes[i]);
    const Spinor du = kinetic(ju) + ms * sigma3(ju.value);
    s += rules.cells.weights[i] * (inner(du, jv.value) - inner(ju.value, kinetic(jv)));
  }
  for (const AreaRule& rule : rules.inclusions)
    for (size_t i = 0; i < rule.nodes.size(); ++i) {
      const Spinor uv = u.jet(rule.nodes[i]).value;
      const Spinor vv = v.jet(rule.nodes[i]).value;
      s -= rule.weights[i] * inner(uv, m * sigma3(vv));
    }
  return s;
}

bool meets_inclusion(const SpinorField& v, const CellPatch& patch) {
  if (v.is_zero()) return false;
  const Vec2 pole = circumcenter(patch.field.inclusion);
  const double reach = outer_radius(patch.field.inclusion);
  for (const Vec2& c : patch.cell_centers())
    if ((c + pole - v.center()).norm() < v.radius() + reach) return true;
  return false;
}

CMatrix inverse_sqrt_graph(const CMatrix& d, double a) {
  const linalg::HermitianEigen e = linalg::hermitian_eigen(d);
  RVector s(e.values.size());
  for (int i = 0; i < s.size(); ++i) s(i) = 1.0 / std::sqrt(a + e.values(i) * e.values(i));
  return e.vectors * s.asDiagonal() * e.vectors.adjoint();
}

CMatrix shifted_inverse(const CMatrix& d) {
  const CMatrix shifted = d - Complex(0.0, 1.0) * CMatrix::Identity(d.rows(), d.cols());
  return shifted.partialPivLu().inverse();
}

CMatrix random_hermitian(std::mt19937_64& rng, int n, double scale) {
  CMatrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double re = 2.0 * uniform(rng) - 1.0;
      const double im = 2.0 * uniform(rng) - 1.0;
      a(i, j) = scale * Complex(re, im);
    }
  return (a + a.adjoint()) * 0.5;
}

}  // namespace

CheckRow inequality_row(const std::string& id, std::uint64_t seed, double lhs, double rhs, double error) {
  return inequality(id, seed, lhs, rhs, error);
}

CheckRow skipped_row(const std::string& id, std::uint64_t seed, const std::string& note) {
  return not_applicable(id, seed, note);
}

Resolution Resolution::doubled() const {
  Resolution r = *this;
  r.radial_panels *= 2;
  r.angular_points *= 2;
  r.panels *= 2;
  r.boundary_nodes *= 2;
  r.radial_order = std::min(2 * radial_order, 100);
  return r;
}

MeanValue mean_value(const TestFunction& f, const Shape& region, const Resolution& res) {
  const Resolution fine = res.doubled();
  const double coarse = moments(f, area_rule(region, res.radial_order, res.angular_points)).mean();
  const double value = moments(f, area_rule(region, fine.radial_order, fine.angular_points)).mean();
  const double error = std::abs(value - coarse);
  if (!std::isfinite(value) || error > 1e-6 * std::max(1.0, std::abs(value)))
    throw QuadratureError("mean value quadrature did not converge on " + region.describe());
  return {value, error};
}

MeanValue mean_value(const TestFunction& f, const BoundaryQuadrature& curve) {
  return {curve_mean(f, curve), 0.0};
}

MeanValue circle_mean(const TestFunction& f, const Vec2& center, double radius, const Resolution& res) {
  const double coarse = curve_mean(f, circle(center, radius, res.boundary_nodes));
  const double value = curve_mean(f, circle(center, radius, 2 * res.boundary_nodes));
  const double error = std::abs(value - coarse);
  if (!std::isfinite(value) || error > 1e-6 * std::max(1.0, std::abs(value)))
    throw QuadratureError("circle mean quadrature did not converge");
  return {value, error};
}

void CheckReport::append(const CheckReport& other) {
  rows.insert(rows.end(), other.rows.begin(), other.rows.end());
}

int CheckReport::checked() const {
  return static_cast<int>(std::count_if(rows.begin(), rows.end(), [](const CheckRow& r) { return r.applicable; }));
}

int CheckReport::violations() const {
  return static_cast<int>(
      std::count_if(rows.begin(), rows.end(), [](const CheckRow& r) { return r.applicable && !r.pass; }));
}

double CheckReport::min_relative_slack() const {
  double best = std::numeric_limits<double>::infinity();
  for (const CheckRow& r : rows)
    if (r.applicable && r.rhs > 0.0) best = std::min(best, r.slack / r.rhs);
  return best;
}

double CheckReport::max_ratio(const std::string& id) const {
  double best = 0.0;
  for (const CheckRow& r : rows)
    if (r.applicable && r.id == id && r.rhs > 0.0) best = std::max(best, r.lhs / r.rhs);
  return best;
}

std::vector<const CheckRow*> CheckReport::find(const std::string& id) const {
  std::vector<const CheckRow*> out;
  for (const CheckRow& r : rows)
    if (r.id == id) out.push_back(&r);
  return out;
}

std::string CheckReport::to_csv() const {
  std::ostringstream out;
  out << "id,seed,lhs,rhs,slack,error,pass,note\n";
  for (const CheckRow& r : rows) {
    out << r.id << ',' << r.seed << ',' << format_double(r.lhs) << ',' << format_double(r.rhs) << ','
        << format_double(r.slack) << ',' << format_double(r.error) << ','
        << (r.applicable ? (r.pass ? "1" : "0") : "na") << ',' << r.note << '\n';
  }
  return out.str();
}

std::string CheckReport::summary_json() const {
  nlohmann::ordered_json j;
  j["rows"] = rows.size();
  j["checked"] = checked();
  j["violations"] = violations();
  const double slack = min_relative_slack();
  j["min_relative_slack"] = std::isfinite(slack) ? nlohmann::ordered_json(slack) : nlohmann::ordered_json();
  std::map<std::string, std::pair<int, int>> counts;
  for (const CheckRow& r : rows) {
    if (!r.applicable) continue;
    auto& c = counts[r.id];
    ++c.first;
    if (!r.pass) ++c.second;
  }
  for (const auto& [id, c] : counts)
    j["checks"][id] = {{"count", c.first}, {"violations", c.second}, {"max_ratio", max_ratio(id)}};
  return j.dump(2);
}

EstimateConstants estimate_constants(const ConstantInputs& in, const DerivedConstants& derived) {
  EstimateConstants c;
  c.lambda_N_disk = in.lambda_N_disk;
  c.c_tr_disk = in.c_tr_disk;
  c.lambda_N_square = in.lambda_N_square;
  c.lambda_N = in.lambda_N;
  c.rho = in.rho;
  c.m_star = in.m_star;
  c.c1 = derived.c1;
  c.c2 = derived.c2;
  c.c3 = derived.c3;
  c.c4 = derived.c4;
  return c;
}

EstimateConstants estimate_constants(const ShapeConstants& constants) {
  return estimate_constants(constants.inputs, constants.derived);
}

CellGeometry CellGeometry::from_field(const MassField& field) {
  CellGeometry g;
  g.epsilon = field.epsilon;
  g.d = field.d;
  g.inclusion = field.inclusion;
  g.pole = circumcenter(field.inclusion);
  if (!(g.d > 0.0 && g.d < g.epsilon))
    throw std::invalid_argument("cell geometry needs 0 < d < eps");
  if (outer_radius(field.inclusion) > g.d * (1.0 + 1e-12))
    throw std::invalid_argument("inclusion is not contained in its enclosing disk");
  if (g.pole.cwiseAbs().maxCoeff() + g.epsilon > 1.5 * g.epsilon * (1.0 + 1e-12))
    throw std::invalid_argument("outer disk leaves the enlarged cell");
  g.log_ratio = std::log(g.epsilon / g.d);
  return g;
}

TestFunction cell_test_function(const CellGeometry& geometry, std::uint64_t seed, int max_freq) {
  const double period = geometry.epsilon * static_cast<double>(1 + seed % 3);
  const double h = 1.5 * geometry.epsilon;
  return TestFunction::trig_polynomial(period, max_freq, mix(seed, 1), Vec2(-h, -h));
}

CheckReport validate_mean_lemmas(const TestFunction& f, const CellGeometry& geometry,
                                 const EstimateConstants& constants, std::uint64_t seed,
                                 const Resolution& res) {
  return lemma_rows(f, geometry, constants, seed, res, true, false);
}

CheckReport validate_lemma6(const TestFunction& f, const CellGeometry& geometry,
                            const EstimateConstants& constants, std::uint64_t seed, const Resolution& res) {
  return lemma_rows(f, geometry, constants, seed, res, false, true);
}

CheckReport validate_oscillation(const TestFunction& f, const TestFunction& g, const CellGeometry& geometry,
                                 const EstimateConstants& constants, std::uint64_t seed,
                                 const Resolution& res) {
  CheckReport report;
  if (f.kind() == TestFunction::Kind::radial_log || g.kind() == TestFunction::Kind::radial_log) {
    report.rows.push_back(not_applicable("osc.inclusion", seed, "pole inside the domain"));
    report.rows.push_back(not_applicable("osc.cell", seed, "pole inside the domain"));
    return report;
  }
  auto sides = [&](const AreaRule& rule, double scale) {
    double fg = 0.0, sf = 0.0, sg = 0.0, measure = 0.0, gf = 0.0, gg = 0.0;
    for (size_t i = 0; i < rule.nodes.size(); ++i) {
      const Eigen::Vector3d a = f.jet(rule.nodes[i]);
      const Eigen::Vector3d b = g.jet(rule.nodes[i]);
      const double w = rule.weights[i];
      fg += w * a(0) * b(0);
      sf += w * a(0);
      sg += w * b(0);
      measure += w;
      gf += w * (a(1) * a(1) + a(2) * a(2));
      gg += w * (b(1) * b(1) + b(2) * b(2));
    }
    return SidePair{std::abs(fg - sf * sg / measure), scale * std::sqrt(gf * gg)};
  };
  const double d2 = geometry.d * geometry.d;
  const double e2 = geometry.epsilon * geometry.epsilon;
  const Resolution fine = res.doubled();
  const std::vector<std::pair<std::string, SidePair>> coarse = {
      {"osc.inclusion", sides(area_rule(geometry.inclusion, res.radial_order, res.angular_points),
                              d2 / constants.lambda_N)},
      {"osc.cell", sides(square_rule(Vec2::Zero(), geometry.epsilon, res.panels, res.order),
                         e2 / constants.lambda_N_square)}};
  const std::vector<std::pair<std::string, SidePair>> refined = {
      {"osc.inclusion", sides(area_rule(geometry.inclusion, fine.radial_order, fine.angular_points),
                              d2 / constants.lambda_N)},
      {"osc.cell", sides(square_rule(Vec2::Zero(), geometry.epsilon, fine.panels, fine.order),
                         e2 / constants.lambda_N_square)}};
  return rows_from(coarse, refined, seed);
}

std::vector<Vec2> CellPatch::cell_centers() const {
  std::vector<Vec2> out;
  for (int i = -radius; i <= radius; ++i)
    for (int j = -radius; j <= radius; ++j) out.emplace_back(i * field.epsilon, j * field.epsilon);
  return out;
}

CellPatch make_patch(const MassField& field, int radius) {
  if (radius < 1) throw std::invalid_argument("cell patch radius must be at least 1");
  return CellPatch{field, radius};
}

SpinorField overlapping_spinor(const CellPatch& patch, std::uint64_t seed) {
  std::mt19937_64 rng(mix(seed, 2));
  const double eps = patch.field.epsilon;
  const Vec2 pole = circumcenter(patch.field.inclusion);
  const Vec2 center = pole + eps * Vec2(0.5 * uniform(rng) - 0.25, 0.5 * uniform(rng) - 0.25);
  double radius = eps * (0.5 + 0.7 * uniform(rng));
  radius = std::min(radius, 0.999 * (patch.half_width() - center.cwiseAbs().maxCoeff()));
  return SpinorField::bump(center, radius, eps, 3, mix(seed, 3));
}

SpinorField disjoint_spinor(const CellPatch& patch, std::uint64_t seed) {
  std::mt19937_64 rng(mix(seed, 4));
  const double eps = patch.field.epsilon;
  const Vec2 pole = circumcenter(patch.field.inclusion);
  const double reach = outer_radius(patch.field.inclusion);
  const Vec2 center = pole + eps * Vec2(0.5 + 0.1 * (uniform(rng) - 0.5), 0.5 + 0.1 * (uniform(rng) - 0.5));
  double clearance = std::numeric_limits<double>::infinity();
  for (const Vec2& c : patch.cell_centers()) clearance = std::min(clearance, (c + pole - center).norm() - reach);
  clearance = std::min(clearance, patch.half_width() - center.cwiseAbs().maxCoeff());
  if (!(clearance > 0.0)) throw std::invalid_argument("no inclusion-free room in the cell patch");
  const double radius = clearance * (0.6 + 0.35 * uniform(rng));
  return SpinorField::bump(center, radius, eps, 3, mix(seed, 5));
}

SpinorNorms spinor_norms(const SpinorField& v, const CellPatch& patch, const Resolution& res) {
  return norms_at(v, patch, res);
}

Complex form_difference(const SpinorField& u, const SpinorField& v, const CellPatch& patch,
                        const Resolution& res) {
  return form_at(u, v, patch, res);
}

CheckReport validate_bcls(const SpinorField& v, const CellPatch& patch, std::uint64_t seed,
                          const Resolution& res) {
  const SpinorNorms c = norms_at(v, patch, res);
  const SpinorNorms f = norms_at(v, patch, res.doubled());
  const double lhs = f.dirac_eps;
  const double rhs = f.grad + f.mass_volume + f.mass_boundary;
  const double error = std::abs(lhs - c.dirac_eps) + std::abs(rhs - (c.grad + c.mass_volume + c.mass_boundary));
  CheckReport report;
  if (meets_inclusion(v, patch))
    report.rows.push_back(identity("bcls", seed, lhs, rhs, error, 1e-6));
  else
    report.rows.push_back(identity("bcls.free", seed, lhs, f.grad, error, 1e-8));
  return report;
}

CheckReport validate_constant_spinor(const Spinor& xi, const Shape& inclusion, std::uint64_t seed,
                                     int boundary_nodes) {
  const BoundaryQuadrature bq = boundary_quadrature(inclusion, boundary_nodes);
  const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
  Complex term = 0.0;
  double projector = 0.0;
  for (size_t i = 0; i < bq.nodes.size(); ++i) {
    const Eigen::Matrix2cd b = boundary_matrix(bq.normals[i]);
    term += bq.weights[i] * inner(b * xi, xi);
    const Eigen::Matrix2cd plus = 0.5 * (id + b), minus = 0.5 * (id - b);
    projector = std::max({projector, (plus * plus - plus).norm(), (minus * minus - minus).norm(),
                          (plus + minus - id).norm(), (plus * minus).norm(), (b - b.adjoint()).norm()});
  }
  CheckReport report;
  CheckRow xi_row;
  xi_row.id = "xi";
  xi_row.seed = seed;
  xi_row.lhs = std::abs(term);
  xi_row.rhs = 1e-10;
  xi_row.slack = xi_row.rhs - xi_row.lhs;
  xi_row.pass = xi_row.lhs <= 1e-10;
  report.rows.push_back(xi_row);
  CheckRow p_row = xi_row;
  p_row.id = "projector";
  p_row.lhs = projector;
  p_row.rhs = 1e-12;
  p_row.slack = p_row.rhs - p_row.lhs;
  p_row.pass = projector <= 1e-12;
  report.rows.push_back(p_row);
  return report;
}

CheckReport validate_form_bound(const SpinorField& u, const SpinorField& v, const CellPatch& patch,
                                const EstimateConstants& constants, std::uint64_t seed,
                                const Resolution& res) {
  const Resolution fine = res.doubled();
  const double eps = patch.field.epsilon;
  const double scale = constants.c3 * eps * std::sqrt(std::log(eps / patch.field.d));
  auto sides = [&](const Resolution& r) {
    const double s = std::abs(form_at(u, v, patch, r));
    const double hu = norms_at(u, patch, r).h1();
    const double hv = norms_at(v, patch, r).h1();
    return SidePair{s, scale * std::sqrt(hu * hv)};
  };
  const SidePair c = sides(res), f = sides(fine);
  CheckReport report;
  report.rows.push_back(
      inequality("form", seed, f.lhs, f.rhs, std::abs(f.lhs - c.lhs) + std::abs(f.rhs - c.rhs)));
  return report;
}

CheckReport validate_graph_bounds(const SpinorField& u, const SpinorField& v, const CellPatch& patch,
                                  const EstimateConstants& constants, std::uint64_t seed,
                                  const Resolution& res) {
  CheckReport report;
  const double eps = patch.field.epsilon, d = patch.field.d;
  const double ms = patch.field.m_star;
  const Resolution fine = res.doubled();

  if (constants.c4) {
    const double pre = *constants.c4 * std::pow(eps, 4) * std::log(eps / d) / (d * d);
    CheckRow row = inequality("graph.precondition", seed, pre, 0.25, 0.0);
    report.rows.push_back(row);
  } else {
    CheckRow row;
    row.id = "graph.precondition";
    row.seed = seed;
    row.pass = false;
    row.note = "C4 undefined: alpha condition infeasible";
    report.rows.push_back(row);
  }

  const SpinorNorms uc = norms_at(u, patch, res), uf = norms_at(u, patch, fine);
  const double id_rhs_f = uf.grad + ms * ms * uf.l2, id_rhs_c = uc.grad + ms * ms * uc.l2;
  report.rows.push_back(identity("graph.limit.identity", seed, uf.dirac_limit, id_rhs_f,
                                 std::abs(uf.dirac_limit - uc.dirac_limit) + std::abs(id_rhs_f - id_rhs_c),
                                 1e-8));
  report.rows.push_back(inequality("graph.limit", seed, uf.h1(), uf.dirac_limit + uf.l2,
                                   std::abs(uf.h1() - uc.h1()) +
                                       std::abs(uf.dirac_limit + uf.l2 - uc.dirac_limit - uc.l2)));

  if (!constants.c4) {
    report.rows.push_back(not_applicable("graph.eps", seed, "C4 undefined"));
    return report;
  }
  const double shift = *constants.c4 * eps * eps / (d * d) + 0.25;
  const SpinorNorms vc = norms_at(v, patch, res), vf = norms_at(v, patch, fine);
  const double rhs_f = vf.dirac_eps + shift * vf.l2, rhs_c = vc.dirac_eps + shift * vc.l2;
  report.rows.push_back(inequality("graph.eps", seed, 0.25 * vf.h1(), rhs_f,
                                   0.25 * std::abs(vf.h1() - vc.h1()) + std::abs(rhs_f - rhs_c)));
  return report;
}

void MatrixPair::validate() const {
  if (d.rows() != d.cols() || d_tilde.rows() != d_tilde.cols() || d.rows() != d_tilde.rows() || d.rows() == 0)
    throw std::invalid_argument("matrix pair needs two square matrices of equal size");
  auto hermitian = [](const CMatrix& m) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= 1e-13 * std::max(1.0, m.cwiseAbs().maxCoeff());
  };
  if (!hermitian(d) || !hermitian(d_tilde)) throw std::invalid_argument("matrix pair is not Hermitian");
  if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("graph-norm constants must be positive");
}

SchemeResult abstract_scheme(const MatrixPair& pair) {
  pair.validate();
  SchemeResult r;
  const CMatrix left = inverse_sqrt_graph(pair.d_tilde, pair.b);
  const CMatrix right = inverse_sqrt_graph(pair.d, pair.a);
  r.c = linalg::singular_values(left * (pair.d - pair.d_tilde) * right)(0);
  const double c = pair.c ? *pair.c : r.c;
  r.difference = linalg::singular_values(shifted_inverse(pair.d_tilde) - shifted_inverse(pair.d))(0);
  r.bound = c * std::sqrt((pair.a + 1.0) * (pair.b + 1.0));
  r.pass = r.difference <= r.bound * (1.0 + 1e-12) + 1e-14;
  return r;
}

MatrixPair random_hermitian_pair(std::uint64_t seed, int max_dim) {
  if (max_dim < 1) throw std::invalid_argument("max_dim must be positive");
  std::mt19937_64 rng(mix(seed, 6));
  const int n = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_dim));
  MatrixPair pair;
  pair.d = random_hermitian(rng, n, 3.0);
  const double size = std::pow(10.0, -3.0 + 4.0 * uniform(rng));
  pair.d_tilde = pair.d + random_hermitian(rng, n, size);
  return pair;
}

CheckReport abstract_scheme_check(int trials, std::uint64_t seed, int max_dim) {
  if (trials < 0) throw std::invalid_argument("trial count must be non-negative");
  CheckReport report;
  for (int t = 0; t < trials; ++t) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(t);
    MatrixPair pair = random_hermitian_pair(s, max_dim);
    const bool rank_one = t % 4 == 3;
    if (rank_one) {
      std::mt19937_64 rng(mix(s, 7));
      const int n = static_cast<int>(pair.d.rows());
      CVector w(n);
      for (int i = 0; i < n; ++i) w(i) = Complex(2.0 * uniform(rng) - 1.0, 2.0 * uniform(rng) - 1.0);
      const double delta = std::pow(10.0, -2.0 + 3.0 * uniform(rng));
      CMatrix p = delta * (w * w.adjoint()) / w.squaredNorm();
      p = (p + p.adjoint()) * 0.5;
      pair.d_tilde = pair.d + p;
    }
    const SchemeResult r = abstract_scheme(pair);
    CheckRow row;
    row.id = "scheme";
    row.seed = s;
    row.lhs = r.difference;
    row.rhs = r.bound;
    row.slack = r.bound - r.difference;
    row.pass = r.pass;
    report.rows.push_back(row);
    if (rank_one) {
      // Bound over difference equals sqrt((a+1)(b+1)) = 2 when a = b = 1.
      CheckRow tight = row;
      tight.id = "scheme.tight";
      tight.lhs = r.bound;
      tight.rhs = 2.0 * (1.0 + 1e-9) * r.difference;
      tight.slack = tight.rhs - tight.lhs;
      tight.pass = tight.lhs <= tight.rhs;
      report.rows.push_back(tight);
    }
  }
  return report;
}

CheckReport run_lemma_suite(const CellGeometry& geometry, const EstimateConstants& constants,
                            const LemmaSuiteOptions& options) {
  if (options.functions < 1) throw std::invalid_argument("lemma corpus must not be empty");
  CheckReport report = lemma_rows(TestFunction::constant(1.0), geometry, constants, 0, options.resolution,
                                  true, true);
  report.append(lemma_rows(TestFunction::radial_log(geometry.pole), geometry, constants, 0,
                           options.resolution, true, true));
  std::vector<CheckReport> slots(options.functions);
  parallel_for(options.functions, options.workers, [&](int i) {
    const std::uint64_t s = options.seed + static_cast<std::uint64_t>(i);
    const TestFunction f = cell_test_function(geometry, s, options.max_freq);
    const TestFunction g = cell_test_function(geometry, mix(s, 8), options.max_freq);
    CheckReport r = lemma_rows(f, geometry, constants, s, options.resolution, true, true);
    r.append(validate_oscillation(f, g, geometry, constants, s, options.resolution));
    slots[i] = std::move(r);
  });
  for (const CheckReport& r : slots) report.append(r);
  return report;
}

CheckReport run_bcls_suite(const CellPatch& patch, const SpinorSuiteOptions& options) {
  if (options.spinors < 1) throw std::invalid_argument("spinor corpus must not be empty");
  CheckReport report;
  const Spinor xi(Complex(0.6, -0.3), Complex(-0.2, 0.7));
  report.append(validate_constant_spinor(xi, patch.field.inclusion, 0));
  report.append(validate_bcls(disjoint_spinor(patch, options.seed), patch, 0, options.resolution));
  std::vector<CheckReport> slots(options.spinors);
  parallel_for(options.spinors, options.workers, [&](int i) {
    const std::uint64_t s = options.seed + static_cast<std::uint64_t>(i);
    slots[i] = validate_bcls(overlapping_spinor(patch, s), patch, s, options.resolution);
  });
  for (const CheckReport& r : slots) report.append(r);
  return report;
}

CheckReport run_form_suite(const CellPatch& patch, const EstimateConstants& constants,
                           const SpinorSuiteOptions& options) {
  if (options.spinors < 1) throw std::invalid_argument("spinor corpus must not be empty");
  std::vector<CheckReport> slots(options.spinors);
  parallel_for(options.spinors, options.workers, [&](int i) {
    const std::uint64_t s = options.seed + static_cast<std::uint64_t>(i);
    slots[i] = validate_form_bound(overlapping_spinor(patch, s), overlapping_spinor(patch, mix(s, 9)), patch,
                                   constants, s, options.resolution);
  });
  CheckReport report;
  for (const CheckReport& r : slots) report.append(r);
  return report;
}

CheckReport run_graph_suite(const CellPatch& patch, const EstimateConstants& constants,
                            const SpinorSuiteOptions& options) {
  if (options.spinors < 1) throw std::invalid_argument("spinor corpus must not be empty");
  std::vector<CheckReport> slots(options.spinors);
  parallel_for(options.spinors, options.workers, [&](int i) {
    const std::uint64_t s = options.seed + static_cast<std::uint64_t>(i);
    slots[i] = validate_graph_bounds(overlapping_spinor(patch, s), overlapping_spinor(patch, mix(s, 9)), patch,
                                     constants, s, options.resolution);
  });
  CheckReport report;
  for (const CheckReport& r : slots) report.append(r);
  return report;
}

}  // namespace dirachom
