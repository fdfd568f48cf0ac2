#include "dirachom/lattice.hpp"

#include <cmath>
#include <sstream>

namespace dirachom {

double DRule::operator()(double epsilon) const {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  return c * std::pow(epsilon, kappa);
}

LatticeConfig make_lattice(double epsilon, double m_star, const Shape& shape, DRule rule,
                           Vec2 center_offset) {
  LatticeConfig cfg;
  cfg.epsilon = epsilon;
  cfg.m_star = m_star;
  cfg.shape = normalized(shape);
  cfg.d_rule = rule;
  cfg.center_offset = center_offset;
  return cfg;
}

LatticeConfig full_cell_lattice(double epsilon, double m_star) {
  LatticeConfig cfg = make_lattice(epsilon, m_star, Shape::unit_square(), DRule{});
  // d = eps / sqrt(2) for every eps.
  cfg.d_rule = DRule{std::sqrt(0.5), 1.0};
  return cfg;
}

namespace {

bool is_full_cell(const LatticeConfig& cfg, double d) {
  const auto* p = std::get_if<RegularPolygon>(&cfg.shape.params());
  if (p == nullptr || p->sides != 4) return false;
  const double rot = std::remainder(p->rotation, kPi / 2.0);
  const double side = std::sqrt(2.0) * p->circumradius * d;
  return std::abs(rot) < 1e-14 && std::abs(side - cfg.epsilon) <= 1e-14 * cfg.epsilon &&
         cfg.center_offset.norm() <= 1e-14 * cfg.epsilon;
}

}  // namespace

MassField calibrate_mass(const LatticeConfig& config) {
  const double eps = config.epsilon;
  if (!(eps > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (!(config.m_star >= 0.0)) throw std::invalid_argument("m_star must be nonnegative");
  const double d = config.d();
  if (!(d > 0.0)) throw std::invalid_argument("inclusion radius must be positive");
  const Shape placed = config.shape.scaled(d).translated(config.center_offset);
  MassField field{0.0, config.m_star, eps, d, placed, area(config.shape), false, true};
  field.full_cell = is_full_cell(config, d);
  if (!field.full_cell) {
    // Strict containment in the open cell, checked on a fine boundary sample.
    const BoundaryQuadrature bq = boundary_quadrature(placed, 1024);
    double extent = 0.0;
    for (const Vec2& x : bq.nodes) extent = std::max(extent, x.cwiseAbs().maxCoeff());
    if (placed.is_polygon()) {
      for (const Vec2& v : placed.vertices()) extent = std::max(extent, v.cwiseAbs().maxCoeff());
    }
    if (!(extent < 0.5 * eps)) {
      std::ostringstream os;
      os << "inclusion not strictly inside the cell (extent " << extent << " vs half-period "
         << 0.5 * eps << ")";
      throw std::invalid_argument(os.str());
    }
  }
  field.m_value = config.m_star * eps * eps / (d * d * field.template_area);
  return field;
}

double eta(double epsilon, double d) {
  if (!(d > 0.0) || !(d < epsilon)) throw std::invalid_argument("eta needs 0 < d < epsilon");
  return epsilon * epsilon / d * std::sqrt(std::log(epsilon / d));
}

double eta(const LatticeConfig& config) { return eta(config.epsilon, config.d()); }

double corollary_threshold(double m_star) {
  const double s = std::sqrt(1.0 + m_star * m_star);
  return (1.0 - 1.0 / s) / (1.0 + s);
}

bool AssumptionReport::standing_ok() const {
  for (const auto& c : checks)
    if (c.id != "eta:bound" && !c.pass) return false;
  return true;
}

bool AssumptionReport::corollary_ok() const {
  const AssumptionCheck* c = find("eta:bound");
  return c != nullptr && c->pass;
}

const AssumptionCheck* AssumptionReport::find(const std::string& id) const {
  for (const auto& c : checks)
    if (c.id == id) return &c;
  return nullptr;
}

AssumptionReport check_assumptions(const LatticeConfig& config, const TemplateConstants& k) {
  AssumptionReport r;
  const double eps = config.epsilon;
  double d = 0.0;
  try {
    d = config.d();
  } catch (const std::exception&) {
    d = 0.0;
  }
  r.checks.push_back({"2.1", d > 0.0, d, 0.0, "inclusion radius positive"});
  // Relative slack admits the full-cell configuration d = eps/sqrt(2) up to rounding.
  r.checks.push_back({"2.2", d <= eps / std::sqrt(2.0) * (1.0 + 1e-12), d, eps / std::sqrt(2.0),
                      "d <= eps/sqrt(2)"});
  r.checks.push_back({"2.3", k.rho > 0.0 && k.rho <= 1.0, k.rho, 1.0,
                      "inner radius of the template in (0, 1]"});
  r.checks.push_back({"2.4", std::isfinite(k.c_tr) && k.c_tr > 0.0, k.c_tr, 0.0,
                      "trace constant finite"});
  r.checks.push_back({"2.5", k.lambda_N > 0.0, k.lambda_N, 0.0, "Neumann eigenvalue positive"});
  r.checks.push_back({"eps0", eps > 0.0 && eps <= config.epsilon0, eps, config.epsilon0,
                      "0 < eps <= eps0"});
  bool inside = true;
  std::string why = "inclusion inside cell";
  try {
    calibrate_mass(config);
  } catch (const std::exception& e) {
    inside = false;
    why = e.what();
  }
  r.checks.push_back({"containment", inside, d, 0.5 * eps, why});
  if (d > 0.0 && d < eps) {
    const double e = eta(eps, d);
    const double t = corollary_threshold(config.m_star);
    r.checks.push_back({"eta:bound", e <= t, e, t, "eta <= corollary threshold"});
  } else {
    r.checks.push_back({"eta:bound", false, std::nan(""), corollary_threshold(config.m_star),
                        "eta undefined for d >= eps"});
  }
  r.exploratory_regime = config.d_rule.kappa >= 2.0;
  return r;
}

}  // namespace dirachom
