#pragma once

#include <string>
#include <vector>

#include "dirachom/shapes.hpp"

namespace dirachom {

// Inclusion outer radius as a function of the period: d = c eps^kappa.
struct DRule {
  double c = 0.25;
  double kappa = 1.0;

  double operator()(double epsilon) const;
};

struct LatticeConfig {
  double epsilon = 0.25;
  double m_star = 1.0;
  // Unit-outer-radius template with its circumcenter at the origin.
  Shape shape = Shape::disk(1.0);
  DRule d_rule{};
  // Inclusion circumcenter relative to the cell center.
  Vec2 center_offset = Vec2::Zero();
  double epsilon0 = 0.5;

  double d() const { return d_rule(epsilon); }
};

// Builds a config whose template is `shape` normalized to outer radius 1.
LatticeConfig make_lattice(double epsilon, double m_star, const Shape& shape, DRule rule,
                           Vec2 center_offset = Vec2::Zero());

// Config whose inclusion is the whole cell: unit-square template, d = eps/sqrt(2).
LatticeConfig full_cell_lattice(double epsilon, double m_star);

struct MassField {
  double m_value;
  double m_star;
  double epsilon;
  double d;
  // Placed inclusion in cell coordinates, cell = [-eps/2, eps/2]^2.
  Shape inclusion;
  double template_area;
  bool full_cell = false;
  bool periodic = true;
};

MassField calibrate_mass(const LatticeConfig& config);

double eta(double epsilon, double d);
double eta(const LatticeConfig& config);

// Right side of the invertibility condition for the limit operator.
double corollary_threshold(double m_star);

// Template constants used by the assumption report.
struct TemplateConstants {
  double rho;
  double c_tr;
  double lambda_N;
};

struct AssumptionCheck {
  std::string id;
  bool pass;
  double value;
  double bound;
  std::string note;
};

struct AssumptionReport {
  std::vector<AssumptionCheck> checks;
  // Geometry and positivity conditions (everything except the corollary threshold).
  bool standing_ok() const;
  bool corollary_ok() const;
  // d ~ c eps^kappa with kappa >= 2 leaves the range covered by the rate theorem.
  bool exploratory_regime = false;
  const AssumptionCheck* find(const std::string& id) const;
};

AssumptionReport check_assumptions(const LatticeConfig& config, const TemplateConstants& constants);

}  // namespace dirachom
