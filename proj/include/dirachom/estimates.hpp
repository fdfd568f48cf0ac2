#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dirachom/lattice.hpp"
#include "dirachom/shape_constants.hpp"
#include "dirachom/test_functions.hpp"

namespace dirachom {

// Quadrature resolution; every check runs at `base` and at `base.doubled()`.
struct Resolution {
  int radial_order = 16;
  int radial_panels = 4;
  int angular_points = 128;
  int panels = 8;  // tensor panels per cell edge
  int order = 16;
  int boundary_nodes = 256;

  Resolution doubled() const;
};

struct MeanValue {
  double value = 0.0;
  double error = 0.0;
};

MeanValue mean_value(const TestFunction& f, const Shape& region, const Resolution& res = {});
MeanValue mean_value(const TestFunction& f, const BoundaryQuadrature& curve);
// Mean over the circle |x - center| = radius.
MeanValue circle_mean(const TestFunction& f, const Vec2& center, double radius,
                      const Resolution& res = {});

// One inequality (lhs <= rhs) or identity (lhs = rhs) evaluation.
struct CheckRow {
  std::string id;
  std::uint64_t seed = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  // rhs - lhs
  double error = 0.0;  // quadrature error bar from the resolution doubling
  bool pass = true;
  bool applicable = true;
  std::string note;
};

struct CheckReport {
  std::vector<CheckRow> rows;

  void append(const CheckReport& other);
  int checked() const;
  int violations() const;
  bool all_pass() const { return violations() == 0; }
  // Smallest slack / rhs over applicable rows with rhs > 0.
  double min_relative_slack() const;
  // Largest lhs / rhs over applicable rows with rhs > 0.
  double max_ratio(const std::string& id) const;
  std::vector<const CheckRow*> find(const std::string& id) const;

  std::string to_csv() const;
  std::string summary_json() const;
};

// Row for lhs <= rhs with a quadrature error bar and a round-off floor.
CheckRow inequality_row(const std::string& id, std::uint64_t seed, double lhs, double rhs, double error);
// Row that is recorded but not counted.
CheckRow skipped_row(const std::string& id, std::uint64_t seed, const std::string& note);

// Constants consumed by the validators.
struct EstimateConstants {
  double lambda_N_disk = 0.0;
  double c_tr_disk = 0.0;
  double lambda_N_square = 0.0;
  double lambda_N = 0.0;  // template
  double rho = 0.0;       // template inner radius
  double m_star = 1.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
  std::optional<double> c4;
};

EstimateConstants estimate_constants(const ShapeConstants& constants);
EstimateConstants estimate_constants(const ConstantInputs& inputs, const DerivedConstants& derived);

// Cell k = 0 with its auxiliary disks and squares.
struct CellGeometry {
  double epsilon = 0.0;
  double d = 0.0;
  Shape inclusion = Shape::disk(1.0);  // placed, cell centered at the origin
  Vec2 pole = Vec2::Zero();            // center of the enclosing disks
  double log_ratio = 0.0;              // ln(eps / d)

  // Throws std::invalid_argument unless inclusion in B in R in 3eps-square.
  static CellGeometry from_field(const MassField& field);
};

CheckReport validate_mean_lemmas(const TestFunction& f, const CellGeometry& geometry,
                                 const EstimateConstants& constants, std::uint64_t seed = 0,
                                 const Resolution& res = {});
CheckReport validate_lemma6(const TestFunction& f, const CellGeometry& geometry,
                            const EstimateConstants& constants, std::uint64_t seed = 0,
                            const Resolution& res = {});
// Oscillation bounds on the inclusion and on the cell.
CheckReport validate_oscillation(const TestFunction& f, const TestFunction& g,
                                 const CellGeometry& geometry, const EstimateConstants& constants,
                                 std::uint64_t seed = 0, const Resolution& res = {});

// Seeded trig polynomial scaled to the cell.
TestFunction cell_test_function(const CellGeometry& geometry, std::uint64_t seed, int max_freq = 8);

// (2 radius + 1)^2 cells around the origin sharing one mass field.
struct CellPatch {
  MassField field;
  int radius = 1;

  double half_width() const { return (radius + 0.5) * field.epsilon; }
  std::vector<Vec2> cell_centers() const;
};

CellPatch make_patch(const MassField& field, int radius = 1);

// Bump spinor meeting the inclusion of the central cell.
SpinorField overlapping_spinor(const CellPatch& patch, std::uint64_t seed);
// Bump spinor whose support avoids every inclusion.
SpinorField disjoint_spinor(const CellPatch& patch, std::uint64_t seed);

// Quadratic quantities of a spinor on the patch.
struct SpinorNorms {
  double l2 = 0.0;           // ||v||^2
  double grad = 0.0;         // ||grad v||^2
  double dirac_eps = 0.0;    // ||D_eps v||^2
  double dirac_limit = 0.0;  // ||D v||^2 with constant mass m_star
  double mass_volume = 0.0;  // sum m^2 ||v||^2_D
  double mass_boundary = 0.0;  // sum m (||P+ v||^2 - ||P- v||^2) on the inclusion boundaries
  double h1() const { return l2 + grad; }
};

SpinorNorms spinor_norms(const SpinorField& v, const CellPatch& patch, const Resolution& res = {});
// (D u, v) - (u, D_eps v)
Complex form_difference(const SpinorField& u, const SpinorField& v, const CellPatch& patch,
                        const Resolution& res = {});

CheckReport validate_bcls(const SpinorField& v, const CellPatch& patch, std::uint64_t seed = 0,
                          const Resolution& res = {});
// Boundary term of a constant spinor on one inclusion, and projector algebra at its nodes.
CheckReport validate_constant_spinor(const Spinor& xi, const Shape& inclusion, std::uint64_t seed = 0,
                                     int boundary_nodes = 512);
CheckReport validate_form_bound(const SpinorField& u, const SpinorField& v, const CellPatch& patch,
                                const EstimateConstants& constants, std::uint64_t seed = 0,
                                const Resolution& res = {});
CheckReport validate_graph_bounds(const SpinorField& u, const SpinorField& v, const CellPatch& patch,
                                  const EstimateConstants& constants, std::uint64_t seed = 0,
                                  const Resolution& res = {});

// Hermitian pair with graph-norm constants a, b.
struct MatrixPair {
  CMatrix d;
  CMatrix d_tilde;
  double a = 1.0;
  double b = 1.0;
  std::optional<double> c;

  // Throws std::invalid_argument unless both are Hermitian to 1e-13 and of equal size.
  void validate() const;
};

struct SchemeResult {
  double c = 0.0;           // smallest admissible form constant
  double difference = 0.0;  // ||(D~ - i)^-1 - (D - i)^-1||
  double bound = 0.0;       // c sqrt((a + 1)(b + 1))
  bool pass = true;
};

SchemeResult abstract_scheme(const MatrixPair& pair);
MatrixPair random_hermitian_pair(std::uint64_t seed, int max_dim = 20);
CheckReport abstract_scheme_check(int trials, std::uint64_t seed, int max_dim = 20);

// Seeded corpora.
struct LemmaSuiteOptions {
  int functions = 200;
  std::uint64_t seed = 1;
  int max_freq = 8;
  int workers = 1;
  Resolution resolution{};
};
CheckReport run_lemma_suite(const CellGeometry& geometry, const EstimateConstants& constants,
                            const LemmaSuiteOptions& options);

struct SpinorSuiteOptions {
  int spinors = 20;
  std::uint64_t seed = 1;
  int workers = 1;
  Resolution resolution{};
};
CheckReport run_bcls_suite(const CellPatch& patch, const SpinorSuiteOptions& options);
CheckReport run_form_suite(const CellPatch& patch, const EstimateConstants& constants,
                           const SpinorSuiteOptions& options);
CheckReport run_graph_suite(const CellPatch& patch, const EstimateConstants& constants,
                            const SpinorSuiteOptions& options);

}  // namespace dirachom
