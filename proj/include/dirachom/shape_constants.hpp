#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dirachom/fem.hpp"
#include "dirachom/lattice.hpp"

namespace dirachom {

// FEM value pair at h and h/2 with an O(h^2) Richardson extrapolation.
struct Estimate {
  double value = 0.0;
  double coarse = 0.0;
  double fine = 0.0;
  double error = 0.0;
};

Estimate richardson(double coarse, double fine);

// Spectral constants of one shape.
struct SpectralConstants {
  std::string label;
  Shape shape = Shape::disk(1.0);
  double h = 0.0;
  int vertices_fine = 0;
  Estimate lambda_N;
  Estimate lambda_S;
  Estimate c_tr;
  std::map<double, Estimate> lambda_R;
  double area = 0.0;
  double perimeter = 0.0;
  // Fine-mesh domain measures (for discrete inequality checks).
  double mesh_area = 0.0;
  double mesh_perimeter = 0.0;
  bool polygon = false;
  double refinement_error() const;
};

struct SpectralOptions {
  double h = 0.1;              // coarse mesh size; the fine mesh uses h/2
  std::vector<double> gammas;  // Robin parameters besides 0 and 1
  bool steklov = true;
};

SpectralConstants compute_spectral_constants(const Shape& shape, const std::string& label,
                                             const SpectralOptions& options);

// Robin parameters gamma_k = -Lambda_S k/(count+1), k = 1..count.
std::vector<double> robin_samples(double lambda_S, int count);

// Adds Robin eigenvalues at robin_samples(lambda_S, count) on the meshes of `sc`.
void add_robin_samples(SpectralConstants& sc, int count, int workers = 1);

double payne_weinberger_bound(const Shape& shape);

struct BramblePayneData {
  double r_min;
  double r_max;
  double support;
  double bound;
};
BramblePayneData bramble_payne(const Shape& shape, const Vec2& p);
double bramble_payne_bound(const Shape& shape, const Vec2& p);

// Right side of the Steklov-type lower bound.
double steklov_lower_bound(double c_tr, double lambda_N);
// Right side of the weak Robin bound, gamma in (-lambda_S, 0).
double robin_weak_bound(double gamma, double perimeter, double area, double lambda_S);

struct ConstantInputs {
  double lambda_N_disk;    // unit disk
  double lambda_N_square;  // unit square
  double lambda_R1_disk;   // unit disk, Robin parameter 1
  double c_tr_disk;
  double c_tr;             // template
  double lambda_N;         // template
  double rho;              // template inner radius
  double m_star;
  double md_max;           // largest m d over the configured sweep
};

struct DerivedConstants {
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
  std::optional<double> alpha;
  std::optional<double> c4;
  std::optional<double> c_final;
  // Values in the limit m d -> 0.
  double alpha_limit = 0.0;
  double c4_limit = 0.0;
  double c_final_limit = 0.0;
  // min of the two right-hand sides of the alpha condition
  double alpha_rhs = 0.0;
};

DerivedConstants assemble_constants(const ConstantInputs& in);

// Least alpha with 4 md + 4/alpha <= rhs/2; empty when impossible.
std::optional<double> least_alpha(double md, double c_tr, double lambda_N);
double c4_value(double m_star, double c_tr, double alpha, double c2, double rho);

struct ShapeConstants {
  SpectralConstants disk;
  SpectralConstants square;
  SpectralConstants inclusion;
  InnerRadius inner;
  double m_star = 1.0;
  double md_max = 0.0;
  ConstantInputs inputs{};
  DerivedConstants derived;

  TemplateConstants template_constants() const;
};

struct ConstantsOptions {
  double h = 0.1;
  int robin_samples = 10;
  int workers = 1;
};

ShapeConstants compute_shape_constants(const Shape& template_shape, double m_star, double md_max,
                                       const ConstantsOptions& options);

// Largest m d = m_star eps^2 / (d |D|) over a list of periods.
double md_max_for(const LatticeConfig& base, const std::vector<double>& epsilons);

}  // namespace dirachom
