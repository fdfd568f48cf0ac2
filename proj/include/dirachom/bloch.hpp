#pragma once

#include <memory>
#include <vector>

#include "dirachom/lattice.hpp"

namespace dirachom {

enum class MassKind { constant, periodic };

// Cell-periodic mass, described by its cell Fourier coefficients
//   c(j) = eps^-2 * integral over the cell of m(x) exp(-2 pi i j.x/eps).
class PeriodicMass {
 public:
  static PeriodicMass constant(double epsilon, double m);
  static PeriodicMass from_field(const MassField& field);

  MassKind kind() const { return kind_; }
  double epsilon() const { return epsilon_; }
  double constant_value() const { return constant_; }
  Complex coefficient(int j1, int j2) const;

 private:
  MassKind kind_ = MassKind::constant;
  double epsilon_ = 1.0;
  double constant_ = 0.0;
  std::shared_ptr<const MassField> field_;
};

// Cutoff range accepted by the assembler (dimension 2(2N+1)^2 <= 7442).
inline constexpr int kMinCutoff = 2;
inline constexpr int kMaxCutoff = 30;

// Theta-independent data of a family of fibers.
class FiberFamily {
 public:
  FiberFamily(const PeriodicMass& mass, int cutoff);

  int cutoff() const { return cutoff_; }
  int modes() const { return (2 * cutoff_ + 1) * (2 * cutoff_ + 1); }
  int dimension() const { return 2 * modes(); }
  double epsilon() const { return epsilon_; }
  MassKind kind() const { return kind_; }
  double constant_mass() const { return constant_; }
  // Mode-space coupling matrix c(n - n'); null for constant mass.
  const std::shared_ptr<const CMatrix>& coupling() const { return coupling_; }
  // Integer mode n for mode index.
  Eigen::Vector2i mode(int index) const;

 private:
  int cutoff_;
  double epsilon_;
  MassKind kind_;
  double constant_;
  std::shared_ptr<const CMatrix> coupling_;
};

// Truncated plane-wave matrix of -i sigma.grad + m sigma_3 on quasi-periodic
// functions with quasi-momentum theta. Basis index = 2*mode + spin; mode n
// carries wavevector theta + 2 pi n/eps.
struct FiberOperator {
  Vec2 theta = Vec2::Zero();
  int cutoff = 0;
  double epsilon = 1.0;
  MassKind mass_kind = MassKind::constant;
  double constant_mass = 0.0;
  std::shared_ptr<const CMatrix> coupling;
  std::vector<Vec2> wavevectors;

  int modes() const { return static_cast<int>(wavevectors.size()); }
  int dimension() const { return 2 * modes(); }
  CMatrix matrix() const;
  // Mode-space mass matrix (m I for constant mass).
  CMatrix mass_matrix() const;
};

FiberOperator make_fiber(const FiberFamily& family, const Vec2& theta);
FiberOperator assemble_fiber(const PeriodicMass& mass, const Vec2& theta, int cutoff);

// Exact eigenvalues of a constant-mass fiber: +-sqrt(|k|^2 + m^2), ascending.
RVector free_fiber_eigenvalues(const FiberOperator& fiber);

enum class ResolventMethod { automatic, dense, iterative };

// Largest dimension handled by the dense eigendecomposition route in automatic mode.
inline constexpr int kDenseResolventLimit = 800;

// Spectral norm of (A - i)^-1 - (B - i)^-1 for fibers at the same theta and cutoff.
double fiber_resolvent_diff(const FiberOperator& a, const FiberOperator& b,
                            ResolventMethod method = ResolventMethod::automatic);

// Spectral norm of (A - i)^-1 - (B - i)^-1 for Hermitian matrices, with both
// resolvents built from eigendecompositions.
double resolvent_difference_norm(const CMatrix& a, const CMatrix& b);

// Norm of (A - i)^-1 from the eigenvalues.
double fiber_resolvent_norm(const FiberOperator& a);

// Quasi-momentum grid over the Brillouin zone [-pi/eps, pi/eps)^2:
// theta_j = (j - (g-1)/2) 2 pi/(g eps).
std::vector<Vec2> theta_grid(double epsilon, int points_per_axis);
// Indices of grid points up to the symmetry theta -> -theta (first of each pair).
std::vector<int> symmetric_representatives(int points_per_axis);

struct SolverOptions {
  int cutoff = 12;
  int grid = 9;
  bool refine = true;
  bool truncation_check = true;
  bool use_symmetry = true;
  ResolventMethod method = ResolventMethod::automatic;
  int workers = 1;
};

struct ThetaValue {
  Vec2 theta;
  double value;
  bool refinement;
};

struct NrcResult {
  double value = 0.0;        // max over grid and refinement points
  double grid_max = 0.0;
  double refined_max = 0.0;  // max over refinement points only
  Vec2 theta_max = Vec2::Zero();
  int cutoff = 0;
  int grid = 0;
  double value_2N = 0.0;     // at theta_max with cutoff 2N
  double truncation_indicator = 0.0;
  std::vector<ThetaValue> points;
};

NrcResult nrc_estimate(const PeriodicMass& mass_eps, const PeriodicMass& mass_star,
                       const SolverOptions& options);

struct BandStructure {
  std::vector<Vec2> thetas;
  std::vector<RVector> eigenvalues;  // ascending, one vector per theta
  double gap_lower = 0.0;
  double gap_upper = 0.0;
  Vec2 theta_lower = Vec2::Zero();
  Vec2 theta_upper = Vec2::Zero();
  int cutoff = 0;
  int grid = 0;
  double gap_lower_2N = 0.0;
  double gap_upper_2N = 0.0;
  double truncation_indicator = 0.0;

  bool has_gap() const { return gap_lower < 0.0 && gap_upper > 0.0; }
};

BandStructure bands(const PeriodicMass& mass, const SolverOptions& options);

// max(|gap_lower + m|, |gap_upper - m|)/m^2; throws if there is no gap.
double hausdorff_gap_check(double gap_lower, double gap_upper, double m_star);
double hausdorff_gap_check(const BandStructure& bands_eps, double m_star);

}  // namespace dirachom
