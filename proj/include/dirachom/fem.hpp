#pragma once

#include <Eigen/Sparse>

#include "dirachom/mesh.hpp"

namespace dirachom {

using SMatrix = Eigen::SparseMatrix<double>;

// P1 matrices: stiffness, consistent volume mass, boundary mass.
struct FemForms {
  SMatrix stiffness;
  SMatrix mass;
  SMatrix boundary_mass;
};

// automatic: dense LAPACK below kDenseFemLimit unknowns, sparse Lanczos above.
enum class FemEigenSolver { automatic, dense, sparse };
inline constexpr int kDenseFemLimit = 300;

FemForms assemble_forms(const Mesh& mesh);

// Single-mesh eigenvalue computations.
double neumann_lambda(const Mesh& mesh);
double steklov_lambda(const Mesh& mesh);
double robin_lambda(const Mesh& mesh, double gamma);
double trace_constant(const Mesh& mesh);

// Same quantities from already-assembled forms.
double neumann_lambda(const FemForms& forms, FemEigenSolver solver = FemEigenSolver::automatic);
double steklov_lambda(const FemForms& forms, FemEigenSolver solver = FemEigenSolver::automatic);
double robin_lambda(const FemForms& forms, double gamma, FemEigenSolver solver = FemEigenSolver::automatic);
double trace_constant(const FemForms& forms, FemEigenSolver solver = FemEigenSolver::automatic);

// Quadratic forms of a nodal vector.
struct FunctionNorms {
  double l2_sq;        // ||f||^2 over the domain
  double grad_sq;      // ||grad f||^2
  double boundary_sq;  // ||f||^2 over the boundary
  double mean;         // volume mean
};
FunctionNorms function_norms(const FemForms& forms, const RVector& f);

}  // namespace dirachom
