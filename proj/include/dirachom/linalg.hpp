#pragma once

#include <functional>
#include <stdexcept>

#include "dirachom/types.hpp"

namespace dirachom::linalg {

class LinalgError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// All eigenvalues of a Hermitian matrix, ascending.
RVector hermitian_eigenvalues(CMatrix a);

struct HermitianEigen {
  RVector values;
  CMatrix vectors;
};
HermitianEigen hermitian_eigen(CMatrix a);

// Eigenvalues with 1-based indices first..last, ascending.
RVector hermitian_eigenvalues_index(CMatrix a, int first, int last);

// Singular values, descending.
RVector singular_values(CMatrix a);

// Dense LU factorization of a square complex matrix.
class ComplexLU {
 public:
  explicit ComplexLU(CMatrix a);
  int size() const { return static_cast<int>(lu_.rows()); }
  CVector solve(const CVector& b) const;
  // Solves A^H x = b.
  CVector solve_adjoint(const CVector& b) const;

 private:
  CMatrix lu_;
  std::vector<int> pivots_;
};

// Eigenvalues of the symmetric-definite pencil (a, b), ascending.
RVector symmetric_generalized_eigenvalues(RMatrix a, RMatrix b);

using VectorMap = std::function<RVector(const RVector&)>;

// A few eigenvalues of a symmetric pencil A x = lambda M x by implicitly
// restarted Lanczos (ARPACK reverse communication), ascending.
//   inverse mode: solve(x) = M^-1 A x, eigenvalues of the requested end
//   shift_invert: solve(x) = (A - shift M)^-1 x, eigenvalues nearest the shift
// apply_m(x) = M x. The start vector fixes the Krylov space.
struct PencilProblem {
  enum class Mode { inverse, shift_invert };
  Mode mode = Mode::shift_invert;
  int size = 0;
  int count = 1;
  bool largest = true;  // inverse mode only
  double shift = 0.0;
  VectorMap solve;
  VectorMap apply_m;
  RVector start;
};
RVector pencil_eigenvalues(const PencilProblem& problem);

struct LanczosOptions {
  double tolerance = 1e-10;
  int max_iterations = 300;
  unsigned long long seed = 0x5eed;
};

struct LanczosResult {
  double value;
  int iterations;
  double residual;
};

// Largest singular value of an implicit n x n operator by Golub-Kahan-Lanczos
// bidiagonalization with full reorthogonalization.
LanczosResult largest_singular_value(const std::function<CVector(const CVector&)>& apply,
                                     const std::function<CVector(const CVector&)>& apply_adjoint,
                                     int n, const LanczosOptions& options = {});

}  // namespace dirachom::linalg
