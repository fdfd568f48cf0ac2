#include "dirachom/fem.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "dirachom/linalg.hpp"

namespace dirachom {
namespace {

// Matrices restricted to the volume-mean-zero subspace via the Householder
// reflector that maps the constraint vector M*1 to a multiple of e1.
struct MeanZeroBasis {
  RVector v;
  double vv;

  explicit MeanZeroBasis(const RMatrix& mass) {
    const RVector c = mass * RVector::Ones(mass.rows());
    v = c;
    v(0) += (c(0) >= 0.0 ? 1.0 : -1.0) * c.norm();
    vv = v.squaredNorm();
  }

  // (H A H) with the first row and column removed, H = I - 2 v v^T / vv.
  RMatrix restrict(const RMatrix& a) const {
    const RVector av = a * v;
    const double vav = v.dot(av);
    RMatrix r = a;
    const double s = 2.0 / vv;
    r.noalias() -= s * av * v.transpose();
    r.noalias() -= s * v * av.transpose();
    r.noalias() += (s * s * vav) * v * v.transpose();
    const Eigen::Index n = a.rows() - 1;
    RMatrix out = r.bottomRightCorner(n, n);
    return 0.5 * (out + out.transpose());
  }
};

bool use_dense(const FemForms& f, FemEigenSolver solver) {
  if (solver == FemEigenSolver::automatic) return f.mass.rows() <= kDenseFemLimit;
  return solver == FemEigenSolver::dense;
}

RVector start_vector(Eigen::Index n) {
  std::mt19937_64 rng(0x6d657368);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  RVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = 1.0 + 0.5 * u(rng);
  return v;
}

SMatrix shifted(const SMatrix& a, const SMatrix& m, double shift) {
  SMatrix s = a - shift * m;
  s.makeCompressed();
  return s;
}

using Cholesky = Eigen::SimplicialLDLT<SMatrix>;

// Factors a - shift m, moving the shift down until the matrix is positive definite.
double positive_shift(const SMatrix& a, const SMatrix& m, double shift, Cholesky& factor) {
  for (int attempt = 0; attempt < 60; ++attempt) {
    factor.compute(shifted(a, m, shift));
    if (factor.info() == Eigen::Success && factor.vectorD().minCoeff() > 0.0) return shift;
    shift = 2.0 * shift - 1.0;
  }
  throw linalg::LinalgError("no positive definite shift found");
}

// Eigenvalues nearest below-spectrum shift of (a, m), ascending.
RVector lowest_sparse(const SMatrix& a, const SMatrix& m, double shift, int count) {
  Cholesky factor;
  linalg::PencilProblem p;
  p.shift = positive_shift(a, m, shift, factor);
  p.mode = linalg::PencilProblem::Mode::shift_invert;
  p.size = static_cast<int>(a.rows());
  p.count = count;
  p.solve = [&](const RVector& x) -> RVector { return factor.solve(x); };
  p.apply_m = [&](const RVector& x) -> RVector { return m * x; };
  p.start = start_vector(a.rows());
  return linalg::pencil_eigenvalues(p);
}

}  // namespace

FemForms assemble_forms(const Mesh& mesh) {
  const Eigen::Index n = static_cast<Eigen::Index>(mesh.vertices.size());
  std::vector<Eigen::Triplet<double>> k, m, b;
  k.reserve(9 * mesh.triangles.size());
  m.reserve(9 * mesh.triangles.size());
  b.reserve(4 * mesh.boundary_edges.size());
  for (const auto& t : mesh.triangles) {
    const Vec2& p0 = mesh.vertices[t[0]];
    const Vec2& p1 = mesh.vertices[t[1]];
    const Vec2& p2 = mesh.vertices[t[2]];
    const double det = (p1 - p0).x() * (p2 - p0).y() - (p1 - p0).y() * (p2 - p0).x();
    const double area = 0.5 * det;
    // Gradients of barycentric coordinates.
    std::array<Vec2, 3> g;
    g[0] = Vec2(p1.y() - p2.y(), p2.x() - p1.x()) / det;
    g[1] = Vec2(p2.y() - p0.y(), p0.x() - p2.x()) / det;
    g[2] = Vec2(p0.y() - p1.y(), p1.x() - p0.x()) / det;
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        k.emplace_back(t[a], t[b], area * g[a].dot(g[b]));
        m.emplace_back(t[a], t[b], area * (a == b ? 2.0 : 1.0) / 12.0);
      }
    }
  }
  for (const auto& e : mesh.boundary_edges) {
    const double len = (mesh.vertices[e[0]] - mesh.vertices[e[1]]).norm();
    b.emplace_back(e[0], e[0], len / 3.0);
    b.emplace_back(e[1], e[1], len / 3.0);
    b.emplace_back(e[0], e[1], len / 6.0);
    b.emplace_back(e[1], e[0], len / 6.0);
  }
  FemForms f{SMatrix(n, n), SMatrix(n, n), SMatrix(n, n)};
  f.stiffness.setFromTriplets(k.begin(), k.end());
  f.mass.setFromTriplets(m.begin(), m.end());
  f.boundary_mass.setFromTriplets(b.begin(), b.end());
  return f;
}

double neumann_lambda(const FemForms& forms, FemEigenSolver solver) {
  if (use_dense(forms, solver)) {
    const RMatrix mass = forms.mass;
    const MeanZeroBasis basis(mass);
    return linalg::symmetric_generalized_eigenvalues(basis.restrict(forms.stiffness), basis.restrict(mass))(0);
  }
  // The constants are the zero mode; the next eigenvalue is the mean-zero one.
  return lowest_sparse(forms.stiffness, forms.mass, -1.0, 3)(1);
}

double steklov_lambda(const FemForms& forms, FemEigenSolver solver) {
  if (use_dense(forms, solver)) {
    const RMatrix mass = forms.mass;
    const MeanZeroBasis basis(mass);
    const RVector w = linalg::symmetric_generalized_eigenvalues(basis.restrict(forms.boundary_mass),
                                                                basis.restrict(forms.stiffness));
    return 1.0 / w(w.size() - 1);
  }
  // Largest mu with B u = mu K u + t c and c.u = 0, c = M 1, through the
  // bordered system [K c; c^T 0].
  const Eigen::Index n = forms.mass.rows();
  const RVector c = forms.mass * RVector::Ones(n);
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(forms.stiffness.nonZeros() + 2 * n);
  for (Eigen::Index j = 0; j < forms.stiffness.outerSize(); ++j)
    for (SMatrix::InnerIterator it(forms.stiffness, j); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  for (Eigen::Index i = 0; i < n; ++i) {
    t.emplace_back(i, n, c(i));
    t.emplace_back(n, i, c(i));
  }
  SMatrix bordered(n + 1, n + 1);
  bordered.setFromTriplets(t.begin(), t.end());
  bordered.makeCompressed();
  Eigen::SparseLU<SMatrix> lu;
  lu.compute(bordered);
  if (lu.info() != Eigen::Success) throw linalg::LinalgError("bordered Steklov system: " + lu.lastErrorMessage());

  linalg::PencilProblem p;
  p.mode = linalg::PencilProblem::Mode::inverse;
  p.size = static_cast<int>(n);
  p.count = 2;
  p.largest = true;
  p.solve = [&](const RVector& x) -> RVector {
    RVector rhs = RVector::Zero(n + 1);
    rhs.head(n) = forms.boundary_mass * x;
    return lu.solve(rhs).head(n);
  };
  p.apply_m = [&](const RVector& x) -> RVector { return forms.stiffness * x; };
  RVector start = start_vector(n);
  start -= (c.dot(start) / c.sum()) * RVector::Ones(n);
  p.start = start;
  const RVector mu = linalg::pencil_eigenvalues(p);
  return 1.0 / mu(mu.size() - 1);
}

double robin_lambda(const FemForms& forms, double gamma, FemEigenSolver solver) {
  const SMatrix a = forms.stiffness + gamma * forms.boundary_mass;
  if (use_dense(forms, solver)) return linalg::symmetric_generalized_eigenvalues(RMatrix(a), RMatrix(forms.mass))(0);
  // The Rayleigh quotient of the constants bounds the lowest eigenvalue from above.
  const RVector ones = RVector::Ones(a.rows());
  const double constant_quotient = ones.dot(a * ones) / ones.dot(forms.mass * ones);
  return lowest_sparse(a, forms.mass, std::min(0.0, constant_quotient) - 1.0, 2)(0);
}

double trace_constant(const FemForms& forms, FemEigenSolver solver) {
  const SMatrix h1 = forms.stiffness + forms.mass;
  if (use_dense(forms, solver)) {
    const RVector w = linalg::symmetric_generalized_eigenvalues(RMatrix(forms.boundary_mass), RMatrix(h1));
    return std::sqrt(w(w.size() - 1));
  }
  Cholesky factor(h1);
  if (factor.info() != Eigen::Success) throw linalg::LinalgError("H1 Gram matrix factorization failed");
  linalg::PencilProblem p;
  p.mode = linalg::PencilProblem::Mode::inverse;
  p.size = static_cast<int>(h1.rows());
  p.count = 2;
  p.largest = true;
  p.solve = [&](const RVector& x) -> RVector { return factor.solve(forms.boundary_mass * x); };
  p.apply_m = [&](const RVector& x) -> RVector { return h1 * x; };
  p.start = start_vector(h1.rows());
  const RVector mu = linalg::pencil_eigenvalues(p);
  return std::sqrt(mu(mu.size() - 1));
}

double neumann_lambda(const Mesh& mesh) { return neumann_lambda(assemble_forms(mesh)); }
double steklov_lambda(const Mesh& mesh) { return steklov_lambda(assemble_forms(mesh)); }
double robin_lambda(const Mesh& mesh, double gamma) { return robin_lambda(assemble_forms(mesh), gamma); }
double trace_constant(const Mesh& mesh) { return trace_constant(assemble_forms(mesh)); }

FunctionNorms function_norms(const FemForms& forms, const RVector& f) {
  const RVector ones = RVector::Ones(f.size());
  const double vol = ones.dot(forms.mass * ones);
  return {f.dot(forms.mass * f), f.dot(forms.stiffness * f), f.dot(forms.boundary_mass * f),
          ones.dot(forms.mass * f) / vol};
}

}  // namespace dirachom
