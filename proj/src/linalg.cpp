#include "dirachom/linalg.hpp"

#include <algorithm>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include <arpack/arpack.hpp>

#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

namespace dirachom::linalg {
namespace {

void check(lapack_int info, const char* routine) {
  if (info != 0) throw LinalgError(std::string(routine) + " failed with info " + std::to_string(info));
}

void require_square(const CMatrix& a, const char* what) {
  if (a.rows() != a.cols()) throw std::invalid_argument(std::string(what) + ": matrix not square");
}

}  // namespace

RVector hermitian_eigenvalues(CMatrix a) {
  require_square(a, "hermitian_eigenvalues");
  const lapack_int n = static_cast<lapack_int>(a.rows());
  RVector w(n);
  if (n == 0) return w;
  check(LAPACKE_zheevd(LAPACK_COL_MAJOR, 'N', 'U', n, a.data(), n, w.data()), "zheevd");
  return w;
}

HermitianEigen hermitian_eigen(CMatrix a) {
  require_square(a, "hermitian_eigen");
  const lapack_int n = static_cast<lapack_int>(a.rows());
  RVector w(n);
  if (n > 0) check(LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'U', n, a.data(), n, w.data()), "zheevd");
  return {w, std::move(a)};
}

RVector hermitian_eigenvalues_index(CMatrix a, int first, int last) {
  require_square(a, "hermitian_eigenvalues_index");
  const lapack_int n = static_cast<lapack_int>(a.rows());
  if (first < 1 || last < first || last > n) throw std::invalid_argument("eigenvalue index range invalid");
  RVector w(n);
  lapack_int found = 0;
  std::vector<lapack_int> isuppz(2 * static_cast<size_t>(n));
  Complex dummy;
  check(LAPACKE_zheevr(LAPACK_COL_MAJOR, 'N', 'I', 'U', n, a.data(), n, 0.0, 0.0, first, last, 0.0,
                       &found, w.data(), &dummy, 1, isuppz.data()),
        "zheevr");
  return w.head(found);
}

RVector singular_values(CMatrix a) {
  const lapack_int m = static_cast<lapack_int>(a.rows());
  const lapack_int n = static_cast<lapack_int>(a.cols());
  RVector s(std::min(m, n));
  if (s.size() == 0) return s;
  Complex dummy;
  check(LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'N', m, n, a.data(), m, s.data(), &dummy, 1, &dummy, 1),
        "zgesdd");
  return s;
}

ComplexLU::ComplexLU(CMatrix a) : lu_(std::move(a)) {
  require_square(lu_, "ComplexLU");
  const lapack_int n = static_cast<lapack_int>(lu_.rows());
  pivots_.resize(n);
  check(LAPACKE_zgetrf(LAPACK_COL_MAJOR, n, n, lu_.data(), n, pivots_.data()), "zgetrf");
}

CVector ComplexLU::solve(const CVector& b) const {
  CVector x = b;
  const lapack_int n = size();
  check(LAPACKE_zgetrs(LAPACK_COL_MAJOR, 'N', n, 1, lu_.data(), n, pivots_.data(), x.data(), n),
        "zgetrs");
  return x;
}

CVector ComplexLU::solve_adjoint(const CVector& b) const {
  CVector x = b;
  const lapack_int n = size();
  check(LAPACKE_zgetrs(LAPACK_COL_MAJOR, 'C', n, 1, lu_.data(), n, pivots_.data(), x.data(), n),
        "zgetrs");
  return x;
}

RVector symmetric_generalized_eigenvalues(RMatrix a, RMatrix b) {
  if (a.rows() != a.cols() || b.rows() != a.rows() || b.cols() != a.cols())
    throw std::invalid_argument("symmetric_generalized_eigenvalues: shape mismatch");
  const lapack_int n = static_cast<lapack_int>(a.rows());
  RVector w(n);
  if (n == 0) return w;
  check(LAPACKE_dsygvd(LAPACK_COL_MAJOR, 1, 'N', 'U', n, a.data(), n, b.data(), n, w.data()),
        "dsygvd");
  return w;
}

RVector pencil_eigenvalues(const PencilProblem& p) {
  const int n = p.size;
  if (p.count < 1 || p.count >= n) throw std::invalid_argument("pencil_eigenvalues: need 1 <= count < size");
  if (p.start.size() != n) throw std::invalid_argument("pencil_eigenvalues: start vector size");
  const bool shift_invert = p.mode == PencilProblem::Mode::shift_invert;
  const int ncv = std::min(n, std::max(2 * p.count + 1, 20));
  const int lworkl = ncv * (ncv + 8);
  // Shift-invert maps the eigenvalues nearest the shift to the largest magnitudes.
  const arpack::which ritz = shift_invert ? arpack::which::largest_magnitude
                             : p.largest  ? arpack::which::largest_algebraic
                                          : arpack::which::smallest_algebraic;

  RVector resid = p.start;
  std::vector<double> v(static_cast<size_t>(n) * ncv), workd(3 * static_cast<size_t>(n)), workl(lworkl);
  std::vector<a_int> select(ncv);
  a_int iparam[11] = {1, 0, 3000, 1, 0, 0, shift_invert ? 3 : 2, 0, 0, 0, 0};
  a_int ipntr[14] = {};
  a_int ido = 0;
  a_int info = 1;
  const double tol = 0.0;

  // ARPACK keeps internal state in static storage.
  static std::mutex arpack_mutex;
  std::lock_guard<std::mutex> lock(arpack_mutex);
  auto at = [&](int k) { return Eigen::Map<RVector>(workd.data() + ipntr[k] - 1, n); };
  while (true) {
    arpack::saupd(ido, arpack::bmat::generalized, n, ritz, p.count, tol, resid.data(), ncv, v.data(), n, iparam,
                  ipntr, workd.data(), workl.data(), lworkl, info);
    if (ido == -1 || ido == 1) {
      auto x = at(0);
      auto y = at(1);
      if (shift_invert) {
        y = ido == 1 ? p.solve(at(2)) : p.solve(p.apply_m(x));
      } else {
        y = p.solve(x);
        x = p.apply_m(y);
      }
    } else if (ido == 2) {
      at(1) = p.apply_m(at(0));
    } else {
      break;
    }
  }
  if (info < 0) throw LinalgError("dsaupd failed with info " + std::to_string(info));
  if (iparam[4] < p.count) throw LinalgError("dsaupd: only " + std::to_string(iparam[4]) + " eigenvalues converged");

  RVector d(p.count);
  std::vector<double> z(static_cast<size_t>(n) * p.count);
  a_int einfo = 0;
  arpack::seupd(false, arpack::howmny::ritz_vectors, select.data(), d.data(), z.data(), n, p.shift,
                arpack::bmat::generalized, n, ritz, p.count, tol, resid.data(), ncv, v.data(), n, iparam, ipntr,
                workd.data(), workl.data(), lworkl, einfo);
  if (einfo != 0) throw LinalgError("dseupd failed with info " + std::to_string(einfo));
  std::sort(d.begin(), d.end());
  return d;
}

LanczosResult largest_singular_value(const std::function<CVector(const CVector&)>& apply,
                                     const std::function<CVector(const CVector&)>& apply_adjoint,
                                     int n, const LanczosOptions& options) {
  if (n <= 0) return {0.0, 0, 0.0};
  const int kmax = std::min(n, options.max_iterations);
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal;
  CVector v(n);
  for (int i = 0; i < n; ++i) v[i] = Complex(normal(rng), normal(rng));
  v.normalize();

  CMatrix V(n, kmax + 1), U(n, kmax);
  std::vector<double> alpha, beta;
  V.col(0) = v;
  CVector u = apply(v);
  double sigma = 0.0;
  double residual = 0.0;
  for (int j = 0; j < kmax; ++j) {
    // Left vector: orthogonalize twice against previous U columns.
    for (int pass = 0; pass < 2 && j > 0; ++pass) {
      u -= U.leftCols(j) * (U.leftCols(j).adjoint() * u);
    }
    const double a = u.norm();
    alpha.push_back(a);
    if (a == 0.0) {
      // Operator annihilates the Krylov space so far.
      if (j == 0) return {0.0, 1, 0.0};
      break;
    }
    U.col(j) = u / a;
    CVector w = apply_adjoint(U.col(j));
    for (int pass = 0; pass < 2; ++pass) {
      w -= V.leftCols(j + 1) * (V.leftCols(j + 1).adjoint() * w);
    }
    const double b = w.norm();
    beta.push_back(b);

    const int k = j + 1;
    RMatrix B = RMatrix::Zero(k, k);
    for (int i = 0; i < k; ++i) {
      B(i, i) = alpha[i];
      if (i + 1 < k) B(i, i + 1) = beta[i];
    }
    Eigen::JacobiSVD<RMatrix> svd(B, Eigen::ComputeFullU);
    sigma = svd.singularValues()(0);
    residual = b * std::abs(svd.matrixU()(k - 1, 0));
    if (residual <= options.tolerance * sigma || b == 0.0 || k == n) {
      return {sigma, k, residual};
    }
    V.col(j + 1) = w / b;
    if (j + 1 < kmax) u = apply(V.col(j + 1)) - b * U.col(j);
  }
  return {sigma, static_cast<int>(alpha.size()), residual};
}

}  // namespace dirachom::linalg
