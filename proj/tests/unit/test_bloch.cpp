#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "dirachom/bloch.hpp"

using namespace dirachom;

namespace {

PeriodicMass disk_mass(double eps, double m_star, double ratio, Vec2 offset = Vec2::Zero()) {
  return PeriodicMass::from_field(
      calibrate_mass(make_lattice(eps, m_star, Shape::disk(1.0), DRule{ratio, 1.0}, offset)));
}

RVector dense_eigenvalues(const CMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

}  // namespace

TEST_CASE("free fiber eigenvalues are the symbol values") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    const double eps = 0.25 + 0.5 * (u(rng) + 1) / 2;
    const Vec2 theta = M_PI / eps * Vec2(u(rng), u(rng));
    const FiberOperator f = assemble_fiber(PeriodicMass::constant(eps, 1.3), theta, 4);
    const RVector exact = free_fiber_eigenvalues(f);
    const RVector numeric = dense_eigenvalues(f.matrix());
    for (Eigen::Index i = 0; i < exact.size(); ++i)
      CHECK(std::abs(numeric(i) - exact(i)) <= 1e-10 * std::abs(exact(i)));
  }
  const RVector at_zero = free_fiber_eigenvalues(assemble_fiber(PeriodicMass::constant(0.5, 1.0), Vec2::Zero(), 3));
  const Eigen::Index half = at_zero.size() / 2;
  CHECK(at_zero(half - 1) == doctest::Approx(-1.0));
  CHECK(at_zero(half) == doctest::Approx(1.0));
}

TEST_CASE("full-cell mass gives the constant-mass fiber") {
  const double eps = 0.25;
  const PeriodicMass full = PeriodicMass::from_field(calibrate_mass(full_cell_lattice(eps, 1.0)));
  const Vec2 theta(3.0, -5.0);
  const CMatrix a = assemble_fiber(full, theta, 5).matrix();
  const CMatrix b = assemble_fiber(PeriodicMass::constant(eps, 1.0), theta, 5).matrix();
  CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("fiber matrices are Hermitian") {
  const FiberOperator f = assemble_fiber(disk_mass(0.25, 1.0, 0.25, Vec2(0.01, 0.02)), Vec2(1.0, 2.0), 6);
  const CMatrix h = f.matrix();
  CHECK((h - h.adjoint()).cwiseAbs().maxCoeff() <= 1e-13);
  CHECK(f.dimension() == 2 * 13 * 13);
  CHECK_THROWS_AS(assemble_fiber(PeriodicMass::constant(1.0, 1.0), Vec2::Zero(), kMaxCutoff + 1), std::invalid_argument);
  CHECK_THROWS_AS(assemble_fiber(PeriodicMass::constant(1.0, 1.0), Vec2::Zero(), 1), std::invalid_argument);
}

TEST_CASE("spectral symmetry") {
  const PeriodicMass m = disk_mass(0.5, 1.0, 0.25, Vec2(0.03, -0.01));
  const FiberFamily fam(m, 5);
  const Vec2 theta(1.3, -2.1);
  const RVector plus = dense_eigenvalues(make_fiber(fam, theta).matrix());
  const RVector minus = dense_eigenvalues(make_fiber(fam, -theta).matrix());
  CHECK((plus + minus.reverse()).cwiseAbs().maxCoeff() <= 1e-10);
  // Centered disk: real coefficients and a spectrum symmetric at each theta.
  const PeriodicMass centered = disk_mass(0.5, 1.0, 0.25);
  CHECK(std::abs(centered.coefficient(2, 1).imag()) < 1e-15);
  const RVector ev = dense_eigenvalues(assemble_fiber(centered, theta, 5).matrix());
  CHECK((ev + ev.reverse()).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("resolvent difference of hand-built matrices") {
  CMatrix a(4, 4), b(4, 4);
  a << 1.0, Complex(0.5, 0.2), 0.0, Complex(0.0, -1.0),
       Complex(0.5, -0.2), -2.0, Complex(0.3, 0.0), 0.0,
       0.0, Complex(0.3, 0.0), 0.5, Complex(1.0, 1.0),
       Complex(0.0, 1.0), 0.0, Complex(1.0, -1.0), 3.0;
  b = a;
  b(0, 0) += 0.7;
  b(2, 3) += Complex(0.1, 0.4);
  b(3, 2) += Complex(0.1, -0.4);
  const CMatrix id = CMatrix::Identity(4, 4);
  const CMatrix ra = (a - Complex(0.0, 1.0) * id).inverse();
  const CMatrix rb = (b - Complex(0.0, 1.0) * id).inverse();
  Eigen::JacobiSVD<CMatrix> svd(ra - rb);
  CHECK(resolvent_difference_norm(a, b) == doctest::Approx(svd.singularValues()(0)).epsilon(1e-12));
  CHECK(resolvent_difference_norm(a, a) < 1e-15);
}

TEST_CASE("fiber resolvent difference routes agree and obey the norm bounds") {
  const double eps = 0.25;
  const FiberFamily fe(disk_mass(eps, 1.0, 0.25), 6), fs(PeriodicMass::constant(eps, 1.0), 6);
  for (const Vec2& theta : {Vec2(0.0, 0.0), Vec2(4.0, -2.0), Vec2(12.0, 12.0)}) {
    const FiberOperator a = make_fiber(fe, theta), b = make_fiber(fs, theta);
    const double dense = fiber_resolvent_diff(a, b, ResolventMethod::dense);
    const double iter = fiber_resolvent_diff(a, b, ResolventMethod::iterative);
    CHECK(iter == doctest::Approx(dense).epsilon(1e-8));
    CHECK(dense <= 2.0);
    CHECK(fiber_resolvent_norm(a) <= 1.0);
    CHECK(fiber_resolvent_norm(b) <= 1.0);
    CHECK(fiber_resolvent_diff(a, a) == 0.0);
  }
  CHECK_THROWS_AS(fiber_resolvent_diff(make_fiber(fe, Vec2(1, 0)), make_fiber(fs, Vec2(0, 1))), std::invalid_argument);
  const FiberFamily other(PeriodicMass::constant(eps, 1.0), 5);
  CHECK_THROWS_AS(fiber_resolvent_diff(make_fiber(fe, Vec2::Zero()), make_fiber(other, Vec2::Zero())),
                  std::invalid_argument);
}

TEST_CASE("theta grid") {
  const auto g = theta_grid(0.5, 9);
  CHECK(g.size() == 81);
  CHECK(g[40].norm() == 0.0);
  for (const Vec2& t : g) CHECK(t.cwiseAbs().maxCoeff() < M_PI / 0.5);
  const auto reps = symmetric_representatives(9);
  CHECK(reps.size() == 41);
}

TEST_CASE("nrc estimate") {
  SolverOptions opt;
  opt.cutoff = 4;
  opt.grid = 3;
  const double eps = 0.5;
  const PeriodicMass star = PeriodicMass::constant(eps, 1.0);
  const PeriodicMass full = PeriodicMass::from_field(calibrate_mass(full_cell_lattice(eps, 1.0)));
  CHECK(nrc_estimate(full, star, opt).value <= 1e-10);

  const NrcResult r = nrc_estimate(disk_mass(eps, 1.0, 0.25), star, opt);
  CHECK(r.value > 0.0);
  CHECK(r.value <= 2.0);
  CHECK(r.value >= r.grid_max);
  CHECK(r.points.size() == 9 + 8);
  CHECK(std::abs(r.value_2N - r.value) <= r.truncation_indicator * r.value * (1 + 1e-12));

  // Symmetry reduction does not change the grid values.
  SolverOptions full_grid = opt;
  full_grid.use_symmetry = false;
  const NrcResult s = nrc_estimate(disk_mass(eps, 1.0, 0.25), star, full_grid);
  CHECK(s.grid_max == doctest::Approx(r.grid_max).epsilon(1e-9));

  // Translating the inclusion is a unitary change of the operator.
  SolverOptions fine = opt;
  fine.cutoff = 8;
  fine.truncation_check = false;
  const double centered = nrc_estimate(disk_mass(eps, 1.0, 0.25), star, fine).grid_max;
  const double shifted = nrc_estimate(disk_mass(eps, 1.0, 0.25, Vec2(0.05, -0.03)), star, fine).grid_max;
  CHECK(shifted == doctest::Approx(centered).epsilon(1e-8));
}

TEST_CASE("parallel nrc is deterministic") {
  SolverOptions opt;
  opt.cutoff = 3;
  opt.grid = 5;
  opt.truncation_check = false;
  const PeriodicMass a = disk_mass(0.5, 1.0, 0.25), b = PeriodicMass::constant(0.5, 1.0);
  const NrcResult serial = nrc_estimate(a, b, opt);
  opt.workers = 3;
  const NrcResult parallel = nrc_estimate(a, b, opt);
  CHECK(serial.value == parallel.value);
  for (size_t i = 0; i < serial.points.size(); ++i) CHECK(serial.points[i].value == parallel.points[i].value);
}

TEST_CASE("bands and gaps") {
  SolverOptions opt;
  opt.cutoff = 3;
  opt.grid = 5;
  const BandStructure c = bands(PeriodicMass::constant(0.5, 1.0), opt);
  CHECK(c.gap_lower == doctest::Approx(-1.0).epsilon(1e-10));
  CHECK(c.gap_upper == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(hausdorff_gap_check(c, 1.0) <= 1e-10);

  const BandStructure zero = bands(PeriodicMass::constant(0.5, 0.0), opt);
  CHECK_FALSE(zero.has_gap());
  CHECK(std::abs(zero.gap_lower) < 1e-12);
  CHECK_THROWS_AS(hausdorff_gap_check(zero, 1.0), std::domain_error);

  const BandStructure d = bands(disk_mass(0.5, 1.0, 0.25), opt);
  CHECK(d.has_gap());
  for (size_t i = 0; i < d.thetas.size(); ++i) {
    const RVector& ev = d.eigenvalues[i];
    CHECK(std::is_sorted(ev.data(), ev.data() + ev.size()));
  }
  CHECK(d.gap_lower == doctest::Approx(-d.gap_upper).epsilon(1e-10));

  CHECK(hausdorff_gap_check(-0.9, 1.1, 1.0) == doctest::Approx(0.1));
}
