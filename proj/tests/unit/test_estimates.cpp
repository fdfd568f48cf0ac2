#include <doctest.h>

#include <cmath>

#include "dirachom/estimates.hpp"
#include "dirachom/lattice.hpp"

using namespace dirachom;

namespace {

// Cell with eps = 1/4, d = 1/16, disk inclusion.
MassField reference_field(double m_star = 1.0) {
  return calibrate_mass(make_lattice(0.25, m_star, Shape::disk(1.0), DRule{0.25, 1.0}));
}

const ShapeConstants& coarse_constants() {
  static const ShapeConstants sc = [] {
    const LatticeConfig lattice = make_lattice(0.25, 1.0, Shape::disk(1.0), DRule{0.25, 1.0});
    return compute_shape_constants(lattice.shape, 1.0, md_max_for(lattice, {0.25}), ConstantsOptions{0.2, 3, 1});
  }();
  return sc;
}

// Exact integral of exp(i w x) over [a, b].
Complex exp_integral(double w, double a, double b) {
  if (w == 0.0) return b - a;
  return (std::exp(Complex(0.0, w * b)) - std::exp(Complex(0.0, w * a))) / Complex(0.0, w);
}

// Midpoint rule on the bounding square of a bump spinor (spectrally accurate for
// smooth compactly supported integrands).
template <class F>
double midpoint(const SpinorField& v, int n, F integrand) {
  const double r = v.radius();
  const double h = 2.0 * r / n;
  double sum = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Vec2 x = v.center() + Vec2(-r + (i + 0.5) * h, -r + (j + 0.5) * h);
      sum += integrand(v.jet(x));
    }
  return sum * h * h;
}

Spinor kinetic(const SpinorJet& j) {
  const Complex i(0.0, 1.0);
  return Spinor(-i * (j.dx(1) - i * j.dy(1)), -i * (j.dx(0) + i * j.dy(0)));
}

}  // namespace

TEST_CASE("mean values: constant, log on a circle, trig polynomial on the unit square") {
  const Resolution res;
  CHECK(mean_value(TestFunction::constant(2.5), Shape::ellipse(1.0, 0.4), res).value ==
        doctest::Approx(2.5).epsilon(1e-13));

  const Vec2 pole(0.1, -0.2);
  const MeanValue m = circle_mean(TestFunction::radial_log(pole), pole, 0.3, res);
  CHECK(m.value == doctest::Approx(std::log(0.3)).epsilon(1e-13));

  const double period = 0.7;
  const Vec2 origin(0.05, -0.1);
  const TestFunction f = TestFunction::trig_polynomial(period, 4, 11, origin);
  Complex exact = 0.0;
  for (int k1 = -4; k1 <= 4; ++k1)
    for (int k2 = -4; k2 <= 4; ++k2) {
      const double w1 = 2.0 * kPi * k1 / period;
      const double w2 = 2.0 * kPi * k2 / period;
      exact += f.coefficient(k1, k2) * exp_integral(w1, -0.5 - origin.x(), 0.5 - origin.x()) *
               exp_integral(w2, -0.5 - origin.y(), 0.5 - origin.y());
    }
  const MeanValue sq = mean_value(f, Shape::unit_square(), res);
  CHECK(sq.value == doctest::Approx(exact.real()).epsilon(1e-10));
}

TEST_CASE("test-function jets agree with central differences") {
  const TestFunction f = TestFunction::trig_polynomial(0.5, 5, 3, Vec2(0.2, 0.1));
  const double h = 1e-6;
  for (const Vec2& x : {Vec2(0.0, 0.0), Vec2(0.13, -0.41), Vec2(-0.3, 0.27)}) {
    const Eigen::Vector3d j = f.jet(x);
    CHECK(j(0) == doctest::Approx(f.value(x)).epsilon(1e-14));
    CHECK(j(1) == doctest::Approx((f.value(x + Vec2(h, 0)) - f.value(x - Vec2(h, 0))) / (2 * h)).epsilon(1e-6));
    CHECK(j(2) == doctest::Approx((f.value(x + Vec2(0, h)) - f.value(x - Vec2(0, h))) / (2 * h)).epsilon(1e-6));
  }
}

TEST_CASE("mean-value lemmas: constant, logarithmic extremal, seeded corpus") {
  const CellGeometry g = CellGeometry::from_field(reference_field());
  const EstimateConstants c = estimate_constants(coarse_constants());

  const CheckReport constant = validate_mean_lemmas(TestFunction::constant(3.0), g, c);
  CHECK(constant.violations() == 0);
  for (const CheckRow& row : constant.rows) {
    CHECK(std::abs(row.lhs) < 1e-20);
    CHECK(std::abs(row.rhs) < 1e-20);
  }

  const CheckReport log = validate_mean_lemmas(TestFunction::radial_log(g.pole), g, c);
  const auto rows = log.find("lemma3");
  REQUIRE(rows.size() == 1);
  const double expected = std::pow(std::log(4.0), 2);
  CHECK(rows[0]->lhs == doctest::Approx(expected).epsilon(1e-8));
  CHECK(rows[0]->rhs == doctest::Approx(expected).epsilon(1e-8));
  CHECK(rows[0]->pass);

  LemmaSuiteOptions o;
  o.functions = 6;
  o.seed = 5;
  const CheckReport suite = run_lemma_suite(g, c, o);
  CHECK(suite.checked() > 6 * 9);
  CHECK(suite.violations() == 0);
}

TEST_CASE("inclusion-volume lemma: zero and constant functions") {
  const CellGeometry g = CellGeometry::from_field(reference_field());
  const EstimateConstants c = estimate_constants(coarse_constants());
  const CheckReport zero = validate_lemma6(TestFunction::constant(0.0), g, c);
  REQUIRE(zero.rows.size() == 1);
  CHECK(zero.rows[0].lhs == 0.0);
  CHECK(zero.rows[0].pass);

  const double value = 1.7;
  const CheckReport constant = validate_lemma6(TestFunction::constant(value), g, c);
  REQUIRE(constant.rows.size() == 1);
  CHECK(constant.rows[0].lhs == doctest::Approx(value * value * kPi * g.d * g.d).epsilon(1e-12));
  const double ball = c.c2 * std::pow(g.d / g.epsilon, 2) * value * value * kPi * g.epsilon * g.epsilon;
  CHECK(constant.rows[0].rhs >= ball * (1 - 1e-12));
  CHECK(constant.rows[0].pass);
}

TEST_CASE("boundary identity: constant spinor, free case, overlapping spinors") {
  const CheckReport xi = validate_constant_spinor(Spinor(Complex(0.3, 0.4), Complex(-1.0, 0.2)),
                                                  Shape::ellipse(0.06, 0.03, Vec2(0.01, 0.0)));
  REQUIRE(xi.find("xi").size() == 1);
  CHECK(std::abs(xi.find("xi")[0]->lhs) <= 1e-10);
  CHECK(xi.violations() == 0);

  const CellPatch patch = make_patch(reference_field());
  const CheckReport free = validate_bcls(disjoint_spinor(patch, 4), patch, 4);
  REQUIRE(free.find("bcls.free").size() == 1);
  CHECK(free.violations() == 0);

  for (std::uint64_t s : {1u, 2u}) {
    const CheckReport r = validate_bcls(overlapping_spinor(patch, s), patch, s);
    REQUIRE(r.find("bcls").size() == 1);
    CHECK(r.violations() == 0);
  }
}

TEST_CASE("form difference: degenerate mass and the free volume term") {
  const CellPatch full = make_patch(calibrate_mass(full_cell_lattice(0.25, 1.0)));
  const SpinorField u = overlapping_spinor(full, 3);
  const SpinorField v = overlapping_spinor(full, 8);
  const Resolution fine = Resolution{}.doubled().doubled();
  const double scale = std::sqrt(spinor_norms(u, full).h1() * spinor_norms(v, full).h1());
  CHECK(std::abs(form_difference(u, v, full, fine)) <= 1e-11 * scale);

  // Away from the inclusions the form reduces to m_star (sigma3 v, v).
  const double m_star = 1.0;
  const CellPatch patch = make_patch(reference_field(m_star));
  const SpinorField w = disjoint_spinor(patch, 2);
  const double direct = midpoint(w, 800, [&](const SpinorJet& j) {
    return m_star * (std::norm(j.value(0)) - std::norm(j.value(1)));
  });
  const Complex s = form_difference(w, w, patch, fine);
  CHECK(s.real() == doctest::Approx(direct).epsilon(1e-8));
  CHECK(std::abs(s.imag()) <= 1e-12 * spinor_norms(w, patch).h1());
}

TEST_CASE("graph norms: limit identity, zero spinor") {
  const double m_star = 1.0;
  const CellPatch patch = make_patch(reference_field(m_star));
  const SpinorField w = disjoint_spinor(patch, 6);
  const SpinorNorms n = spinor_norms(w, patch);
  CHECK(n.dirac_limit == doctest::Approx(n.grad + m_star * m_star * n.l2).epsilon(1e-8));

  const double direct = midpoint(w, 800, [&](const SpinorJet& j) {
    const Spinor dv = kinetic(j) + m_star * Spinor(j.value(0), -j.value(1));
    return dv.squaredNorm();
  });
  CHECK(n.dirac_limit == doctest::Approx(direct).epsilon(1e-8));

  const SpinorNorms zero = spinor_norms(SpinorField::zero(), patch);
  CHECK(zero.l2 == 0.0);
  CHECK(zero.dirac_eps == 0.0);
}

TEST_CASE("graph bounds at small mass, and the infeasible alpha condition at unit mass") {
  const ShapeConstants& sc = coarse_constants();
  const double small = 1.0 / 256.0;
  const LatticeConfig lattice = make_lattice(0.25, small, Shape::disk(1.0), DRule{0.25, 1.0});
  ConstantInputs in = sc.inputs;
  in.m_star = small;
  in.md_max = md_max_for(lattice, {0.25});
  const EstimateConstants c = estimate_constants(in, assemble_constants(in));
  REQUIRE(c.c4.has_value());
  const CellPatch patch = make_patch(calibrate_mass(lattice));
  const CheckReport r = validate_graph_bounds(overlapping_spinor(patch, 1), overlapping_spinor(patch, 2), patch, c);
  CHECK(r.violations() == 0);

  const EstimateConstants unit = estimate_constants(sc);
  CHECK_FALSE(unit.c4.has_value());
  const CellPatch unit_patch = make_patch(reference_field());
  const CheckReport u = validate_graph_bounds(overlapping_spinor(unit_patch, 1), overlapping_spinor(unit_patch, 2),
                                              unit_patch, unit);
  REQUIRE(u.find("graph.precondition").size() == 1);
  CHECK_FALSE(u.find("graph.precondition")[0]->pass);
}

TEST_CASE("abstract scheme: identical operators and a diagonal 2x2 perturbation") {
  MatrixPair same;
  same.d = CMatrix(2, 2);
  same.d << 1.0, Complex(0.0, 0.5), Complex(0.0, -0.5), -2.0;
  same.d_tilde = same.d;
  const SchemeResult r0 = abstract_scheme(same);
  CHECK(r0.c == 0.0);
  CHECK(r0.difference <= 1e-15);
  CHECK(r0.pass);

  const double l1 = 0.7, l2 = -1.3, delta = 0.05, a = 2.0, b = 3.0;
  MatrixPair pair;
  pair.d = CMatrix::Zero(2, 2);
  pair.d(0, 0) = l1;
  pair.d(1, 1) = l2;
  pair.d_tilde = pair.d;
  pair.d_tilde(0, 0) += delta;
  pair.a = a;
  pair.b = b;
  const SchemeResult r = abstract_scheme(pair);
  const Complex i(0.0, 1.0);
  const double difference = std::abs(1.0 / (l1 + delta - i) - 1.0 / (l1 - i));
  const double c = delta / (std::sqrt(b + (l1 + delta) * (l1 + delta)) * std::sqrt(a + l1 * l1));
  CHECK(r.difference == doctest::Approx(difference).epsilon(1e-12));
  CHECK(r.c == doctest::Approx(c).epsilon(1e-12));
  CHECK(r.bound == doctest::Approx(c * std::sqrt((a + 1) * (b + 1))).epsilon(1e-12));
  CHECK(r.pass);

  const CheckReport corpus = abstract_scheme_check(200, 3, 12);
  CHECK(corpus.violations() == 0);
  CHECK(corpus.find("scheme.tight").size() == 50);
}

TEST_CASE("malformed inputs are rejected") {
  MatrixPair bad;
  bad.d = CMatrix::Zero(2, 2);
  bad.d(0, 1) = 1.0;
  bad.d_tilde = CMatrix::Zero(2, 2);
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  const CellGeometry g = CellGeometry::from_field(reference_field());
  LemmaSuiteOptions o;
  o.functions = 0;
  CHECK_THROWS_AS(run_lemma_suite(g, estimate_constants(coarse_constants()), o), std::invalid_argument);
}
