#include <doctest.h>

#include <cmath>

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/bessel_prime.hpp>
#include <boost/math/tools/roots.hpp>

#include "dirachom/shape_constants.hpp"

using namespace dirachom;

namespace {

template <class F>
double root(F f, double lo, double hi) {
  boost::uintmax_t iters = 200;
  auto r = boost::math::tools::toms748_solve(f, lo, hi, boost::math::tools::eps_tolerance<double>(52), iters);
  return 0.5 * (r.first + r.second);
}

const double kJ1PrimeZero = root([](double x) { return boost::math::cyl_bessel_j_prime(1, x); }, 1.0, 2.5);
const double kRobinRoot =
    root([](double k) { return k * boost::math::cyl_bessel_j(1, k) - boost::math::cyl_bessel_j(0, k); }, 0.5, 2.0);

}  // namespace

TEST_CASE("Richardson extrapolation removes an h^2 term") {
  const Estimate e = richardson(1.0 + 0.04, 1.0 + 0.01);
  CHECK(e.value == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(e.error == doctest::Approx(0.01));
}

TEST_CASE("disk and square constants against analytic oracles") {
  SpectralOptions opt;
  opt.h = 0.1;
  const SpectralConstants sq = compute_spectral_constants(Shape::unit_square(), "square", opt);
  CHECK(sq.lambda_N.value == doctest::Approx(M_PI * M_PI).epsilon(0.01));
  const SpectralConstants disk = compute_spectral_constants(Shape::disk(1.0), "disk", opt);
  CHECK(disk.lambda_N.value == doctest::Approx(kJ1PrimeZero * kJ1PrimeZero).epsilon(0.01));
  CHECK(disk.lambda_R.at(1.0).value == doctest::Approx(kRobinRoot * kRobinRoot).epsilon(0.01));
  CHECK(std::abs(disk.lambda_R.at(0.0).value) < 1e-9);
  CHECK(disk.lambda_S.value > 0.0);
  CHECK(disk.lambda_S.value >= steklov_lower_bound(disk.c_tr.value, disk.lambda_N.value));
  CHECK(disk.perimeter <= disk.c_tr.value * disk.c_tr.value * disk.area);
  CHECK(std::abs(disk.c_tr.fine - disk.c_tr.coarse) <= 0.02 * disk.c_tr.fine);
}

TEST_CASE("Payne-Weinberger bound") {
  CHECK(payne_weinberger_bound(Shape::unit_square()) == doctest::Approx(M_PI * M_PI / 2));
  CHECK(payne_weinberger_bound(Shape::disk(1.0)) == doctest::Approx(M_PI * M_PI / 4));
  CHECK_THROWS_AS(payne_weinberger_bound(Shape::star_radial(0.5, 0.2, 3)), std::invalid_argument);
  for (const Shape& s : {Shape::ellipse(1.0, 0.25), Shape::regular_polygon(6, 1.0), Shape::regular_polygon(3, 0.3)})
    CHECK(payne_weinberger_bound(normalized(s)) >= M_PI * M_PI / 4 * (1 - 1e-12));
}

TEST_CASE("Bramble-Payne bound") {
  CHECK(bramble_payne_bound(Shape::disk(1.0), Vec2::Zero()) == doctest::Approx(0.5).epsilon(1e-12));
  const Shape star = normalized(Shape::star_radial(0.5, 0.2, 3));
  const BramblePayneData bp = bramble_payne(star, star.center());
  CHECK(bp.bound > 0.0);
  const double rho = inner_radius(star).radius;
  CHECK(bp.bound >= rho * bp.support / 32);
  SpectralOptions opt;
  opt.h = std::min(0.1, 0.5 * rho);
  const SpectralConstants sc = compute_spectral_constants(star, "star", opt);
  CHECK(bp.bound <= sc.lambda_N.value);
  CHECK_THROWS_AS(bramble_payne(Shape::star_radial(0.5, 0.45, 5), Vec2(0.8, 0.0)), std::invalid_argument);
}

TEST_CASE("weak Robin bound on the disk") {
  SpectralOptions opt;
  opt.h = 0.1;
  SpectralConstants disk = compute_spectral_constants(Shape::disk(1.0), "disk", opt);
  opt.gammas = robin_samples(disk.lambda_S.value, 10);
  disk = compute_spectral_constants(Shape::disk(1.0), "disk", opt);
  CHECK(opt.gammas.size() == 10);
  for (double g : opt.gammas) {
    CHECK(g < 0.0);
    CHECK(g > -disk.lambda_S.value);
    CHECK(disk.lambda_R.at(g).value >= robin_weak_bound(g, disk.perimeter, disk.area, disk.lambda_S.value));
  }
  CHECK_THROWS_AS(robin_weak_bound(0.1, 1.0, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("assembled constants from unit inputs") {
  ConstantInputs in{1, 1, 1, 1, 1, 1, 1, 1, 0};
  const DerivedConstants d = assemble_constants(in);
  const double ln2 = std::log(2.0);
  CHECK(d.c1 == doctest::Approx(12 / ln2 * (1 / M_PI + 2 / M_PI + 9 / M_PI + 9) + 3 / M_PI).epsilon(1e-14));
  CHECK(d.c2 == doctest::Approx(2 + 2 / ln2 * 3).epsilon(1e-14));
  const double c3 = 18 * std::sqrt(d.c1 * d.c2 / M_PI) + 6 * std::sqrt(d.c1) + 2 / std::sqrt(0.5 * ln2) * (1 / M_PI + 1);
  CHECK(d.c3 == doctest::Approx(c3).epsilon(1e-14));
  // rhs = min(1/8, 1/4); alpha = 4/(rhs/2)
  REQUIRE(d.alpha.has_value());
  CHECK(*d.alpha == doctest::Approx(64.0));
  CHECK(*d.c4 == doctest::Approx(36 * 64 * d.c2 / (M_PI * M_PI)).epsilon(1e-14));
  CHECK(*d.c_final == doctest::Approx(2 * c3 * std::sqrt(2 * *d.c4 + 1.25)).epsilon(1e-14));

  ConstantInputs bigger = in;
  bigger.c_tr_disk = 2.0;
  const DerivedConstants e = assemble_constants(bigger);
  CHECK(e.c1 >= d.c1);
  CHECK(e.c2 >= d.c2);

  ConstantInputs missing = in;
  missing.lambda_N_square = 0.0;
  CHECK_THROWS_AS(assemble_constants(missing), std::invalid_argument);
}

TEST_CASE("least alpha") {
  const double c_tr = 1.3, lam = 3.4;
  const double rhs1 = 0.25 / (1 + 1 / lam) / (c_tr * c_tr), rhs2 = 0.25 * lam / (c_tr * c_tr);
  for (double md : {0.0, 0.001, 0.01}) {
    const auto a = least_alpha(md, c_tr, lam);
    REQUIRE(a.has_value());
    const double lhs = 4 * md + 4 / *a;
    CHECK(lhs <= 0.5 * std::min(rhs1, rhs2) * (1 + 1e-12));
    const double smaller = 4 * md + 4 / (*a * 0.999);
    CHECK(smaller > 0.5 * std::min(rhs1, rhs2));
  }
  CHECK_FALSE(least_alpha(1.0, c_tr, lam).has_value());
}
