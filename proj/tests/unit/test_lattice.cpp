#include <doctest.h>

#include <cmath>

#include "dirachom/lattice.hpp"
#include "dirachom/quadrature.hpp"

using namespace dirachom;

namespace {

LatticeConfig disk_config(double eps, double m_star, double d) {
  return make_lattice(eps, m_star, Shape::disk(1.0), DRule{d / eps, 1.0});
}

const TemplateConstants kDiskConstants{1.0, 1.4, 3.39};

}  // namespace

TEST_CASE("mass calibration") {
  CHECK(calibrate_mass(disk_config(0.25, 1.0, 0.1)).m_value == doctest::Approx(6.25 / M_PI).epsilon(1e-14));
  CHECK(calibrate_mass(disk_config(0.125, 2.0, 1.0 / 32)).m_value == doctest::Approx(32 / M_PI).epsilon(1e-14));
  const MassField full = calibrate_mass(full_cell_lattice(0.25, 1.0));
  CHECK(full.full_cell);
  CHECK(full.m_value == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("calibration identity and upper bound") {
  for (const Shape& s : {Shape::disk(1.0), Shape::ellipse(1.0, 0.5), Shape::regular_polygon(6, 1.0),
                         Shape::star_radial(0.5, 0.2, 3)}) {
    const LatticeConfig cfg = make_lattice(0.25, 1.3, s, DRule{0.25, 1.0}, Vec2(0.01, -0.02));
    const MassField f = calibrate_mass(cfg);
    const double placed_area = area(f.inclusion);
    CHECK(std::abs(f.m_value * placed_area - cfg.m_star * 0.0625) <= 1e-12 * cfg.m_star * 0.0625);
    // Area by quadrature of the placed inclusion.
    const AreaRule rule = area_rule(f.inclusion, 24, 512);
    CHECK(std::abs(f.m_value * rule.total_weight() - cfg.m_star * 0.0625) <= 1e-10);
    const double rho = inner_radius(cfg.shape).radius;
    CHECK(f.m_value <= cfg.m_star * 0.0625 / (f.d * f.d * M_PI * rho * rho) * (1 + 1e-12));
  }
}

TEST_CASE("containment") {
  CHECK_THROWS_AS(calibrate_mass(make_lattice(0.25, 1.0, Shape::disk(1.0), DRule{0.25, 1.0}, Vec2(0.07, 0.0))),
                  std::invalid_argument);
  CHECK_NOTHROW(calibrate_mass(make_lattice(0.25, 1.0, Shape::disk(1.0), DRule{0.25, 1.0}, Vec2(0.06, 0.0))));
  CHECK_THROWS_AS(calibrate_mass(make_lattice(0.25, 1.0, Shape::disk(1.0), DRule{0.5, 1.0})), std::invalid_argument);
}

TEST_CASE("rate function") {
  CHECK(eta(0.125, 1.0 / 32) == doctest::Approx(0.5 * std::sqrt(std::log(4.0))).epsilon(1e-14));
  CHECK(eta(0.125, 1.0 / 32) == doctest::Approx(0.58871).epsilon(1e-5));
  const double e = 0.3;
  CHECK(eta(e, e / std::sqrt(2.0)) == doctest::Approx(e * std::sqrt(2.0) * std::sqrt(0.5 * std::log(2.0))));
  CHECK_THROWS_AS(eta(0.25, 0.25), std::invalid_argument);
  CHECK_THROWS_AS(eta(0.25, 0.0), std::invalid_argument);
  // Decreasing in d where ln(eps/d) >= 1/2.
  double prev = eta(1.0, 1e-3);
  for (double d = 2e-3; d <= std::exp(-0.5); d += 1e-3) {
    const double cur = eta(1.0, d);
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("assumption report") {
  CHECK(corollary_threshold(1.0) == doctest::Approx(0.121320).epsilon(1e-6));
  CHECK(corollary_threshold(1.0) == doctest::Approx((1 - std::sqrt(0.5)) / (1 + std::sqrt(2.0))).epsilon(1e-15));

  const AssumptionReport ok = check_assumptions(disk_config(1.0 / 16, 1.0, 1.0 / 64), kDiskConstants);
  CHECK(ok.standing_ok());
  CHECK(ok.find("2.3")->pass);
  CHECK_FALSE(ok.exploratory_regime);

  LatticeConfig bad = make_lattice(0.25, 1.0, Shape::disk(1.0), DRule{1.0, 1.0});
  const AssumptionReport r = check_assumptions(bad, kDiskConstants);
  CHECK_FALSE(r.find("2.2")->pass);
  CHECK_FALSE(r.standing_ok());

  for (double e : {0.5, 0.25, 0.125, 0.0625}) CHECK(check_assumptions(full_cell_lattice(e, 1.0), kDiskConstants).find("2.2")->pass);

  const AssumptionReport tiny = check_assumptions(make_lattice(1.0 / 16, 1.0, Shape::disk(1.0), DRule{1.0, 2.0}),
                                                  kDiskConstants);
  CHECK(tiny.exploratory_regime);
  CHECK(std::isfinite(tiny.find("eta:bound")->value));

  // Small eps with a comfortable ratio satisfies the corollary threshold.
  const AssumptionReport cor = check_assumptions(disk_config(1.0 / 64, 1.0, 1.0 / 128), kDiskConstants);
  CHECK(cor.corollary_ok());
}

TEST_CASE("inclusion radius rule") {
  CHECK(DRule{0.25, 1.5}(0.25) == doctest::Approx(0.25 * 0.125));
  CHECK_THROWS(DRule{}(0.0));
}
