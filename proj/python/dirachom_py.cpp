#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dirachom/bloch.hpp"
#include "dirachom/pipelines.hpp"
#include "dirachom/version.hpp"

namespace py = pybind11;
using namespace dirachom;

namespace {

LatticeConfig lattice(double epsilon, double m_star, const Shape& shape, double c, double kappa) {
  return make_lattice(epsilon, m_star, shape, DRule{c, kappa});
}

SolverOptions solver(int cutoff, int grid, int workers) {
  SolverOptions o;
  o.cutoff = cutoff;
  o.grid = grid;
  o.workers = workers;
  return o;
}

py::dict estimate_dict(const Estimate& e) {
  py::dict d;
  d["value"] = e.value;
  d["coarse"] = e.coarse;
  d["fine"] = e.fine;
  d["error"] = e.error;
  return d;
}

PipelineContext context(const std::string& out, bool exploratory) {
  PipelineContext ctx;
  ctx.out = out;
  ctx.exploratory = exploratory;
  return ctx;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Homogenization lab for the 2D Dirac operator with piecewise-constant mass";
  m.attr("__version__") = kVersion;

  py::class_<Shape>(m, "Shape")
      .def_static("disk", &Shape::disk, py::arg("radius"), py::arg("center") = Vec2::Zero())
      .def_static("ellipse", &Shape::ellipse, py::arg("a"), py::arg("b"), py::arg("center") = Vec2::Zero())
      .def_static("regular_polygon", &Shape::regular_polygon, py::arg("sides"), py::arg("circumradius"),
                  py::arg("rotation") = 0.0, py::arg("center") = Vec2::Zero())
      .def_static("star_radial", &Shape::star_radial, py::arg("r0"), py::arg("amplitude"), py::arg("lobes"),
                  py::arg("center") = Vec2::Zero())
      .def_static("unit_square", &Shape::unit_square, py::arg("center") = Vec2::Zero())
      .def_property_readonly("kind", [](const Shape& s) { return to_string(s.kind()); })
      .def_property_readonly("center", &Shape::center)
      .def("scaled", &Shape::scaled)
      .def("area", [](const Shape& s) { return area(s); })
      .def("perimeter", [](const Shape& s) { return perimeter(s); })
      .def("outer_radius", [](const Shape& s) { return outer_radius(s); })
      .def("inner_radius", [](const Shape& s) { return inner_radius(s).radius; })
      .def("is_convex", [](const Shape& s) { return is_convex(s); })
      .def("normalized", [](const Shape& s) { return normalized(s); })
      .def("fields", [](const Shape& s) { return shape_to_fields(s); });

  m.def("eta", py::overload_cast<double, double>(&eta), py::arg("epsilon"), py::arg("d"));

  m.def(
      "calibrated_mass",
      [](double epsilon, double m_star, const Shape& shape, double c, double kappa) {
        const MassField f = calibrate_mass(lattice(epsilon, m_star, shape, c, kappa));
        py::dict d;
        d["m_value"] = f.m_value;
        d["m_star"] = f.m_star;
        d["epsilon"] = f.epsilon;
        d["d"] = f.d;
        d["inclusion_area"] = area(f.inclusion);
        return d;
      },
      py::arg("epsilon"), py::arg("m_star"), py::arg("shape"), py::arg("c") = 0.25, py::arg("kappa") = 1.0);

  m.def(
      "spectral_constants",
      [](const Shape& shape, double h, std::vector<double> gammas) {
        SpectralOptions o;
        o.h = h;
        o.gammas = std::move(gammas);
        const SpectralConstants sc = compute_spectral_constants(shape, "shape", o);
        py::dict d;
        d["lambda_N"] = estimate_dict(sc.lambda_N);
        d["lambda_S"] = estimate_dict(sc.lambda_S);
        d["c_tr"] = estimate_dict(sc.c_tr);
        py::dict robin;
        for (const auto& [g, e] : sc.lambda_R) robin[py::float_(g)] = estimate_dict(e);
        d["lambda_R"] = robin;
        d["area"] = sc.area;
        d["perimeter"] = sc.perimeter;
        return d;
      },
      py::arg("shape"), py::arg("h") = 0.1, py::arg("gammas") = std::vector<double>{});

  m.def(
      "shape_constants_json",
      [](const Shape& shape, double m_star, double md_max, double h) {
        return constants_json(compute_shape_constants(shape, m_star, md_max, ConstantsOptions{h, 10, 1})).dump();
      },
      py::arg("shape"), py::arg("m_star"), py::arg("md_max"), py::arg("h") = 0.1);

  m.def("payne_weinberger_bound", &payne_weinberger_bound);
  m.def("bramble_payne_bound", &bramble_payne_bound);
  m.def("steklov_lower_bound", &steklov_lower_bound);
  m.def("robin_weak_bound", &robin_weak_bound);

  m.def(
      "free_fiber_eigenvalues",
      [](double epsilon, double m_star, const Vec2& theta, int cutoff) {
        return free_fiber_eigenvalues(assemble_fiber(PeriodicMass::constant(epsilon, m_star), theta, cutoff));
      },
      py::arg("epsilon"), py::arg("m_star"), py::arg("theta"), py::arg("cutoff"));

  m.def(
      "fiber_matrix",
      [](double epsilon, double m_star, const Shape& shape, double c, const Vec2& theta, int cutoff) {
        const MassField f = calibrate_mass(lattice(epsilon, m_star, shape, c, 1.0));
        return assemble_fiber(PeriodicMass::from_field(f), theta, cutoff).matrix();
      },
      py::arg("epsilon"), py::arg("m_star"), py::arg("shape"), py::arg("c"), py::arg("theta"), py::arg("cutoff"));

  m.def(
      "nrc_estimate",
      [](double epsilon, double m_star, const Shape& shape, double c, double kappa, int cutoff, int grid,
         int workers) {
        const MassField f = calibrate_mass(lattice(epsilon, m_star, shape, c, kappa));
        const NrcResult r = nrc_estimate(PeriodicMass::from_field(f), PeriodicMass::constant(epsilon, m_star),
                                         solver(cutoff, grid, workers));
        py::dict d;
        d["value"] = r.value;
        d["grid_max"] = r.grid_max;
        d["theta_max"] = r.theta_max;
        d["truncation_indicator"] = r.truncation_indicator;
        return d;
      },
      py::arg("epsilon"), py::arg("m_star"), py::arg("shape"), py::arg("c") = 0.25, py::arg("kappa") = 1.0,
      py::arg("cutoff") = 12, py::arg("grid") = 9, py::arg("workers") = 1);

  m.def(
      "gap",
      [](double epsilon, double m_star, const Shape& shape, double c, double kappa, int cutoff, int grid,
         int workers) {
        const MassField f = calibrate_mass(lattice(epsilon, m_star, shape, c, kappa));
        const BandStructure b = bands(PeriodicMass::from_field(f), solver(cutoff, grid, workers));
        return py::make_tuple(b.gap_lower, b.gap_upper, b.truncation_indicator);
      },
      py::arg("epsilon"), py::arg("m_star"), py::arg("shape"), py::arg("c") = 0.25, py::arg("kappa") = 1.0,
      py::arg("cutoff") = 12, py::arg("grid") = 9, py::arg("workers") = 1);

  m.def(
      "abstract_scheme",
      [](const CMatrix& d, const CMatrix& d_tilde, double a, double b) {
        MatrixPair p{d, d_tilde, a, b, std::nullopt};
        const SchemeResult r = abstract_scheme(p);
        py::dict out;
        out["c"] = r.c;
        out["difference"] = r.difference;
        out["bound"] = r.bound;
        out["pass"] = r.pass;
        return out;
      },
      py::arg("d"), py::arg("d_tilde"), py::arg("a") = 1.0, py::arg("b") = 1.0);

  m.def(
      "fit_rate",
      [](const std::vector<double>& eps, const std::vector<double>& values, const std::vector<double>& etas) {
        if (eps.size() != values.size() || eps.size() != etas.size())
          throw std::invalid_argument("eps, values and etas need equal lengths");
        std::vector<ConvergenceRecord> recs(eps.size());
        for (size_t i = 0; i < eps.size(); ++i) {
          recs[i].epsilon = eps[i];
          recs[i].nrc = values[i];
          recs[i].eta = etas[i];
        }
        const RateFit f = fit_rate(recs);
        py::dict d;
        d["slope"] = f.slope;
        d["intercept"] = f.intercept;
        d["residual"] = f.residual;
        d["ratio_max"] = f.ratio_max;
        d["ratio_min"] = f.ratio_min;
        d["used"] = f.used;
        return d;
      },
      py::arg("eps"), py::arg("values"), py::arg("etas"));

  m.def("parse_config", [](const std::string& text) { return to_json(parse_config(text)).dump(); });

  m.def(
      "run_constants",
      [](const std::string& config, const std::string& out, bool exploratory) {
        const ConstantsRun r = constants_pipeline(load_config(config), context(out, exploratory));
        return constants_json(r.constants).dump();
      },
      py::arg("config"), py::arg("out"), py::arg("exploratory") = false);
  m.def(
      "run_validate",
      [](const std::string& config, const std::string& out, bool exploratory) {
        return validate_pipeline(load_config(config), context(out, exploratory)).combined().summary_json();
      },
      py::arg("config"), py::arg("out"), py::arg("exploratory") = false);
  m.def(
      "run_sweep",
      [](const std::string& config, const std::string& out, bool exploratory) {
        return records_csv(sweep_pipeline(load_config(config), context(out, exploratory)).records);
      },
      py::arg("config"), py::arg("out"), py::arg("exploratory") = false);
  m.def(
      "run_bands",
      [](const std::string& config, const std::string& out, bool exploratory) {
        const BandStructure b = bands_pipeline(load_config(config), context(out, exploratory));
        return py::make_tuple(b.gap_lower, b.gap_upper);
      },
      py::arg("config"), py::arg("out"), py::arg("exploratory") = false);
  m.def(
      "replay",
      [](const std::string& manifest, const std::string& out) {
        const ReplayResult r = replay_pipeline(manifest, context(out, false));
        return py::make_tuple(r.identical, r.message);
      },
      py::arg("manifest"), py::arg("out"));

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<AssumptionError>(m, "AssumptionError", PyExc_RuntimeError);
  py::register_exception<FitError>(m, "FitError", PyExc_ValueError);
}
