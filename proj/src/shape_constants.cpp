#include "dirachom/shape_constants.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dirachom/parallel.hpp"

namespace dirachom {

Estimate richardson(double coarse, double fine) {
  const double value = (4.0 * fine - coarse) / 3.0;
  return {value, coarse, fine, std::abs(value - fine)};
}

double SpectralConstants::refinement_error() const {
  double e = std::max({lambda_N.error / std::abs(lambda_N.value), c_tr.error / c_tr.value});
  if (lambda_S.value > 0.0) e = std::max(e, lambda_S.error / lambda_S.value);
  return e;
}

std::vector<double> robin_samples(double lambda_S, int count) {
  std::vector<double> g;
  for (int k = 1; k <= count; ++k) g.push_back(-lambda_S * k / (count + 1));
  return g;
}

SpectralConstants compute_spectral_constants(const Shape& shape, const std::string& label,
                                             const SpectralOptions& options) {
  SpectralConstants sc;
  sc.label = label;
  sc.shape = shape;
  sc.h = options.h;
  sc.area = area(shape);
  sc.perimeter = perimeter(shape);
  sc.polygon = shape.is_polygon();

  const Mesh coarse = mesh_shape(shape, options.h);
  const Mesh fine = mesh_shape(shape, 0.5 * options.h);
  sc.vertices_fine = static_cast<int>(fine.vertices.size());
  const FemForms fc = assemble_forms(coarse);
  const FemForms ff = assemble_forms(fine);
  sc.mesh_area = fine.area();
  sc.mesh_perimeter = fine.boundary_length();

  sc.lambda_N = richardson(neumann_lambda(fc), neumann_lambda(ff));
  const double tc = trace_constant(fc);
  const double tf = trace_constant(ff);
  const Estimate c2 = richardson(tc * tc, tf * tf);
  sc.c_tr = {std::sqrt(c2.value), tc, tf, std::abs(std::sqrt(c2.value) - tf)};
  if (options.steklov) sc.lambda_S = richardson(steklov_lambda(fc), steklov_lambda(ff));

  std::vector<double> gammas = {0.0, 1.0};
  gammas.insert(gammas.end(), options.gammas.begin(), options.gammas.end());
  for (double g : gammas) {
    if (sc.lambda_R.count(g)) continue;
    sc.lambda_R[g] = richardson(robin_lambda(fc, g), robin_lambda(ff, g));
  }
  return sc;
}

double payne_weinberger_bound(const Shape& shape) {
  if (!is_convex(shape)) throw std::invalid_argument("Payne-Weinberger bound needs a convex shape");
  const double diam = diameter(shape);
  return kPi * kPi / (diam * diam);
}

BramblePayneData bramble_payne(const Shape& shape, const Vec2& p) {
  BramblePayneData d{std::numeric_limits<double>::infinity(), 0.0,
                     std::numeric_limits<double>::infinity(), 0.0};
  if (shape.is_polygon()) {
    const auto v = shape.vertices();
    const size_t n = v.size();
    for (size_t k = 0; k < n; ++k) {
      const Vec2& a = v[k];
      const Vec2& b = v[(k + 1) % n];
      const Vec2 e = b - a;
      const Vec2 nu = Vec2(e.y(), -e.x()).normalized();
      const double t = std::clamp((p - a).dot(e) / e.squaredNorm(), 0.0, 1.0);
      d.r_min = std::min(d.r_min, (p - (a + t * e)).norm());
      d.r_max = std::max(d.r_max, (a - p).norm());
      d.support = std::min(d.support, (a - p).dot(nu));
    }
  } else {
    const BoundaryQuadrature bq = boundary_quadrature(shape, 8192);
    for (size_t i = 0; i < bq.nodes.size(); ++i) {
      const Vec2 x = bq.nodes[i] - p;
      d.r_min = std::min(d.r_min, x.norm());
      d.r_max = std::max(d.r_max, x.norm());
      d.support = std::min(d.support, x.dot(bq.normals[i]));
    }
  }
  if (!(d.support > 0.0)) {
    throw std::invalid_argument("shape is not strictly star-shaped with respect to the point");
  }
  const double rh = d.r_min * d.support;
  d.bound = rh / (d.r_max * d.r_max * (d.r_max * d.r_max + rh));
  return d;
}

double bramble_payne_bound(const Shape& shape, const Vec2& p) { return bramble_payne(shape, p).bound; }

double steklov_lower_bound(double c_tr, double lambda_N) {
  return 1.0 / (c_tr * c_tr * (1.0 + 1.0 / lambda_N));
}

double robin_weak_bound(double gamma, double perimeter, double area, double lambda_S) {
  if (!(gamma < 0.0) || !(gamma > -lambda_S))
    throw std::invalid_argument("Robin bound needs -Lambda_S < gamma < 0");
  const double f = 1.0 - std::sqrt(-gamma / lambda_S);
  return gamma * perimeter / area / (f * f);
}

std::optional<double> least_alpha(double md, double c_tr, double lambda_N) {
  const double inv_tr2 = 1.0 / (c_tr * c_tr);
  const double rhs1 = 0.25 / (1.0 + 1.0 / lambda_N) * inv_tr2;
  const double rhs2 = 0.25 * lambda_N * inv_tr2;
  const double slack = 0.5 * std::min(rhs1, rhs2) - 4.0 * md;
  if (!(slack > 0.0)) return std::nullopt;
  return 4.0 / slack;
}

double c4_value(double m_star, double c_tr, double alpha, double c2, double rho) {
  const double pr2 = kPi * rho * rho;
  return 36.0 * (m_star * c_tr) * (m_star * c_tr) * alpha * c2 / (pr2 * pr2);
}

DerivedConstants assemble_constants(const ConstantInputs& in) {
  const double vals[] = {in.lambda_N_disk, in.lambda_N_square, in.lambda_R1_disk, in.c_tr_disk,
                         in.c_tr,          in.lambda_N,        in.rho};
  for (double v : vals) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument("assemble_constants: base constant missing or nonpositive");
  }
  if (!(in.m_star >= 0.0) || !(in.md_max >= 0.0))
    throw std::invalid_argument("assemble_constants: m_star and md_max must be nonnegative");
  DerivedConstants out;
  const double ln2 = std::log(2.0);
  const double pr2 = kPi * in.rho * in.rho;
  const double tr2 = in.c_tr_disk * in.c_tr_disk;
  out.c1 = 12.0 / ln2 *
               (1.0 / (in.lambda_N_disk * pr2) + tr2 * (1.0 / in.lambda_N_disk + 1.0) / kPi +
                9.0 / (in.lambda_N_square * kPi) + 9.0 / in.lambda_N_square) +
           3.0 / kPi;
  out.c2 = std::max(2.0 * tr2, 2.0 + 2.0 / ln2 * (1.0 + 2.0 * tr2)) / in.lambda_R1_disk;
  out.c3 = 18.0 * in.m_star * std::sqrt(out.c1 * out.c2 / pr2) + 6.0 * in.m_star * std::sqrt(out.c1) +
           2.0 / std::sqrt(0.5 * ln2) * in.m_star *
               (1.0 / (in.lambda_N * pr2) + 1.0 / in.lambda_N_square);
  const double inv_tr2 = 1.0 / (in.c_tr * in.c_tr);
  out.alpha_rhs = std::min(0.25 / (1.0 + 1.0 / in.lambda_N) * inv_tr2, 0.25 * in.lambda_N * inv_tr2);
  out.alpha_limit = *least_alpha(0.0, in.c_tr, in.lambda_N);
  out.c4_limit = c4_value(in.m_star, in.c_tr, out.alpha_limit, out.c2, in.rho);
  out.c_final_limit = 2.0 * out.c3 * std::sqrt(2.0 * out.c4_limit + 1.25);
  out.alpha = least_alpha(in.md_max, in.c_tr, in.lambda_N);
  if (out.alpha) {
    out.c4 = c4_value(in.m_star, in.c_tr, *out.alpha, out.c2, in.rho);
    out.c_final = 2.0 * out.c3 * std::sqrt(2.0 * *out.c4 + 1.25);
  }
  return out;
}

TemplateConstants ShapeConstants::template_constants() const {
  return {inner.radius, inclusion.c_tr.value, inclusion.lambda_N.value};
}

void add_robin_samples(SpectralConstants& sc, int count, int workers) {
  const Mesh coarse = mesh_shape(sc.shape, sc.h);
  const Mesh fine = mesh_shape(sc.shape, 0.5 * sc.h);
  const FemForms fc = assemble_forms(coarse);
  const FemForms ff = assemble_forms(fine);
  const std::vector<double> gammas = robin_samples(sc.lambda_S.value, count);
  std::vector<Estimate> est(gammas.size());
  parallel_for(static_cast<int>(gammas.size()), workers, [&](int i) {
    est[i] = richardson(robin_lambda(fc, gammas[i]), robin_lambda(ff, gammas[i]));
  });
  for (size_t i = 0; i < gammas.size(); ++i) sc.lambda_R[gammas[i]] = est[i];
}

ShapeConstants compute_shape_constants(const Shape& template_shape, double m_star, double md_max,
                                       const ConstantsOptions& options) {
  ShapeConstants out;
  const Shape tmpl = normalized(template_shape);
  out.m_star = m_star;
  out.md_max = md_max;
  out.inner = inner_radius(tmpl);
  const double h = std::min(options.h, 0.5 * out.inner.radius);

  struct Job {
    Shape shape;
    std::string label;
    double h;
  };
  const std::vector<Job> jobs = {{Shape::disk(1.0), "unit_disk", options.h},
                                 {Shape::unit_square(), "unit_square", options.h},
                                 {tmpl, "template", h}};
  std::vector<SpectralConstants> results(jobs.size());
  parallel_for(static_cast<int>(jobs.size()), options.workers, [&](int i) {
    SpectralOptions so;
    so.h = jobs[i].h;
    results[i] = compute_spectral_constants(jobs[i].shape, jobs[i].label, so);
  });
  // Robin samples on the template need its Steklov-type eigenvalue first.
  add_robin_samples(results[2], options.robin_samples, options.workers);
  out.disk = results[0];
  out.square = results[1];
  out.inclusion = results[2];
  out.inputs = {out.disk.lambda_N.value,
                out.square.lambda_N.value,
                out.disk.lambda_R.at(1.0).value,
                out.disk.c_tr.value,
                out.inclusion.c_tr.value,
                out.inclusion.lambda_N.value,
                out.inner.radius,
                m_star,
                md_max};
  out.derived = assemble_constants(out.inputs);
  return out;
}

double md_max_for(const LatticeConfig& base, const std::vector<double>& epsilons) {
  const double tmpl_area = area(base.shape);
  double best = 0.0;
  for (double eps : epsilons) {
    const double d = base.d_rule(eps);
    best = std::max(best, base.m_star * eps * eps / (d * tmpl_area));
  }
  return best;
}

}  // namespace dirachom
