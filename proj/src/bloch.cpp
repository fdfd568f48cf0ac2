#include "dirachom/bloch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dirachom/linalg.hpp"
#include "dirachom/parallel.hpp"

namespace dirachom {

PeriodicMass PeriodicMass::constant(double epsilon, double m) {
  if (!(epsilon > 0.0) || !std::isfinite(m)) throw std::invalid_argument("PeriodicMass: bad parameters");
  PeriodicMass out;
  out.kind_ = MassKind::constant;
  out.epsilon_ = epsilon;
  out.constant_ = m;
  return out;
}

PeriodicMass PeriodicMass::from_field(const MassField& field) {
  if (!(field.epsilon > 0.0)) throw std::invalid_argument("PeriodicMass: bad period");
  PeriodicMass out;
  out.kind_ = MassKind::periodic;
  out.epsilon_ = field.epsilon;
  out.field_ = std::make_shared<const MassField>(field);
  return out;
}

Complex PeriodicMass::coefficient(int j1, int j2) const {
  if (kind_ == MassKind::constant) return (j1 == 0 && j2 == 0) ? Complex(constant_) : Complex(0.0);
  const double scale = 2.0 * kPi / epsilon_;
  const Vec2 q(scale * j1, scale * j2);
  const Vec2& c = field_->inclusion.center();
  const Complex shift = std::exp(Complex(0.0, -q.dot(c)));
  return field_->m_value / (epsilon_ * epsilon_) * shift * indicator_fourier(field_->inclusion, q);
}

FiberFamily::FiberFamily(const PeriodicMass& mass, int cutoff)
    : cutoff_(cutoff), epsilon_(mass.epsilon()), kind_(mass.kind()), constant_(mass.constant_value()) {
  if (cutoff < kMinCutoff || cutoff > kMaxCutoff)
    throw std::invalid_argument("fiber cutoff must be in [" + std::to_string(kMinCutoff) + ", " +
                                std::to_string(kMaxCutoff) + "]");
  if (kind_ == MassKind::constant) return;
  const int span = 4 * cutoff + 1;
  std::vector<Complex> table(static_cast<size_t>(span) * span);
  for (int a = 0; a < span; ++a)
    for (int b = 0; b < span; ++b) table[a * span + b] = mass.coefficient(a - 2 * cutoff, b - 2 * cutoff);
  const int n = modes();
  auto coupling = std::make_shared<CMatrix>(n, n);
  for (int col = 0; col < n; ++col) {
    const Eigen::Vector2i nc = mode(col);
    for (int row = 0; row < n; ++row) {
      const Eigen::Vector2i nr = mode(row);
      (*coupling)(row, col) = table[(nr.x() - nc.x() + 2 * cutoff) * span + (nr.y() - nc.y() + 2 * cutoff)];
    }
  }
  coupling_ = std::move(coupling);
}

Eigen::Vector2i FiberFamily::mode(int index) const {
  const int side = 2 * cutoff_ + 1;
  return {index / side - cutoff_, index % side - cutoff_};
}

FiberOperator make_fiber(const FiberFamily& family, const Vec2& theta) {
  FiberOperator f;
  f.theta = theta;
  f.cutoff = family.cutoff();
  f.epsilon = family.epsilon();
  f.mass_kind = family.kind();
  f.constant_mass = family.constant_mass();
  f.coupling = family.coupling();
  const double scale = 2.0 * kPi / family.epsilon();
  f.wavevectors.reserve(family.modes());
  for (int i = 0; i < family.modes(); ++i) {
    const Eigen::Vector2i n = family.mode(i);
    f.wavevectors.push_back(theta + scale * Vec2(n.x(), n.y()));
  }
  return f;
}

FiberOperator assemble_fiber(const PeriodicMass& mass, const Vec2& theta, int cutoff) {
  return make_fiber(FiberFamily(mass, cutoff), theta);
}

CMatrix FiberOperator::mass_matrix() const {
  if (mass_kind == MassKind::constant) return CMatrix::Identity(modes(), modes()) * constant_mass;
  return *coupling;
}

CMatrix FiberOperator::matrix() const {
  const int n = modes();
  CMatrix h = CMatrix::Zero(2 * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    const Vec2& k = wavevectors[i];
    h(2 * i, 2 * i + 1) = Complex(k.x(), -k.y());
    h(2 * i + 1, 2 * i) = Complex(k.x(), k.y());
  }
  if (mass_kind == MassKind::constant) {
    for (int i = 0; i < n; ++i) {
      h(2 * i, 2 * i) += constant_mass;
      h(2 * i + 1, 2 * i + 1) -= constant_mass;
    }
  } else {
    const CMatrix& c = *coupling;
    for (int col = 0; col < n; ++col)
      for (int row = 0; row < n; ++row) {
        h(2 * row, 2 * col) += c(row, col);
        h(2 * row + 1, 2 * col + 1) -= c(row, col);
      }
  }
  return h;
}

RVector free_fiber_eigenvalues(const FiberOperator& fiber) {
  if (fiber.mass_kind != MassKind::constant) throw std::invalid_argument("free_fiber_eigenvalues: mass is not constant");
  const int n = fiber.modes();
  RVector out(2 * n);
  const double m2 = fiber.constant_mass * fiber.constant_mass;
  for (int i = 0; i < n; ++i) {
    const double e = std::sqrt(fiber.wavevectors[i].squaredNorm() + m2);
    out(2 * i) = -e;
    out(2 * i + 1) = e;
  }
  std::sort(out.data(), out.data() + out.size());
  return out;
}

namespace {

void check_compatible(const FiberOperator& a, const FiberOperator& b) {
  if (a.cutoff != b.cutoff || a.modes() != b.modes()) throw std::invalid_argument("fibers have different cutoffs");
  if ((a.theta - b.theta).norm() > 1e-12 * (1.0 + a.theta.norm()))
    throw std::invalid_argument("fibers have different quasi-momenta");
  if (std::abs(a.epsilon - b.epsilon) > 1e-14 * a.epsilon) throw std::invalid_argument("fibers have different periods");
}

CMatrix dense_resolvent(const CMatrix& h) {
  const auto eig = linalg::hermitian_eigen(h);
  CVector inv(eig.values.size());
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) inv(i) = 1.0 / Complex(eig.values(i), -1.0);
  return eig.vectors * inv.asDiagonal() * eig.vectors.adjoint();
}

// Solves (H - i) x = b and its adjoint.
class ShiftedSolver {
 public:
  explicit ShiftedSolver(const FiberOperator& f) : fiber_(f) {
    if (f.mass_kind == MassKind::periodic) {
      CMatrix a = f.matrix();
      a.diagonal().array() -= Complex(0.0, 1.0);
      lu_ = std::make_unique<linalg::ComplexLU>(std::move(a));
    }
  }

  CVector solve(const CVector& b, bool adjoint) const {
    if (lu_) return adjoint ? lu_->solve_adjoint(b) : lu_->solve(b);
    // (K - i)^-1 = (K + i)/(|k|^2 + m^2 + 1) per mode, K = sigma.k + m sigma_3.
    const Complex s = adjoint ? Complex(0.0, -1.0) : Complex(0.0, 1.0);
    const double m = fiber_.constant_mass;
    CVector x(b.size());
    for (int i = 0; i < fiber_.modes(); ++i) {
      const Vec2& k = fiber_.wavevectors[i];
      const double den = k.squaredNorm() + m * m + 1.0;
      const Complex u = b(2 * i), v = b(2 * i + 1);
      x(2 * i) = ((m + s) * u + Complex(k.x(), -k.y()) * v) / den;
      x(2 * i + 1) = (Complex(k.x(), k.y()) * u + (-m + s) * v) / den;
    }
    return x;
  }

 private:
  const FiberOperator& fiber_;
  std::unique_ptr<linalg::ComplexLU> lu_;
};

// W = H_b - H_a = (M_b - M_a) (x) sigma_3.
class MassDifference {
 public:
  MassDifference(const FiberOperator& a, const FiberOperator& b) : w_(b.mass_matrix() - a.mass_matrix()) {}

  CVector apply(const CVector& x) const {
    const Eigen::Index n = w_.rows();
    CVector up(n), down(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      up(i) = x(2 * i);
      down(i) = x(2 * i + 1);
    }
    const CVector wu = w_ * up, wd = w_ * down;
    CVector out(2 * n);
    for (Eigen::Index i = 0; i < n; ++i) {
      out(2 * i) = wu(i);
      out(2 * i + 1) = -wd(i);
    }
    return out;
  }

 private:
  CMatrix w_;
};

}  // namespace

double resolvent_difference_norm(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("resolvent difference: dimension mismatch");
  if (a.rows() == 0) return 0.0;
  return linalg::singular_values(dense_resolvent(a) - dense_resolvent(b))(0);
}

double fiber_resolvent_norm(const FiberOperator& a) {
  const RVector ev = a.mass_kind == MassKind::constant ? free_fiber_eigenvalues(a)
                                                       : linalg::hermitian_eigenvalues(a.matrix());
  const double closest = ev.cwiseAbs().minCoeff();
  return 1.0 / std::sqrt(closest * closest + 1.0);
}

double fiber_resolvent_diff(const FiberOperator& a, const FiberOperator& b, ResolventMethod method) {
  check_compatible(a, b);
  const int dim = a.dimension();
  if (method == ResolventMethod::automatic)
    method = dim <= kDenseResolventLimit ? ResolventMethod::dense : ResolventMethod::iterative;
  if (method == ResolventMethod::dense) return resolvent_difference_norm(a.matrix(), b.matrix());
  // R_a - R_b = R_a (H_b - H_a) R_b
  const ShiftedSolver ra(a), rb(b);
  const MassDifference w(a, b);
  auto apply = [&](const CVector& x) { return ra.solve(w.apply(rb.solve(x, false)), false); };
  auto apply_adjoint = [&](const CVector& x) { return rb.solve(w.apply(ra.solve(x, true)), true); };
  linalg::LanczosOptions opts;
  opts.tolerance = 1e-11;
  return linalg::largest_singular_value(apply, apply_adjoint, dim, opts).value;
}

std::vector<Vec2> theta_grid(double epsilon, int g) {
  if (g < 1) throw std::invalid_argument("theta grid needs at least one point per axis");
  if (!(epsilon > 0.0)) throw std::invalid_argument("theta grid: epsilon must be positive");
  const double step = 2.0 * kPi / (g * epsilon);
  const double mid = 0.5 * (g - 1);
  std::vector<Vec2> out;
  out.reserve(static_cast<size_t>(g) * g);
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j) out.emplace_back((i - mid) * step, (j - mid) * step);
  return out;
}

std::vector<int> symmetric_representatives(int g) {
  std::vector<int> out;
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j) {
      const int idx = i * g + j;
      const int mirror = (g - 1 - i) * g + (g - 1 - j);
      if (idx <= mirror) out.push_back(idx);
    }
  return out;
}

namespace {

int mirror_index(int idx, int g) { return (g - 1 - idx / g) * g + (g - 1 - idx % g); }

void check_solver_options(const SolverOptions& o) {
  if (o.cutoff < kMinCutoff || o.cutoff > kMaxCutoff) throw std::invalid_argument("solver cutoff out of range");
  if (o.truncation_check && 2 * o.cutoff > kMaxCutoff)
    throw std::invalid_argument("truncation check needs 2*cutoff <= " + std::to_string(kMaxCutoff));
  if (o.grid < 1) throw std::invalid_argument("solver grid must be positive");
  if (o.workers < 1) throw std::invalid_argument("workers must be positive");
}

double relative_change(double base, double other) {
  const double scale = std::max(std::abs(base), std::abs(other));
  if (scale < 1e-12) return 0.0;
  return std::abs(other - base) / std::abs(base == 0.0 ? scale : base);
}

}  // namespace

NrcResult nrc_estimate(const PeriodicMass& mass_eps, const PeriodicMass& mass_star, const SolverOptions& options) {
  check_solver_options(options);
  if (std::abs(mass_eps.epsilon() - mass_star.epsilon()) > 1e-14 * mass_eps.epsilon())
    throw std::invalid_argument("nrc_estimate: masses have different periods");
  const double eps = mass_eps.epsilon();
  const int g = options.grid;
  const FiberFamily fam_eps(mass_eps, options.cutoff), fam_star(mass_star, options.cutoff);
  auto evaluate = [&](const Vec2& theta) {
    return fiber_resolvent_diff(make_fiber(fam_eps, theta), make_fiber(fam_star, theta), options.method);
  };

  const auto grid = theta_grid(eps, g);
  std::vector<int> todo;
  if (options.use_symmetry) {
    todo = symmetric_representatives(g);
  } else {
    for (int i = 0; i < g * g; ++i) todo.push_back(i);
  }
  std::vector<double> values(grid.size(), 0.0);
  parallel_for(static_cast<int>(todo.size()), options.workers,
               [&](int t) { values[todo[t]] = evaluate(grid[todo[t]]); });
  if (options.use_symmetry)
    for (int idx : todo) values[mirror_index(idx, g)] = values[idx];

  NrcResult out;
  out.cutoff = options.cutoff;
  out.grid = g;
  int best = 0;
  for (size_t i = 0; i < grid.size(); ++i) {
    out.points.push_back({grid[i], values[i], false});
    if (values[i] > values[best]) best = static_cast<int>(i);
  }
  out.grid_max = values[best];
  out.value = out.grid_max;
  out.theta_max = grid[best];

  if (options.refine) {
    const double half = kPi / (g * eps);
    std::vector<Vec2> extra;
    for (int a = -1; a <= 1; ++a)
      for (int b = -1; b <= 1; ++b)
        if (a != 0 || b != 0) extra.push_back(grid[best] + half * Vec2(a, b));
    std::vector<double> ev(extra.size());
    parallel_for(static_cast<int>(extra.size()), options.workers, [&](int i) { ev[i] = evaluate(extra[i]); });
    for (size_t i = 0; i < extra.size(); ++i) {
      out.points.push_back({extra[i], ev[i], true});
      out.refined_max = std::max(out.refined_max, ev[i]);
      if (ev[i] > out.value) {
        out.value = ev[i];
        out.theta_max = extra[i];
      }
    }
  }

  if (options.truncation_check) {
    const int n2 = 2 * options.cutoff;
    const FiberFamily big_eps(mass_eps, n2), big_star(mass_star, n2);
    const double base = evaluate(out.theta_max);
    out.value_2N = fiber_resolvent_diff(make_fiber(big_eps, out.theta_max), make_fiber(big_star, out.theta_max),
                                        options.method);
    out.truncation_indicator = relative_change(base, out.value_2N);
  }
  return out;
}

namespace {

struct GapEndpoints {
  double lower;
  double upper;
};

GapEndpoints gap_at(const FiberOperator& f) {
  const int half = f.dimension() / 2;
  if (f.mass_kind == MassKind::constant) {
    const RVector ev = free_fiber_eigenvalues(f);
    return {ev(half - 1), ev(half)};
  }
  const RVector ev = linalg::hermitian_eigenvalues_index(f.matrix(), half, half + 1);
  return {ev(0), ev(1)};
}

}  // namespace

BandStructure bands(const PeriodicMass& mass, const SolverOptions& options) {
  check_solver_options(options);
  const int g = options.grid;
  const FiberFamily family(mass, options.cutoff);
  const auto grid = theta_grid(mass.epsilon(), g);
  std::vector<int> todo;
  if (options.use_symmetry) {
    todo = symmetric_representatives(g);
  } else {
    for (int i = 0; i < g * g; ++i) todo.push_back(i);
  }
  BandStructure out;
  out.cutoff = options.cutoff;
  out.grid = g;
  out.thetas = grid;
  out.eigenvalues.assign(grid.size(), RVector());
  parallel_for(static_cast<int>(todo.size()), options.workers, [&](int t) {
    const FiberOperator f = make_fiber(family, grid[todo[t]]);
    out.eigenvalues[todo[t]] = f.mass_kind == MassKind::constant ? free_fiber_eigenvalues(f)
                                                                 : linalg::hermitian_eigenvalues(f.matrix());
  });
  if (options.use_symmetry)
    for (int idx : todo) {
      const int m = mirror_index(idx, g);
      if (m == idx) continue;
      const RVector& src = out.eigenvalues[idx];
      out.eigenvalues[m] = -src.reverse();
    }

  const int half = family.dimension() / 2;
  out.gap_lower = -std::numeric_limits<double>::infinity();
  out.gap_upper = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < grid.size(); ++i) {
    const RVector& ev = out.eigenvalues[i];
    if (ev(half - 1) > out.gap_lower) {
      out.gap_lower = ev(half - 1);
      out.theta_lower = grid[i];
    }
    if (ev(half) < out.gap_upper) {
      out.gap_upper = ev(half);
      out.theta_upper = grid[i];
    }
  }

  if (options.truncation_check) {
    const FiberFamily big(mass, 2 * options.cutoff);
    const GapEndpoints up = gap_at(make_fiber(big, out.theta_upper));
    out.gap_upper_2N = up.upper;
    if ((out.theta_lower + out.theta_upper).norm() <= 1e-12 * (1.0 + out.theta_upper.norm())) {
      out.gap_lower_2N = -up.upper;
    } else if ((out.theta_lower - out.theta_upper).norm() == 0.0) {
      out.gap_lower_2N = up.lower;
    } else {
      out.gap_lower_2N = gap_at(make_fiber(big, out.theta_lower)).lower;
    }
    out.truncation_indicator = std::max(relative_change(out.gap_lower, out.gap_lower_2N),
                                        relative_change(out.gap_upper, out.gap_upper_2N));
  }
  return out;
}

double hausdorff_gap_check(double gap_lower, double gap_upper, double m_star) {
  if (!(m_star > 0.0)) throw std::invalid_argument("hausdorff_gap_check: m_star must be positive");
  if (!(gap_lower < 0.0 && gap_upper > 0.0)) throw std::domain_error("no spectral gap around zero");
  return std::max(std::abs(gap_lower + m_star), std::abs(gap_upper - m_star)) / (m_star * m_star);
}

double hausdorff_gap_check(const BandStructure& b, double m_star) {
  return hausdorff_gap_check(b.gap_lower, b.gap_upper, m_star);
}

}  // namespace dirachom
