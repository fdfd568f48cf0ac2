#include "dirachom/test_functions.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace dirachom {
namespace {

double uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::vector<Complex> random_coefficients(int k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int side = 2 * k + 1;
  std::vector<Complex> c(static_cast<size_t>(side) * side);
  for (int a = 0; a < side; ++a)
    for (int b = 0; b < side; ++b) {
      const double k2 = double(a - k) * (a - k) + double(b - k) * (b - k);
      const double re = 2.0 * uniform(rng) - 1.0;
      const double im = 2.0 * uniform(rng) - 1.0;
      c[a * side + b] = Complex(re, im) / (1.0 + k2);
    }
  return c;
}

// e1[j] = exp(i w (x - o) (j - K)), j = 0..2K
void fill_phases(double t, double w, int k, std::vector<Complex>& e) {
  e.resize(2 * k + 1);
  const Complex step = std::exp(Complex(0.0, w * t));
  const Complex inv = std::conj(step);
  e[k] = 1.0;
  for (int j = 1; j <= k; ++j) {
    e[k + j] = e[k + j - 1] * step;
    e[k - j] = e[k - j + 1] * inv;
  }
}

}  // namespace

TestFunction TestFunction::constant(double c) {
  TestFunction f;
  f.kind_ = Kind::constant;
  f.constant_ = c;
  return f;
}

TestFunction TestFunction::radial_log(const Vec2& pole) {
  TestFunction f;
  f.kind_ = Kind::radial_log;
  f.point_ = pole;
  return f;
}

TestFunction TestFunction::trig_polynomial(double period, int max_freq, std::uint64_t seed, const Vec2& origin) {
  if (!(period > 0.0)) throw std::invalid_argument("trig polynomial period must be positive");
  if (max_freq < 0 || max_freq > 64) throw std::invalid_argument("trig polynomial frequency out of range");
  TestFunction f;
  f.kind_ = Kind::trig_polynomial;
  f.period_ = period;
  f.max_freq_ = max_freq;
  f.point_ = origin;
  f.coeffs_ = random_coefficients(max_freq, seed);
  return f;
}

Complex TestFunction::coefficient(int k1, int k2) const {
  if (kind_ != Kind::trig_polynomial) return (k1 == 0 && k2 == 0) ? Complex(constant_) : Complex(0.0);
  if (std::abs(k1) > max_freq_ || std::abs(k2) > max_freq_) return 0.0;
  return coeffs_[(k1 + max_freq_) * (2 * max_freq_ + 1) + (k2 + max_freq_)];
}

void TestFunction::phases(const Vec2& x, std::vector<Complex>& e1, std::vector<Complex>& e2) const {
  const double w = 2.0 * kPi / period_;
  fill_phases(x.x() - point_.x(), w, max_freq_, e1);
  fill_phases(x.y() - point_.y(), w, max_freq_, e2);
}

double TestFunction::value(const Vec2& x) const {
  switch (kind_) {
    case Kind::constant:
      return constant_;
    case Kind::radial_log:
      return std::log((x - point_).norm());
    case Kind::trig_polynomial: {
      thread_local std::vector<Complex> e1, e2;
      phases(x, e1, e2);
      const int side = 2 * max_freq_ + 1;
      Complex sum = 0.0;
      for (int a = 0; a < side; ++a) {
        Complex row = 0.0;
        for (int b = 0; b < side; ++b) row += coeffs_[a * side + b] * e2[b];
        sum += row * e1[a];
      }
      return sum.real();
    }
  }
  return 0.0;
}

Vec2 TestFunction::gradient(const Vec2& x) const {
  switch (kind_) {
    case Kind::constant:
      return Vec2::Zero();
    case Kind::radial_log: {
      const Vec2 r = x - point_;
      return r / r.squaredNorm();
    }
    case Kind::trig_polynomial: {
      thread_local std::vector<Complex> e1, e2;
      phases(x, e1, e2);
      const int side = 2 * max_freq_ + 1;
      const double w = 2.0 * kPi / period_;
      Complex gx = 0.0, gy = 0.0;
      for (int a = 0; a < side; ++a) {
        Complex row = 0.0, row_y = 0.0;
        for (int b = 0; b < side; ++b) {
          const Complex t = coeffs_[a * side + b] * e2[b];
          row += t;
          row_y += t * double(b - max_freq_);
        }
        gx += row * e1[a] * double(a - max_freq_);
        gy += row_y * e1[a];
      }
      // d/dx Re(c e^{i w k.x}) = Re(i w k1 c e^{...})
      return Vec2(-w * gx.imag(), -w * gy.imag());
    }
  }
  return Vec2::Zero();
}

Eigen::Vector3d TestFunction::jet(const Vec2& x) const {
  if (kind_ != Kind::trig_polynomial) {
    const Vec2 g = gradient(x);
    return Eigen::Vector3d(value(x), g.x(), g.y());
  }
  thread_local std::vector<Complex> e1, e2;
  phases(x, e1, e2);
  const int side = 2 * max_freq_ + 1;
  const double w = 2.0 * kPi / period_;
  Complex f = 0.0, gx = 0.0, gy = 0.0;
  for (int a = 0; a < side; ++a) {
    Complex row = 0.0, row_y = 0.0;
    for (int b = 0; b < side; ++b) {
      const Complex t = coeffs_[a * side + b] * e2[b];
      row += t;
      row_y += t * double(b - max_freq_);
    }
    f += row * e1[a];
    gx += row * e1[a] * double(a - max_freq_);
    gy += row_y * e1[a];
  }
  return Eigen::Vector3d(f.real(), -w * gx.imag(), -w * gy.imag());
}

SpinorField SpinorField::zero() { return SpinorField(); }

SpinorField SpinorField::bump(const Vec2& center, double radius, double period, int max_freq, std::uint64_t seed) {
  if (!(radius > 0.0) || !(period > 0.0)) throw std::invalid_argument("spinor bump needs positive radius and period");
  if (max_freq < 0 || max_freq > 16) throw std::invalid_argument("spinor frequency out of range");
  SpinorField f;
  f.zero_ = false;
  f.center_ = center;
  f.radius_ = radius;
  f.period_ = period;
  f.max_freq_ = max_freq;
  f.upper_ = random_coefficients(max_freq, seed);
  f.lower_ = random_coefficients(max_freq, seed ^ 0x9e3779b97f4a7c15ULL);
  return f;
}

SpinorJet SpinorField::jet(const Vec2& x) const {
  SpinorJet j{Spinor::Zero(), Spinor::Zero(), Spinor::Zero()};
  if (zero_) return j;
  const Vec2 r = x - center_;
  const double s2 = r.squaredNorm() / (radius_ * radius_);
  if (s2 >= 1.0) return j;
  const double q = 1.0 - s2;
  const double bump = std::exp(1.0 - 1.0 / q);
  // grad bump = bump * (-1/q^2) * grad(s2) = bump * (-2 r / (R^2 q^2))
  const Vec2 gb = -bump * 2.0 / (radius_ * radius_ * q * q) * r;

  const double w = 2.0 * kPi / period_;
  thread_local std::vector<Complex> e1, e2;
  fill_phases(x.x() - center_.x(), w, max_freq_, e1);
  fill_phases(x.y() - center_.y(), w, max_freq_, e2);
  const int side = 2 * max_freq_ + 1;
  Complex p[2] = {0.0, 0.0}, px[2] = {0.0, 0.0}, py[2] = {0.0, 0.0};
  const std::vector<Complex>* coeffs[2] = {&upper_, &lower_};
  for (int c = 0; c < 2; ++c)
    for (int a = 0; a < side; ++a)
      for (int b = 0; b < side; ++b) {
        const Complex t = (*coeffs[c])[a * side + b] * e1[a] * e2[b];
        p[c] += t;
        px[c] += Complex(0.0, w * (a - max_freq_)) * t;
        py[c] += Complex(0.0, w * (b - max_freq_)) * t;
      }
  for (int c = 0; c < 2; ++c) {
    j.value(c) = bump * p[c];
    j.dx(c) = gb.x() * p[c] + bump * px[c];
    j.dy(c) = gb.y() * p[c] + bump * py[c];
  }
  return j;
}

}  // namespace dirachom
