#include "dirachom/bessel.hpp"

#include <cmath>

#include "dirachom/types.hpp"

namespace dirachom::special {
namespace {

constexpr double kSeriesLimit = 8.0;
constexpr double kAsymptoticLimit = 25.0;

// Power series in extended precision; cancellation at x = 8 costs about
// three digits, which long double absorbs.
double series(int order, double x) {
  const long double q = -0.25L * static_cast<long double>(x) * x;
  long double term = order == 0 ? 1.0L : 0.5L * x;
  long double sum = term;
  for (int k = 1; k < 200; ++k) {
    term *= q / (static_cast<long double>(k) * (k + order));
    sum += term;
    if (std::fabs(term) < 1e-21L * std::fabs(sum)) break;
  }
  return static_cast<double>(sum);
}

// Miller's backward recurrence normalized by J0 + 2 sum J_{2k} = 1.
void miller(double x, double& j0, double& j1) {
  const int start = 2 * static_cast<int>((x + 30.0 + 4.0 * std::sqrt(x)) / 2.0);
  double next = 0.0;
  double cur = 1e-30;
  double norm = 0.0;
  double val0 = 0.0;
  double val1 = 0.0;
  for (int k = start; k >= 1; --k) {
    const double prev = 2.0 * k / x * cur - next;
    next = cur;
    cur = prev;
    // cur now holds J_{k-1}, next holds J_k.
    if ((k - 1) % 2 == 0 && k - 1 > 0) norm += 2.0 * cur;
    if (k - 1 == 1) val1 = cur;
    if (std::fabs(cur) > 1e250) {
      cur *= 1e-250;
      next *= 1e-250;
      norm *= 1e-250;
      val1 *= 1e-250;
    }
  }
  val0 = cur;
  norm += val0;
  j0 = val0 / norm;
  j1 = val1 / norm;
}

// Hankel asymptotic expansion, summed until terms stop decreasing.
double asymptotic(int order, double x) {
  const double mu = 4.0 * order * order;
  const double z = 8.0 * x;
  double p = 1.0;
  double q = 0.0;
  double term = 1.0;
  double last = 1.0;
  for (int k = 1; k < 60; ++k) {
    const double f = 2.0 * k - 1.0;
    term *= (mu - f * f) / (k * z);
    const double mag = std::fabs(term);
    if (mag > last) break;
    last = mag;
    switch (k % 4) {
      case 1: q += term; break;
      case 2: p -= term; break;
      case 3: q -= term; break;
      default: p += term; break;
    }
    if (mag < 1e-18) break;
  }
  const double chi = x - (0.5 * order + 0.25) * kPi;
  return std::sqrt(2.0 / (kPi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

double evaluate(int order, double x) {
  const double ax = std::fabs(x);
  double value;
  if (ax < kSeriesLimit) {
    value = series(order, ax);
  } else if (ax < kAsymptoticLimit) {
    double j0, j1;
    miller(ax, j0, j1);
    value = order == 0 ? j0 : j1;
  } else {
    value = asymptotic(order, ax);
  }
  return (order == 1 && x < 0.0) ? -value : value;
}

}  // namespace

double bessel_j0(double x) { return evaluate(0, x); }

double bessel_j1(double x) { return evaluate(1, x); }

double bessel_j1_prime(double x) {
  if (std::fabs(x) < 1e-8) return 0.5 - 3.0 * x * x / 16.0;
  return bessel_j0(x) - bessel_j1(x) / x;
}

}  // namespace dirachom::special
