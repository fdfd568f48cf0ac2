#pragma once

namespace dirachom::special {

// Bessel functions of the first kind, orders 0 and 1, for real argument.
double bessel_j0(double x);
double bessel_j1(double x);

// Derivative J0'(x) = -J1(x) and J1'(x) = J0(x) - J1(x)/x.
double bessel_j1_prime(double x);

}  // namespace dirachom::special
