#pragma once

#include <complex>

#include <Eigen/Dense>

namespace dirachom {

using Vec2 = Eigen::Vector2d;
using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;

}  // namespace dirachom
