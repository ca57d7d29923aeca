#pragma once

#include <complex>

#include <Eigen/Dense>

namespace qfc {

using cplx = std::complex<double>;

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXd = Mat<double>;
using MatrixXc = Mat<cplx>;
using VectorXd = Vec<double>;
using VectorXc = Vec<cplx>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cplx kI{0.0, 1.0};

/// SI constants (CODATA 2018).
struct PhysicalConstants {
  double hbar = 1.054571817e-34;
  double eps0 = 8.8541878128e-12;
  double c = 299792458.0;
};

/// Quadrature vacuum variance for x = (a^dag e^{i th} + a e^{-i th})/sqrt(2).
inline constexpr double kVacuumVariance = 0.5;

}  // namespace qfc
