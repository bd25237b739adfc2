#pragma once

#include <complex>

#include <Eigen/Dense>

namespace cfisac {

using cdouble = std::complex<double>;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

}  // namespace cfisac
