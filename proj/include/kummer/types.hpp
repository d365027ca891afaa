#pragma once
#include <Eigen/Core>
#include <complex>

namespace kummer {

template <typename S> using Vec3T = Eigen::Matrix<S, 3, 1>;
template <typename S> using Vec4T = Eigen::Matrix<S, 4, 1>;
template <typename S> using Vec6T = Eigen::Matrix<S, 6, 1>;
template <typename S> using Mat3T = Eigen::Matrix<S, 3, 3>;
template <typename S> using Mat4T = Eigen::Matrix<S, 4, 4>;
template <typename S> using Mat6T = Eigen::Matrix<S, 6, 6>;

// A 2-form on R^4: coefficients on dx12, dx13, dx14, dx23, dx24, dx34.
template <typename S> using Form2T = Vec6T<S>;
// Three 2-forms as the columns of a 6x3 block (column-vector convention).
template <typename S> using TripleT = Eigen::Matrix<S, 6, 3>;

using Vec3 = Vec3T<double>;
using Vec4 = Vec4T<double>;
using Vec6 = Vec6T<double>;
using Mat3 = Mat3T<double>;
using Mat4 = Mat4T<double>;
using Mat6 = Mat6T<double>;
using Form2 = Form2T<double>;
using Triple = TripleT<double>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

using Complex = std::complex<double>;
using C2 = Eigen::Matrix<Complex, 2, 1>;
using Mat2c = Eigen::Matrix<Complex, 2, 2>;

}  // namespace kummer
