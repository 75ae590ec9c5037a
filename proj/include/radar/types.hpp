#pragma once

#include <cstdint>
#include <Eigen/Dense>

namespace radar {

using Scalar = double;

template <typename T>
using MatrixX = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

using Matrix = MatrixX<Scalar>;
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Image planes and masks are row-major so memory order matches scanline files.
template <typename T>
using PlaneX = Eigen::Array<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Plane = PlaneX<Scalar>;
using Mask = PlaneX<std::uint8_t>;  // values restricted to {0, 1}

using Index = Eigen::Index;

}  // namespace radar
