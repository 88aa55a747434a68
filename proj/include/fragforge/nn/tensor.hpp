#pragma once

#include <Eigen/Core>

namespace fragforge::nn {

// Dense row-major 64-bit matrix; vectors are 1 x n rows.
using Tensor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace fragforge::nn
