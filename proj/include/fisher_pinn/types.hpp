#pragma once

#include <Eigen/Core>

namespace fisher_pinn {

/// Dense row-major matrix; solution grids use row = time level, column = x node.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

}  // namespace fisher_pinn
