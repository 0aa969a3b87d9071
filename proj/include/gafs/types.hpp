#pragma once

#include <Eigen/Dense>

namespace gafs {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

}  // namespace gafs
