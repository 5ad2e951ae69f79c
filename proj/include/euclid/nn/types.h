#pragma once

#include <Eigen/Dense>

namespace euclid {

// Column-major batches: one column per sample.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

}  // namespace euclid
