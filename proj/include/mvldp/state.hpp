#pragma once

#include <Eigen/Dense>

namespace mvldp {

/// Coordinates of an element of the discrete space H (length n).
using StateVector = Eigen::VectorXd;
using ConstVecRef = Eigen::Ref<const Eigen::VectorXd>;
using VecRef = Eigen::Ref<Eigen::VectorXd>;

}  // namespace mvldp
