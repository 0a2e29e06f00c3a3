#pragma once

#include <Eigen/Dense>

#include <vector>

namespace cusparity {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Param = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// A polyline in the parameter plane.
using ParamPolyline = std::vector<Param>;

} // namespace cusparity
