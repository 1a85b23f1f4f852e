#pragma once

#include "cems/dataset.hpp"

#include <Eigen/Dense>

#include <vector>

namespace cems {

struct DimEstimate {
    double d_real = 0.0;
    Index d_used = 0;        // round-half-up of d_real, clamped to [1, D - 1]
    Index n_valid = 0;       // points kept after tie filtering
    std::vector<double> ratios;  // retained r2 / r1
};

/// TwoNN maximum-likelihood estimate d = n / sum(log(r2 / r1)) over the rows
/// of `points`. Points whose nearest neighbor is an exact duplicate, or whose
/// two nearest distances coincide, are left out.
DimEstimate twonn_estimate(const Eigen::MatrixXd& points);

}  // namespace cems
