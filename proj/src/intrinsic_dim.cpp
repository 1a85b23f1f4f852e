#include "cems/intrinsic_dim.hpp"

#include "cems/error.hpp"
#include "cems/neighbors.hpp"

#include <algorithm>
#include <cmath>

namespace cems {

namespace {
constexpr Index kMinValidPoints = 10;
}

DimEstimate twonn_estimate(const Eigen::MatrixXd& points) {
    if (points.cols() < 2) fail(ErrorKind::Estimation, "intrinsic dimension needs an ambient dimension >= 2");
    if (points.rows() < kMinValidPoints)
        fail(ErrorKind::Estimation, "intrinsic dimension needs at least 10 points, got " +
                                        std::to_string(points.rows()));
    const NeighborIndex index(points);

    DimEstimate est;
    double log_sum = 0.0;
    for (Index i = 0; i < index.size(); ++i) {
        const auto nn = index.nearest(i, 2);
        const double r1 = nn[0].distance;
        const double r2 = nn[1].distance;
        if (!(r1 > 0.0) || !(r2 > r1)) continue;
        const double mu = r2 / r1;
        est.ratios.push_back(mu);
        log_sum += std::log(mu);
    }
    est.n_valid = static_cast<Index>(est.ratios.size());
    if (est.n_valid < kMinValidPoints)
        fail(ErrorKind::Estimation, "only " + std::to_string(est.n_valid) +
                                        " points have distinct first and second neighbors (need 10)");
    est.d_real = static_cast<double>(est.n_valid) / log_sum;
    const auto rounded = static_cast<Index>(std::floor(est.d_real + 0.5));
    est.d_used = std::clamp<Index>(rounded, 1, points.cols() - 1);
    return est;
}

}  // namespace cems
