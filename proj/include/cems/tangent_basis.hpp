#pragma once

#include "cems/dataset.hpp"
#include "cems/neighbors.hpp"

#include <Eigen/Dense>

#include <string>

namespace cems {

/// Point mode centers at the anchor z; batch mode centers at the member mean.
enum class CenterMode { Point, Batch };

const char* to_string(CenterMode mode);
CenterMode parse_center_mode(const std::string& text);

struct CenteredNeighborhood {
    Eigen::VectorXd origin;  // D
    Eigen::MatrixXd deltas;  // k x D, row j = member_j - origin
    CenterMode mode = CenterMode::Point;
};

CenteredNeighborhood center(const Eigen::MatrixXd& members, const Eigen::VectorXd& anchor, CenterMode mode);
CenteredNeighborhood center(const Neighborhood& neighborhood, CenterMode mode);

/// Left singular vectors of the D x k delta matrix, split into a tangent
/// block (first d) and a normal block (the remaining r - d, r = min(k, D)).
///
/// Each column is signed so that its largest-magnitude entry is positive,
/// the lowest index winning ties.
struct OrthonormalBasis {
    Eigen::MatrixXd tangent;          // D x d
    Eigen::MatrixXd normal;           // D x (r - d)
    Eigen::VectorXd singular_values;  // r, non-increasing
    bool near_degenerate = false;     // s_d and s_{d+1} nearly coincide

    Index ambient_dim() const { return tangent.rows(); }
    Index intrinsic_dim() const { return tangent.cols(); }
    Index normal_dim() const { return normal.cols(); }
    Index rank() const { return tangent.cols() + normal.cols(); }
    Eigen::MatrixXd full() const;
};

OrthonormalBasis fit_basis(const CenteredNeighborhood& centered, Index d);

struct ProjectedNeighborhood {
    Eigen::MatrixXd tangent_coords;  // k x d, rows u_j
    Eigen::MatrixXd normal_coords;   // k x (r - d), rows g_j
};

ProjectedNeighborhood project(const OrthonormalBasis& basis, const CenteredNeighborhood& centered);

/// B_T u + B_N g + origin.
Eigen::VectorXd unproject(const OrthonormalBasis& basis, const Eigen::VectorXd& u, const Eigen::VectorXd& g,
                          const Eigen::VectorXd& origin);

/// Frobenius norm of the part of the deltas outside the retained span.
double reconstruction_residual(const OrthonormalBasis& basis, const CenteredNeighborhood& centered);

}  // namespace cems
