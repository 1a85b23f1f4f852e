#pragma once

#include "cems/dataset.hpp"

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace cems {

/// One column of the design matrix.
struct ChartTerm {
    enum class Kind { Linear, Square, Cross };
    Kind kind = Kind::Linear;
    Index i = 0;
    Index j = 0;  // equals i except for cross terms, where i < j
};

/// Column layout: d linear terms, then (order 2 only) d squares, then the
/// d(d-1)/2 cross products in lexicographic (i, j) order.
struct DesignLayout {
    Index intrinsic_dim = 0;
    int order = 2;
    std::vector<ChartTerm> terms;

    Index size() const { return static_cast<Index>(terms.size()); }
};

DesignLayout design_layout(Index d, int order = 2);

/// Number of unknowns per normal coordinate: d + d(d+1)/2.
constexpr Index quadratic_term_count(Index d) { return d + d * (d + 1) / 2; }

struct DesignMatrix {
    Eigen::MatrixXd psi;  // k x m
    DesignLayout layout;
};

/// Rows of `tangent_coords` are the u_j.
DesignMatrix assemble_design(const Eigen::MatrixXd& tangent_coords, int order = 2);

struct ChartSolution {
    Eigen::MatrixXd coefficients;  // m x (r - d)
    double residual_norm = 0.0;    // ||Psi X - G||_F
    double ridge_used = 0.0;
};

/// ridge == 0: minimum-norm least squares through the SVD of Psi.
/// ridge > 0: (Psi^T Psi + ridge I)^{-1} Psi^T G via Cholesky.
ChartSolution solve_chart(const Eigen::MatrixXd& psi, const Eigen::MatrixXd& normal_coords, double ridge);

/// 0 when the system is (over)determined, 1e-6 * trace(Psi^T Psi) / m otherwise.
double auto_ridge(const Eigen::MatrixXd& psi);

/// Second-order model of the embedding map around `base_point`:
///   g(eta) = base_value + delta^T grad + 1/2 delta^T H delta,  delta = eta - base_point.
struct QuadraticChart {
    Eigen::MatrixXd gradient;              // d x (r - d), column alpha is grad g^alpha
    std::vector<Eigen::MatrixXd> hessians;  // r - d symmetric d x d matrices
    Eigen::VectorXd base_value;            // r - d
    Eigen::VectorXd base_point;            // d
    double ridge_used = 0.0;
    double residual_norm = 0.0;

    Index intrinsic_dim() const { return gradient.rows(); }
    Index normal_dim() const { return gradient.cols(); }
};

QuadraticChart extract_chart(const ChartSolution& solution, const DesignLayout& layout,
                             const Eigen::VectorXd& base_value, const Eigen::VectorXd& base_point);

Eigen::VectorXd evaluate_chart(const QuadraticChart& chart, const Eigen::VectorXd& eta);

/// assemble_design + solve_chart + extract_chart. Rows of `tangent_coords`
/// and `normal_coords` are offsets from the base point / base value.
/// A missing ridge selects auto_ridge.
QuadraticChart fit_chart(const Eigen::MatrixXd& tangent_coords, const Eigen::MatrixXd& normal_coords, int order,
                         std::optional<double> ridge, const Eigen::VectorXd& base_value,
                         const Eigen::VectorXd& base_point);

}  // namespace cems
