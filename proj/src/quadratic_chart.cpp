#include "cems/quadratic_chart.hpp"

#include "cems/error.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>

namespace cems {

DesignLayout design_layout(Index d, int order) {
    if (d < 1) fail(ErrorKind::Parameter, "design layout needs d >= 1");
    if (order != 1 && order != 2) fail(ErrorKind::Parameter, "chart order must be 1 or 2");
    DesignLayout layout;
    layout.intrinsic_dim = d;
    layout.order = order;
    for (Index i = 0; i < d; ++i) layout.terms.push_back({ChartTerm::Kind::Linear, i, i});
    if (order == 2) {
        for (Index i = 0; i < d; ++i) layout.terms.push_back({ChartTerm::Kind::Square, i, i});
        for (Index i = 0; i < d; ++i)
            for (Index j = i + 1; j < d; ++j) layout.terms.push_back({ChartTerm::Kind::Cross, i, j});
    }
    return layout;
}

DesignMatrix assemble_design(const Eigen::MatrixXd& tangent_coords, int order) {
    const Index k = tangent_coords.rows();
    if (k < 1) fail(ErrorKind::Parameter, "design matrix needs at least one row");
    DesignMatrix dm{Eigen::MatrixXd(k, 0), design_layout(tangent_coords.cols(), order)};
    dm.psi.resize(k, dm.layout.size());
    for (Index c = 0; c < dm.layout.size(); ++c) {
        const ChartTerm& t = dm.layout.terms[static_cast<std::size_t>(c)];
        switch (t.kind) {
        case ChartTerm::Kind::Linear: dm.psi.col(c) = tangent_coords.col(t.i); break;
        case ChartTerm::Kind::Square: dm.psi.col(c) = tangent_coords.col(t.i).array().square(); break;
        case ChartTerm::Kind::Cross:
            dm.psi.col(c) = tangent_coords.col(t.i).cwiseProduct(tangent_coords.col(t.j));
            break;
        }
    }
    return dm;
}

ChartSolution solve_chart(const Eigen::MatrixXd& psi, const Eigen::MatrixXd& normal_coords, double ridge) {
    if (psi.rows() != normal_coords.rows())
        fail(ErrorKind::Geometry, "design matrix and normal coordinates disagree on row count");
    if (!(ridge >= 0.0)) fail(ErrorKind::Parameter, "ridge weight must be non-negative");
    if (!psi.allFinite() || !normal_coords.allFinite()) fail(ErrorKind::Numeric, "non-finite least-squares input");

    ChartSolution sol;
    sol.ridge_used = ridge;
    if (ridge == 0.0) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(psi, Eigen::ComputeThinU | Eigen::ComputeThinV);
        sol.coefficients = svd.solve(normal_coords);
    } else {
        Eigen::MatrixXd normal_matrix = psi.transpose() * psi;
        normal_matrix.diagonal().array() += ridge;
        Eigen::LLT<Eigen::MatrixXd> llt(normal_matrix);
        if (llt.info() != Eigen::Success) fail(ErrorKind::Numeric, "ridge system is not positive definite");
        sol.coefficients = llt.solve(psi.transpose() * normal_coords);
    }
    if (!sol.coefficients.allFinite()) fail(ErrorKind::Numeric, "least-squares solve produced non-finite values");
    sol.residual_norm = (psi * sol.coefficients - normal_coords).norm();
    return sol;
}

double auto_ridge(const Eigen::MatrixXd& psi) {
    if (psi.rows() >= psi.cols() || psi.cols() == 0) return 0.0;
    return 1e-6 * psi.colwise().squaredNorm().sum() / static_cast<double>(psi.cols());
}

QuadraticChart extract_chart(const ChartSolution& solution, const DesignLayout& layout,
                             const Eigen::VectorXd& base_value, const Eigen::VectorXd& base_point) {
    const Eigen::MatrixXd& x = solution.coefficients;
    const Index d = layout.intrinsic_dim;
    const Index n = x.cols();
    if (x.rows() != layout.size()) fail(ErrorKind::Internal, "coefficient rows do not match design layout");
    if (base_value.size() != n || base_point.size() != d)
        fail(ErrorKind::Internal, "chart base shapes do not match coefficients");

    QuadraticChart chart;
    chart.gradient = Eigen::MatrixXd::Zero(d, n);
    chart.hessians.assign(static_cast<std::size_t>(n), Eigen::MatrixXd::Zero(d, d));
    chart.base_value = base_value;
    chart.base_point = base_point;
    chart.ridge_used = solution.ridge_used;
    chart.residual_norm = solution.residual_norm;

    for (Index c = 0; c < layout.size(); ++c) {
        const ChartTerm& t = layout.terms[static_cast<std::size_t>(c)];
        for (Index a = 0; a < n; ++a) {
            Eigen::MatrixXd& h = chart.hessians[static_cast<std::size_t>(a)];
            switch (t.kind) {
            case ChartTerm::Kind::Linear: chart.gradient(t.i, a) = x(c, a); break;
            // c * u_i^2 = 1/2 H_ii u_i^2
            case ChartTerm::Kind::Square: h(t.i, t.i) = 2.0 * x(c, a); break;
            // c * u_i u_j = 1/2 (H_ij + H_ji) u_i u_j
            case ChartTerm::Kind::Cross:
                h(t.i, t.j) = x(c, a);
                h(t.j, t.i) = x(c, a);
                break;
            }
        }
    }
    return chart;
}

Eigen::VectorXd evaluate_chart(const QuadraticChart& chart, const Eigen::VectorXd& eta) {
    if (eta.size() != chart.intrinsic_dim()) fail(ErrorKind::Geometry, "chart evaluation point has wrong length");
    const Eigen::VectorXd delta = eta - chart.base_point;
    Eigen::VectorXd out = chart.base_value + chart.gradient.transpose() * delta;
    for (Index a = 0; a < chart.normal_dim(); ++a)
        out(a) += 0.5 * delta.dot(chart.hessians[static_cast<std::size_t>(a)] * delta);
    return out;
}

QuadraticChart fit_chart(const Eigen::MatrixXd& tangent_coords, const Eigen::MatrixXd& normal_coords, int order,
                         std::optional<double> ridge, const Eigen::VectorXd& base_value,
                         const Eigen::VectorXd& base_point) {
    const DesignMatrix dm = assemble_design(tangent_coords, order);
    const double weight = ridge ? *ridge : auto_ridge(dm.psi);
    return extract_chart(solve_chart(dm.psi, normal_coords, weight), dm.layout, base_value, base_point);
}

}  // namespace cems
