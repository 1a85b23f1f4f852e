#include "cems/tangent_basis.hpp"

#include "cems/error.hpp"

#include <Eigen/SVD>

#include <cmath>

namespace cems {

namespace {

constexpr double kRankTolerance = 1e-12;
constexpr double kSpectralGapTolerance = 1e-6;

void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
    Index best = 0;
    for (Index i = 1; i < v.size(); ++i)
        if (std::abs(v(i)) > std::abs(v(best))) best = i;
    if (v(best) < 0.0) v = -v;
}

}  // namespace

const char* to_string(CenterMode mode) { return mode == CenterMode::Point ? "point" : "batch"; }

CenterMode parse_center_mode(const std::string& text) {
    if (text == "point") return CenterMode::Point;
    if (text == "batch") return CenterMode::Batch;
    fail(ErrorKind::Config, "unknown mode '" + text + "' (expected point|batch)");
}

CenteredNeighborhood center(const Eigen::MatrixXd& members, const Eigen::VectorXd& anchor, CenterMode mode) {
    if (members.rows() < 2) fail(ErrorKind::Geometry, "centering needs at least two members");
    if (mode == CenterMode::Point && anchor.size() != members.cols())
        fail(ErrorKind::Geometry, "anchor dimension does not match members");
    CenteredNeighborhood c;
    c.mode = mode;
    c.origin = mode == CenterMode::Point ? anchor : Eigen::VectorXd(members.colwise().mean().transpose());
    c.deltas = members.rowwise() - c.origin.transpose();
    return c;
}

CenteredNeighborhood center(const Neighborhood& neighborhood, CenterMode mode) {
    return center(neighborhood.members, neighborhood.anchor, mode);
}

Eigen::MatrixXd OrthonormalBasis::full() const {
    Eigen::MatrixXd b(ambient_dim(), rank());
    b << tangent, normal;
    return b;
}

OrthonormalBasis fit_basis(const CenteredNeighborhood& centered, Index d) {
    const Index k = centered.deltas.rows();
    const Index dim = centered.deltas.cols();
    const Index r = std::min(k, dim);
    if (d < 1 || d >= r)
        fail(ErrorKind::Parameter, "intrinsic dimension d=" + std::to_string(d) + " must lie in [1, " +
                                       std::to_string(r - 1) + "] for k=" + std::to_string(k) +
                                       ", D=" + std::to_string(dim));
    if (!centered.deltas.allFinite()) fail(ErrorKind::Numeric, "non-finite neighborhood deltas");

    const Eigen::MatrixXd columns = centered.deltas.transpose();  // D x k
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(columns, Eigen::ComputeThinU);
    const Eigen::VectorXd& s = svd.singularValues();
    if (!(s(0) > 0.0)) fail(ErrorKind::Geometry, "degenerate neighborhood: all deltas are zero");
    if (s(d - 1) <= kRankTolerance * s(0))
        fail(ErrorKind::Geometry, "degenerate neighborhood: fewer than " + std::to_string(d) +
                                      " non-zero singular values");

    Eigen::MatrixXd u = svd.matrixU().leftCols(r);
    for (Index j = 0; j < r; ++j) fix_sign(u.col(j));

    OrthonormalBasis basis;
    basis.tangent = u.leftCols(d);
    basis.normal = u.rightCols(r - d);
    basis.singular_values = s.head(r);
    basis.near_degenerate = (s(d - 1) - s(d)) <= kSpectralGapTolerance * s(d - 1);
    return basis;
}

ProjectedNeighborhood project(const OrthonormalBasis& basis, const CenteredNeighborhood& centered) {
    if (centered.deltas.cols() != basis.ambient_dim())
        fail(ErrorKind::Geometry, "basis and neighborhood disagree on ambient dimension");
    return {centered.deltas * basis.tangent, centered.deltas * basis.normal};
}

Eigen::VectorXd unproject(const OrthonormalBasis& basis, const Eigen::VectorXd& u, const Eigen::VectorXd& g,
                          const Eigen::VectorXd& origin) {
    if (u.size() != basis.intrinsic_dim() || g.size() != basis.normal_dim() || origin.size() != basis.ambient_dim())
        fail(ErrorKind::Geometry, "unproject: coordinate shapes do not match basis");
    return basis.tangent * u + basis.normal * g + origin;
}

double reconstruction_residual(const OrthonormalBasis& basis, const CenteredNeighborhood& centered) {
    const Eigen::MatrixXd b = basis.full();
    const Eigen::MatrixXd coords = centered.deltas * b;
    return (centered.deltas - coords * b.transpose()).norm();
}

}  // namespace cems
