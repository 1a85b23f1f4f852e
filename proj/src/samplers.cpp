#include "cems/samplers.hpp"

#include "cems/error.hpp"
#include "cems/intrinsic_dim.hpp"
#include "cems/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <variant>

namespace cems {

const char* to_string(Method m) { return m == Method::Cems ? "cems" : "foma"; }

Method parse_method(const std::string& text) {
    if (text == "cems") return Method::Cems;
    if (text == "foma") return Method::Foma;
    fail(ErrorKind::Config, "unknown method '" + text + "' (expected cems|foma)");
}

void validate(const SamplerConfig& config, Index rows, Index ambient_dim) {
    const auto bad = [](const std::string& what) { fail(ErrorKind::Config, what); };
    if (!(config.sigma >= 0.0) || !std::isfinite(config.sigma)) bad("sigma must be a finite value >= 0");
    if (config.order != 1 && config.order != 2) bad("order must be 1 or 2");
    if (config.ridge && !(*config.ridge >= 0.0)) bad("ridge must be >= 0");
    if (!(config.lambda >= 0.0 && config.lambda <= 1.0)) bad("lambda must lie in [0, 1]");
    if (!(config.failure_budget >= 0.0 && config.failure_budget <= 1.0)) bad("failure budget must lie in [0, 1]");
    if (config.workers < 1) bad("workers must be >= 1");
    if (ambient_dim < 2) bad("joint samples need at least two dimensions");
    if (config.intrinsic_dim && (*config.intrinsic_dim < 1 || *config.intrinsic_dim > ambient_dim - 1))
        bad("intrinsic dimension must lie in [1, " + std::to_string(ambient_dim - 1) + "]");
    const bool with_anchor = config.mode == CenterMode::Batch;
    const Index max_k = with_anchor ? rows : rows - 1;
    if (config.k < 2 || config.k > max_k)
        bad("k=" + std::to_string(config.k) + " outside [2, " + std::to_string(max_k) + "] for " +
            std::to_string(rows) + " rows in " + to_string(config.mode) + " mode");
}

Eigen::VectorXd draw_noise(Rng& rng, double sigma, const Eigen::VectorXd& mean) {
    if (sigma == 0.0) return mean;
    std::normal_distribution<double> normal(0.0, sigma);
    Eigen::VectorXd out = mean;
    for (Index i = 0; i < out.size(); ++i) out(i) += normal(rng);
    return out;
}

PointModel fit_point_model(const Eigen::MatrixXd& members, const Eigen::VectorXd& anchor, Index d, int order,
                           std::optional<double> ridge) {
    PointModel model;
    const CenteredNeighborhood centered = center(members, anchor, CenterMode::Point);
    model.basis = fit_basis(centered, d);
    model.origin = centered.origin;
    const ProjectedNeighborhood p = project(model.basis, centered);
    model.chart = fit_chart(p.tangent_coords, p.normal_coords, order, ridge,
                            Eigen::VectorXd::Zero(model.basis.normal_dim()), Eigen::VectorXd::Zero(d));
    return model;
}

BatchModel fit_batch_model(const Eigen::MatrixXd& members, Index d) {
    BatchModel model;
    model.centered = center(members, Eigen::VectorXd(), CenterMode::Batch);
    model.basis = fit_basis(model.centered, d);
    model.projected = project(model.basis, model.centered);
    return model;
}

QuadraticChart fit_member_chart(const BatchModel& model, Index l, int order, std::optional<double> ridge) {
    const Eigen::MatrixXd& u = model.projected.tangent_coords;
    const Eigen::MatrixXd& g = model.projected.normal_coords;
    const Index k = u.rows();
    if (l < 0 || l >= k) fail(ErrorKind::Parameter, "member index out of range");
    Eigen::MatrixXd du(k - 1, u.cols());
    Eigen::MatrixXd dg(k - 1, g.cols());
    for (Index j = 0, row = 0; j < k; ++j) {
        if (j == l) continue;
        du.row(row) = u.row(j) - u.row(l);
        dg.row(row) = g.row(j) - g.row(l);
        ++row;
    }
    return fit_chart(du, dg, order, ridge, g.row(l).transpose(), u.row(l).transpose());
}

Eigen::VectorXd chart_to_ambient(const OrthonormalBasis& basis, const QuadraticChart& chart,
                                 const Eigen::VectorXd& origin, const Eigen::VectorXd& eta) {
    return unproject(basis, eta, evaluate_chart(chart, eta), origin);
}

namespace {

Index require_dim(const SamplerConfig& config) {
    if (!config.intrinsic_dim) fail(ErrorKind::Config, "intrinsic dimension must be resolved before sampling");
    return *config.intrinsic_dim;
}

struct PointDraw {
    JointSample sample;
    SampleRecord record;
    bool near_degenerate = false;
};

PointDraw point_draw(const NeighborIndex& index, Index anchor, const SamplerConfig& config, Rng& rng) {
    const Index d = require_dim(config);
    const Neighborhood nb = select_neighbors(index, config.selection, anchor, config.k, false, rng);
    const PointModel model = fit_point_model(nb.members, nb.anchor, d, config.order, config.ridge);
    PointDraw out;
    out.record.anchor = anchor;
    out.record.source = anchor;
    out.record.eta = draw_noise(rng, config.sigma, Eigen::VectorXd::Zero(d));
    out.record.residual = model.chart.residual_norm;
    out.sample = chart_to_ambient(model.basis, model.chart, model.origin, out.record.eta);
    out.near_degenerate = model.basis.near_degenerate;
    return out;
}

AugmentedSamples batch_from_neighborhood(const Neighborhood& nb, const SamplerConfig& config, Rng& rng) {
    const Index d = require_dim(config);
    const BatchModel model = fit_batch_model(nb.members, d);
    const Index k = nb.members.rows();
    AugmentedSamples out;
    out.intrinsic_dim = d;
    out.near_degenerate = model.basis.near_degenerate ? 1 : 0;
    out.samples.resize(k, nb.members.cols());
    out.provenance.reserve(static_cast<std::size_t>(k));
    for (Index l = 0; l < k; ++l) {
        const QuadraticChart chart = fit_member_chart(model, l, config.order, config.ridge);
        SampleRecord rec;
        rec.anchor = nb.anchor_index;
        rec.source = nb.member_indices[static_cast<std::size_t>(l)];
        rec.eta = draw_noise(rng, config.sigma, chart.base_point);
        rec.residual = chart.residual_norm;
        out.samples.row(l) = chart_to_ambient(model.basis, chart, model.centered.origin, rec.eta).transpose();
        out.provenance.push_back(std::move(rec));
    }
    return out;
}

SamplerConfig with_order(SamplerConfig config, int order) {
    config.order = order;
    return config;
}

}  // namespace

JointSample cems_point(const NeighborIndex& index, Index anchor, const SamplerConfig& config, Rng& rng) {
    return point_draw(index, anchor, config, rng).sample;
}

AugmentedSamples cems_batch(const NeighborIndex& index, Index anchor, const SamplerConfig& config, Rng& rng) {
    const Neighborhood nb = select_neighbors(index, config.selection, anchor, config.k, true, rng);
    return batch_from_neighborhood(nb, config, rng);
}

JointSample cems_first_order_point(const NeighborIndex& index, Index anchor, const SamplerConfig& config, Rng& rng) {
    return cems_point(index, anchor, with_order(config, 1), rng);
}

AugmentedSamples cems_first_order_batch(const NeighborIndex& index, Index anchor, const SamplerConfig& config,
                                        Rng& rng) {
    return cems_batch(index, anchor, with_order(config, 1), rng);
}

AugmentedSamples foma_sample(const Neighborhood& neighborhood, double lambda, const SamplerConfig& config) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) fail(ErrorKind::Parameter, "FOMA lambda must lie in [0, 1]");
    const Index d = require_dim(config);
    const CenteredNeighborhood centered = center(neighborhood, config.mode);
    const OrthonormalBasis basis = fit_basis(centered, d);
    const ProjectedNeighborhood p = project(basis, centered);
    const double residual = reconstruction_residual(basis, centered);

    const Index k = neighborhood.members.rows();
    AugmentedSamples out;
    out.intrinsic_dim = d;
    out.near_degenerate = basis.near_degenerate ? 1 : 0;
    out.samples.resize(k, neighborhood.members.cols());
    for (Index j = 0; j < k; ++j) {
        const Eigen::VectorXd u = p.tangent_coords.row(j).transpose();
        const Eigen::VectorXd g = lambda * p.normal_coords.row(j).transpose();
        out.samples.row(j) = unproject(basis, u, g, centered.origin).transpose();
        out.provenance.push_back({neighborhood.anchor_index, neighborhood.member_indices[static_cast<std::size_t>(j)],
                                  u, residual});
    }
    return out;
}

namespace {

/// Output of one work unit; an error message marks a failed anchor.
using UnitResult = std::variant<AugmentedSamples, Error>;

UnitResult run_unit(const NeighborIndex& index, const SamplerConfig& config, std::uint64_t unit) {
    Rng rng = stream_rng(config.seed, unit);
    const Index anchor =
        static_cast<Index>(std::uniform_int_distribution<std::uint64_t>(0, static_cast<std::uint64_t>(index.size() - 1))(rng));
    try {
        const bool with_anchor = config.mode == CenterMode::Batch;
        if (config.method == Method::Foma) {
            const Neighborhood nb = select_neighbors(index, config.selection, anchor, config.k, with_anchor, rng);
            return foma_sample(nb, config.lambda, config);
        }
        if (config.mode == CenterMode::Batch) return cems_batch(index, anchor, config, rng);
        PointDraw draw = point_draw(index, anchor, config, rng);
        AugmentedSamples one;
        one.intrinsic_dim = *config.intrinsic_dim;
        one.samples = draw.sample.transpose();
        one.provenance.push_back(std::move(draw.record));
        one.near_degenerate = draw.near_degenerate ? 1 : 0;
        return one;
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Geometry || e.kind() == ErrorKind::Numeric) return e;
        throw;
    }
}

}  // namespace

AugmentedSamples augment_dataset(const Dataset& normalized, const SamplerConfig& config_in, Index n_gen) {
    validate(normalized);
    if (n_gen < 1) fail(ErrorKind::Config, "n_gen must be >= 1");
    const Eigen::MatrixXd joint = joint_matrix(normalized);
    validate(config_in, joint.rows(), joint.cols());

    SamplerConfig config = config_in;
    if (!config.intrinsic_dim) config.intrinsic_dim = twonn_estimate(joint).d_used;
    const NeighborIndex index(joint);

    const Index per_unit = (config.mode == CenterMode::Batch || config.method == Method::Foma) ? config.k : 1;
    const auto allowed_failures = static_cast<Index>(std::floor(config.failure_budget * static_cast<double>(n_gen)));

    AugmentedSamples out;
    out.intrinsic_dim = *config.intrinsic_dim;
    out.samples.resize(n_gen, joint.cols());
    out.provenance.reserve(static_cast<std::size_t>(n_gen));

    Index produced = 0;
    std::uint64_t next_unit = 0;
    std::string last_failure;
    while (produced < n_gen) {
        const Index remaining = n_gen - produced;
        const Index wave = std::max<Index>((remaining + per_unit - 1) / per_unit, config.workers);
        std::vector<std::optional<UnitResult>> results(static_cast<std::size_t>(wave));
        parallel_for(results.size(), config.workers, [&](std::size_t i) {
            results[i] = run_unit(index, config, next_unit + i);
        });

        for (Index i = 0; i < wave && produced < n_gen; ++i) {
            UnitResult& r = *results[static_cast<std::size_t>(i)];
            if (const Error* e = std::get_if<Error>(&r)) {
                ++out.failures;
                last_failure = e->what();
                if (out.failures > allowed_failures)
                    fail(ErrorKind::Geometry, "failure budget exceeded after " + std::to_string(out.failures) +
                                                  " failed anchors; last: " + last_failure);
                continue;
            }
            AugmentedSamples& unit = std::get<AugmentedSamples>(r);
            out.near_degenerate += unit.near_degenerate;
            const Index take = std::min(unit.size(), n_gen - produced);
            out.samples.middleRows(produced, take) = unit.samples.topRows(take);
            for (Index j = 0; j < take; ++j) out.provenance.push_back(std::move(unit.provenance[static_cast<std::size_t>(j)]));
            produced += take;
        }
        next_unit += static_cast<std::uint64_t>(wave);
    }
    return out;
}

}  // namespace cems
