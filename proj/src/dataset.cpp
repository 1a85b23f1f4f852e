#include "cems/dataset.hpp"

#include "cems/error.hpp"

#include <algorithm>
#include <cmath>

namespace cems {

namespace {

std::vector<std::string> default_names(const std::string& prefix, Index count) {
    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(count));
    for (Index i = 0; i < count; ++i) names.push_back(prefix + std::to_string(i + 1));
    return names;
}

std::vector<ColumnScale> column_scales(const Eigen::MatrixXd& m) {
    std::vector<ColumnScale> scales;
    scales.reserve(static_cast<std::size_t>(m.cols()));
    for (Index c = 0; c < m.cols(); ++c) {
        ColumnScale s;
        s.min = m.col(c).minCoeff();
        s.max = m.col(c).maxCoeff();
        s.constant = !(s.max > s.min);
        scales.push_back(s);
    }
    return scales;
}

Eigen::MatrixXd map_columns(const Eigen::MatrixXd& m, const std::vector<ColumnScale>& scales, bool inverse) {
    if (static_cast<Index>(scales.size()) != m.cols())
        fail(ErrorKind::Schema, "normalization state has " + std::to_string(scales.size()) +
                                    " columns, data has " + std::to_string(m.cols()));
    Eigen::MatrixXd out(m.rows(), m.cols());
    for (Index c = 0; c < m.cols(); ++c) {
        const ColumnScale& s = scales[static_cast<std::size_t>(c)];
        for (Index r = 0; r < m.rows(); ++r)
            out(r, c) = inverse ? s.inverse(m(r, c)) : s.forward(m(r, c));
    }
    return out;
}

}  // namespace

Dataset make_dataset(Eigen::MatrixXd features, Eigen::MatrixXd targets,
                     std::vector<std::string> feature_names, std::vector<std::string> target_names) {
    Dataset d;
    if (feature_names.empty()) feature_names = default_names("x", features.cols());
    if (target_names.empty()) target_names = default_names("y", targets.cols());
    d.features = std::move(features);
    d.targets = std::move(targets);
    d.feature_names = std::move(feature_names);
    d.target_names = std::move(target_names);
    return d;
}

void validate(const Dataset& dataset) {
    if (dataset.features.cols() < 1) fail(ErrorKind::Schema, "dataset needs at least one feature column");
    if (dataset.targets.cols() < 1) fail(ErrorKind::Schema, "dataset needs at least one target column");
    if (dataset.features.rows() != dataset.targets.rows())
        fail(ErrorKind::Schema, "feature and target row counts differ");
    if (dataset.rows() < 2) fail(ErrorKind::Schema, "dataset needs at least two rows");
    if (static_cast<Index>(dataset.feature_names.size()) != dataset.features.cols() ||
        static_cast<Index>(dataset.target_names.size()) != dataset.targets.cols())
        fail(ErrorKind::Schema, "column name count does not match column count");
    if (!dataset.features.allFinite() || !dataset.targets.allFinite())
        fail(ErrorKind::Data, "dataset contains non-finite values");
}

JointSample concat_sample(const Schema& schema, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    if (schema.feature_dim < 1 || schema.target_dim < 1)
        fail(ErrorKind::Schema, "schema needs at least one feature and one target");
    if (x.size() != schema.feature_dim || y.size() != schema.target_dim)
        fail(ErrorKind::Schema, "sample has " + std::to_string(x.size()) + "+" + std::to_string(y.size()) +
                                    " entries, schema expects " + std::to_string(schema.feature_dim) + "+" +
                                    std::to_string(schema.target_dim));
    if (!x.allFinite() || !y.allFinite()) fail(ErrorKind::Data, "sample contains non-finite values");
    JointSample z(schema.ambient_dim());
    z << x, y;
    return z;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> split_sample(const Schema& schema, const JointSample& z) {
    if (z.size() != schema.ambient_dim())
        fail(ErrorKind::Schema, "joint sample length does not match schema");
    return {z.head(schema.feature_dim), z.tail(schema.target_dim)};
}

Eigen::MatrixXd joint_matrix(const Dataset& dataset) {
    Eigen::MatrixXd z(dataset.rows(), dataset.ambient_dim());
    z << dataset.features, dataset.targets;
    return z;
}

Dataset dataset_from_joint(const Dataset& like, const Eigen::MatrixXd& joint) {
    const Index k1 = like.features.cols();
    const Index k2 = like.targets.cols();
    if (joint.cols() != k1 + k2) fail(ErrorKind::Schema, "joint matrix width does not match schema");
    Dataset out;
    out.features = joint.leftCols(k1);
    out.targets = joint.rightCols(k2);
    out.feature_names = like.feature_names;
    out.target_names = like.target_names;
    return out;
}

std::pair<Dataset, NormalizationState> normalize_targets(const Dataset& dataset, NormalizeOptions options) {
    validate(dataset);
    NormalizationState state;
    state.targets = column_scales(dataset.targets);
    state.features_scaled = options.scale_features;
    if (options.scale_features) state.features = column_scales(dataset.features);
    return {apply_normalization(dataset, state), state};
}

Dataset apply_normalization(const Dataset& dataset, const NormalizationState& state) {
    Dataset out = dataset;
    out.targets = map_columns(dataset.targets, state.targets, false);
    if (state.features_scaled) out.features = map_columns(dataset.features, state.features, false);
    return out;
}

Dataset denormalize_targets(const Dataset& dataset, const NormalizationState& state) {
    Dataset out = dataset;
    out.targets = map_columns(dataset.targets, state.targets, true);
    return out;
}

Dataset denormalize_all(const Dataset& dataset, const NormalizationState& state) {
    Dataset out = denormalize_targets(dataset, state);
    if (state.features_scaled) out.features = map_columns(dataset.features, state.features, true);
    return out;
}

}  // namespace cems
