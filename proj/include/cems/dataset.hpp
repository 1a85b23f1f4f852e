#pragma once

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

namespace cems {

using Index = Eigen::Index;

/// A point z = [x, y] on the joint input-output manifold.
using JointSample = Eigen::VectorXd;

struct Schema {
    Index feature_dim = 0;
    Index target_dim = 0;

    Index ambient_dim() const { return feature_dim + target_dim; }
};

/// Regression training set. Row i of `features` and row i of `targets`
/// describe the same observation.
struct Dataset {
    Eigen::MatrixXd features;
    Eigen::MatrixXd targets;
    std::vector<std::string> feature_names;
    std::vector<std::string> target_names;

    Index rows() const { return features.rows(); }
    Schema schema() const { return {features.cols(), targets.cols()}; }
    Index ambient_dim() const { return features.cols() + targets.cols(); }
};

/// Builds a dataset and fills missing column names with x1.., y1...
Dataset make_dataset(Eigen::MatrixXd features, Eigen::MatrixXd targets,
                     std::vector<std::string> feature_names = {},
                     std::vector<std::string> target_names = {});

/// Throws Schema/Data errors when the dataset invariants do not hold
/// (N >= 2, k1 >= 1, k2 >= 1, matching row counts, finite entries).
void validate(const Dataset& dataset);

JointSample concat_sample(const Schema& schema, const Eigen::VectorXd& x, const Eigen::VectorXd& y);
std::pair<Eigen::VectorXd, Eigen::VectorXd> split_sample(const Schema& schema, const JointSample& z);

/// N x D matrix whose rows are the joint samples [x_i, y_i].
Eigen::MatrixXd joint_matrix(const Dataset& dataset);

/// Inverse of joint_matrix; names are copied from `like`.
Dataset dataset_from_joint(const Dataset& like, const Eigen::MatrixXd& joint);

struct ColumnScale {
    double min = 0.0;
    double max = 0.0;
    bool constant = false;

    double forward(double v) const { return constant ? 0.5 : (v - min) / (max - min); }
    double inverse(double v) const { return constant ? min : v * (max - min) + min; }
};

struct NormalizationState {
    std::vector<ColumnScale> targets;
    bool features_scaled = false;
    std::vector<ColumnScale> features;  // empty unless features_scaled
};

struct NormalizeOptions {
    bool scale_features = false;
};

/// Min-max scales every target column to [0, 1] (and the feature columns
/// too when requested). Constant columns map to 0.5.
std::pair<Dataset, NormalizationState> normalize_targets(const Dataset& dataset,
                                                         NormalizeOptions options = {});

/// Applies previously computed statistics to another dataset with the same schema.
Dataset apply_normalization(const Dataset& dataset, const NormalizationState& state);

/// Restores target columns to original units. Features are left untouched.
Dataset denormalize_targets(const Dataset& dataset, const NormalizationState& state);

/// Restores targets and, if they were scaled, features.
Dataset denormalize_all(const Dataset& dataset, const NormalizationState& state);

}  // namespace cems
