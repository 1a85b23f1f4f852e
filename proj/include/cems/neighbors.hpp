#pragma once

#include "cems/dataset.hpp"
#include "cems/rng.hpp"

#include <Eigen/Dense>

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace cems {

enum class Selection { Knn, Knnp, Random };

const char* to_string(Selection s);
Selection parse_selection(const std::string& text);

struct Neighbor {
    Index index = 0;
    double distance = 0.0;
};

/// Anchor plus k nearby joint samples.
struct Neighborhood {
    Index anchor_index = 0;
    Eigen::VectorXd anchor;  // coordinates of the anchor row
    std::vector<Index> member_indices;
    Eigen::MatrixXd members;  // k x D, row j is the dataset row member_indices[j]
    Selection strategy = Selection::Knn;
    bool include_anchor = false;

    Index size() const { return static_cast<Index>(member_indices.size()); }
};

/// Exact Euclidean nearest-neighbor queries over the rows of a point matrix.
/// Immutable after construction; concurrent queries are safe.
class NeighborIndex {
public:
    explicit NeighborIndex(Eigen::MatrixXd points);

    Index size() const { return points_.rows(); }
    Index dim() const { return points_.cols(); }
    const Eigen::MatrixXd& points() const { return points_; }

    /// The `count` rows closest to row `row`, ordered by (distance, index).
    /// The row itself is skipped unless `include_self`.
    std::vector<Neighbor> nearest(Index row, Index count, bool include_self = false) const;

    /// The `count` rows closest to an arbitrary query point.
    std::vector<Neighbor> nearest(const Eigen::VectorXd& query, Index count) const;

    /// Median pairwise distance; evaluated on first use over at most
    /// kMedianSampleRows evenly spaced rows.
    double median_pairwise_distance() const;

    static constexpr Index kMedianSampleRows = 1024;

private:
    std::vector<Neighbor> select(const Eigen::VectorXd& query, Index count, Index skip) const;

    Eigen::MatrixXd points_;
    struct MedianCache;
    std::shared_ptr<MedianCache> median_;
};

NeighborIndex build_index(const Eigen::MatrixXd& joint_samples);

/// The k nearest rows of the anchor; ties go to the lower row index. With
/// `include_anchor` the anchor is the first member and k - 1 neighbors follow.
Neighborhood knn_neighbors(const NeighborIndex& index, Index anchor, Index k, bool include_anchor = false);

struct KnnpOptions {
    Index pool_factor = 4;
    /// Additive distance offset in the 1/(dist + eps) weights. Defaults to
    /// 1e-8 times the median pairwise distance.
    std::optional<double> epsilon;
};

/// k members drawn without replacement from the pool_factor * k nearest
/// candidates, with probability proportional to 1 / (dist + eps).
Neighborhood knnp_neighbors(const NeighborIndex& index, Index anchor, Index k, Rng& rng,
                            bool include_anchor = false, const KnnpOptions& options = {});

/// k distinct uniformly chosen rows; the first row drawn is the anchor.
Neighborhood random_batch(const NeighborIndex& index, Index k, Rng& rng);

/// Uniformly chosen members around a fixed anchor.
Neighborhood random_neighbors(const NeighborIndex& index, Index anchor, Index k, Rng& rng,
                              bool include_anchor = false);

/// Dispatches on `strategy`.
Neighborhood select_neighbors(const NeighborIndex& index, Selection strategy, Index anchor, Index k,
                              bool include_anchor, Rng& rng);

}  // namespace cems
