#include "cems/neighbors.hpp"

#include "cems/error.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>

namespace cems {

struct NeighborIndex::MedianCache {
    std::once_flag once;
    double value = 0.0;
};

const char* to_string(Selection s) {
    switch (s) {
    case Selection::Knn: return "knn";
    case Selection::Knnp: return "knnp";
    case Selection::Random: return "random";
    }
    return "unknown";
}

Selection parse_selection(const std::string& text) {
    if (text == "knn") return Selection::Knn;
    if (text == "knnp") return Selection::Knnp;
    if (text == "random") return Selection::Random;
    fail(ErrorKind::Config, "unknown selection strategy '" + text + "' (expected knn|knnp|random)");
}

NeighborIndex::NeighborIndex(Eigen::MatrixXd points)
    : points_(std::move(points)), median_(std::make_shared<MedianCache>()) {
    if (points_.rows() < 2) fail(ErrorKind::Parameter, "neighbor index needs at least two points");
    if (points_.cols() < 1) fail(ErrorKind::Parameter, "neighbor index needs at least one column");
    if (!points_.allFinite()) fail(ErrorKind::Data, "neighbor index received non-finite points");
}

std::vector<Neighbor> NeighborIndex::select(const Eigen::VectorXd& query, Index count, Index skip) const {
    const Index n = points_.rows();
    std::vector<Neighbor> all;
    all.reserve(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        if (i == skip) continue;
        all.push_back({i, (points_.row(i).transpose() - query).squaredNorm()});
    }
    const auto by_distance = [](const Neighbor& a, const Neighbor& b) {
        return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
    };
    count = std::min<Index>(count, static_cast<Index>(all.size()));
    auto cut = all.begin() + count;
    std::nth_element(all.begin(), cut, all.end(), by_distance);
    all.resize(static_cast<std::size_t>(count));
    std::sort(all.begin(), all.end(), by_distance);
    for (auto& nb : all) nb.distance = std::sqrt(nb.distance);
    return all;
}

std::vector<Neighbor> NeighborIndex::nearest(Index row, Index count, bool include_self) const {
    if (row < 0 || row >= size()) fail(ErrorKind::Parameter, "anchor index out of range");
    return select(points_.row(row).transpose(), count, include_self ? -1 : row);
}

std::vector<Neighbor> NeighborIndex::nearest(const Eigen::VectorXd& query, Index count) const {
    if (query.size() != dim()) fail(ErrorKind::Geometry, "query dimension does not match index");
    return select(query, count, -1);
}

double NeighborIndex::median_pairwise_distance() const {
    std::call_once(median_->once, [this] {
        const Index n = points_.rows();
        const Index m = std::min(n, kMedianSampleRows);
        std::vector<Index> rows(static_cast<std::size_t>(m));
        for (Index i = 0; i < m; ++i) rows[static_cast<std::size_t>(i)] = (i * n) / m;
        std::vector<double> dists;
        dists.reserve(static_cast<std::size_t>(m * (m - 1) / 2));
        for (Index a = 0; a < m; ++a)
            for (Index b = a + 1; b < m; ++b)
                dists.push_back((points_.row(rows[a]) - points_.row(rows[b])).norm());
        auto mid = dists.begin() + static_cast<std::ptrdiff_t>(dists.size() / 2);
        std::nth_element(dists.begin(), mid, dists.end());
        median_->value = *mid;
    });
    return median_->value;
}

NeighborIndex build_index(const Eigen::MatrixXd& joint_samples) { return NeighborIndex(joint_samples); }

namespace {

void check_k(const NeighborIndex& index, Index k, bool include_anchor) {
    const Index max_k = include_anchor ? index.size() : index.size() - 1;
    if (k < 1 || k > max_k)
        fail(ErrorKind::Parameter, "neighborhood size k=" + std::to_string(k) + " outside [1, " +
                                       std::to_string(max_k) + "]");
}

Neighborhood assemble(const NeighborIndex& index, Index anchor, std::vector<Index> members, Selection strategy,
                      bool include_anchor) {
    Neighborhood nb;
    nb.anchor_index = anchor;
    nb.anchor = index.points().row(anchor).transpose();
    nb.strategy = strategy;
    nb.include_anchor = include_anchor;
    nb.members.resize(static_cast<Index>(members.size()), index.dim());
    for (std::size_t j = 0; j < members.size(); ++j)
        nb.members.row(static_cast<Index>(j)) = index.points().row(members[j]);
    nb.member_indices = std::move(members);
    return nb;
}

std::size_t uniform_below(Rng& rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

}  // namespace

Neighborhood knn_neighbors(const NeighborIndex& index, Index anchor, Index k, bool include_anchor) {
    check_k(index, k, include_anchor);
    const Index wanted = include_anchor ? k - 1 : k;
    std::vector<Index> members;
    members.reserve(static_cast<std::size_t>(k));
    if (include_anchor) members.push_back(anchor);
    for (const Neighbor& nb : index.nearest(anchor, wanted)) members.push_back(nb.index);
    return assemble(index, anchor, std::move(members), Selection::Knn, include_anchor);
}

Neighborhood knnp_neighbors(const NeighborIndex& index, Index anchor, Index k, Rng& rng, bool include_anchor,
                            const KnnpOptions& options) {
    check_k(index, k, include_anchor);
    if (options.pool_factor < 1) fail(ErrorKind::Parameter, "knnp pool factor must be >= 1");
    const Index wanted = include_anchor ? k - 1 : k;
    const Index pool_size = std::min(index.size() - 1, options.pool_factor * std::max<Index>(wanted, 1));
    std::vector<Neighbor> pool = index.nearest(anchor, pool_size);

    const double eps = options.epsilon ? *options.epsilon : 1e-8 * index.median_pairwise_distance();
    if (!(eps >= 0.0)) fail(ErrorKind::Parameter, "knnp epsilon must be non-negative");
    std::vector<double> weights(pool.size());
    const bool has_zero = std::any_of(pool.begin(), pool.end(), [](const Neighbor& n) { return n.distance == 0.0; });
    for (std::size_t i = 0; i < pool.size(); ++i) {
        if (eps == 0.0 && has_zero)
            weights[i] = pool[i].distance == 0.0 ? 1.0 : 0.0;  // infinite weights dominate
        else
            weights[i] = 1.0 / (pool[i].distance + eps);
    }

    std::vector<Index> members;
    members.reserve(static_cast<std::size_t>(k));
    if (include_anchor) members.push_back(anchor);
    std::vector<bool> used(pool.size(), false);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (Index draw = 0; draw < wanted; ++draw) {
        double total = 0.0;
        for (std::size_t i = 0; i < pool.size(); ++i)
            if (!used[i]) total += weights[i];
        std::size_t pick = pool.size();
        if (total > 0.0) {
            double target = unit(rng) * total;
            for (std::size_t i = 0; i < pool.size(); ++i) {
                if (used[i] || weights[i] <= 0.0) continue;
                pick = i;
                target -= weights[i];
                if (target < 0.0) break;
            }
        } else {
            for (std::size_t i = 0; i < pool.size(); ++i)
                if (!used[i]) {
                    pick = i;
                    break;
                }
        }
        if (pick == pool.size()) fail(ErrorKind::Internal, "knnp candidate pool exhausted");
        members.push_back(pool[pick].index);
        used[pick] = true;
    }
    return assemble(index, anchor, std::move(members), Selection::Knnp, include_anchor);
}

Neighborhood random_neighbors(const NeighborIndex& index, Index anchor, Index k, Rng& rng, bool include_anchor) {
    check_k(index, k, include_anchor);
    if (anchor < 0 || anchor >= index.size()) fail(ErrorKind::Parameter, "anchor index out of range");
    std::vector<Index> candidates;
    candidates.reserve(static_cast<std::size_t>(index.size() - 1));
    for (Index i = 0; i < index.size(); ++i)
        if (i != anchor) candidates.push_back(i);
    const std::size_t wanted = static_cast<std::size_t>(include_anchor ? k - 1 : k);
    for (std::size_t i = 0; i < wanted; ++i) {
        const std::size_t j = i + uniform_below(rng, candidates.size() - i);
        std::swap(candidates[i], candidates[j]);
    }
    std::vector<Index> members;
    members.reserve(static_cast<std::size_t>(k));
    if (include_anchor) members.push_back(anchor);
    members.insert(members.end(), candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(wanted));
    return assemble(index, anchor, std::move(members), Selection::Random, include_anchor);
}

Neighborhood random_batch(const NeighborIndex& index, Index k, Rng& rng) {
    if (k < 1 || k > index.size())
        fail(ErrorKind::Parameter, "batch size k=" + std::to_string(k) + " outside [1, " +
                                       std::to_string(index.size()) + "]");
    std::vector<Index> rows(static_cast<std::size_t>(index.size()));
    std::iota(rows.begin(), rows.end(), Index{0});
    for (std::size_t i = 0; i < static_cast<std::size_t>(k); ++i) {
        const std::size_t j = i + uniform_below(rng, rows.size() - i);
        std::swap(rows[i], rows[j]);
    }
    rows.resize(static_cast<std::size_t>(k));
    const Index anchor = rows.front();
    return assemble(index, anchor, std::move(rows), Selection::Random, true);
}

Neighborhood select_neighbors(const NeighborIndex& index, Selection strategy, Index anchor, Index k,
                              bool include_anchor, Rng& rng) {
    switch (strategy) {
    case Selection::Knn: return knn_neighbors(index, anchor, k, include_anchor);
    case Selection::Knnp: return knnp_neighbors(index, anchor, k, rng, include_anchor);
    case Selection::Random: return random_neighbors(index, anchor, k, rng, include_anchor);
    }
    fail(ErrorKind::Internal, "unhandled selection strategy");
}

}  // namespace cems
