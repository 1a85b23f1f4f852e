#pragma once

#include "cems/dataset.hpp"
#include "cems/neighbors.hpp"
#include "cems/quadratic_chart.hpp"
#include "cems/rng.hpp"
#include "cems/tangent_basis.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cems {

enum class Method { Cems, Foma };

const char* to_string(Method m);
Method parse_method(const std::string& text);

struct SamplerConfig {
    double sigma = 0.1;                   // noise std-dev in normalized units
    std::optional<Index> intrinsic_dim;   // empty = estimate with TwoNN
    Index k = 16;                         // neighborhood size (the training batch size)
    CenterMode mode = CenterMode::Batch;
    Selection selection = Selection::Knn;
    std::optional<double> ridge;          // empty = auto_ridge
    std::uint64_t seed = 0;
    int order = 2;
    Method method = Method::Cems;
    double lambda = 0.5;                  // FOMA normal-space scale
    double failure_budget = 0.01;         // fraction of n_gen anchors allowed to fail
    int workers = 1;
};

/// Config-level checks against a dataset of `rows` x `ambient_dim`.
void validate(const SamplerConfig& config, Index rows, Index ambient_dim);

/// `mean` plus independent N(0, sigma^2) draws; sigma == 0 returns `mean`.
Eigen::VectorXd draw_noise(Rng& rng, double sigma, const Eigen::VectorXd& mean);

struct SampleRecord {
    Index anchor = 0;      // anchor row of the neighborhood
    Index source = 0;      // member row the sample was generated around
    Eigen::VectorXd eta;   // tangent coordinates the sample was drawn at
    double residual = 0.0; // chart least-squares residual
};

struct AugmentedSamples {
    Eigen::MatrixXd samples;  // n x D, normalized joint space
    std::vector<SampleRecord> provenance;
    Index intrinsic_dim = 0;
    Index failures = 0;
    Index near_degenerate = 0;

    Index size() const { return samples.rows(); }
};

/// Point-wise chart: basis centered at the anchor, chart in Maclaurin form.
struct PointModel {
    OrthonormalBasis basis;
    Eigen::VectorXd origin;
    QuadraticChart chart;
};

PointModel fit_point_model(const Eigen::MatrixXd& members, const Eigen::VectorXd& anchor, Index d, int order,
                           std::optional<double> ridge);

/// Shared basis of a batch centered at the member mean.
struct BatchModel {
    CenteredNeighborhood centered;
    OrthonormalBasis basis;
    ProjectedNeighborhood projected;
};

BatchModel fit_batch_model(const Eigen::MatrixXd& members, Index d);

/// Chart around member l, fitted on the offsets of every other member.
QuadraticChart fit_member_chart(const BatchModel& model, Index l, int order, std::optional<double> ridge);

/// B_u [eta, g(eta)] + origin.
Eigen::VectorXd chart_to_ambient(const OrthonormalBasis& basis, const QuadraticChart& chart,
                                 const Eigen::VectorXd& origin, const Eigen::VectorXd& eta);

/// One sample around `anchor`: kNN neighborhood (anchor excluded), chart at
/// the anchor, eta ~ N(0, sigma^2 I_d).
JointSample cems_point(const NeighborIndex& index, Index anchor, const SamplerConfig& config, Rng& rng);

/// k samples from one shared neighborhood that includes the anchor.
AugmentedSamples cems_batch(const NeighborIndex& index, Index anchor, const SamplerConfig& config, Rng& rng);

/// Same pipelines with every Hessian forced to zero.
JointSample cems_first_order_point(const NeighborIndex& index, Index anchor, const SamplerConfig& config, Rng& rng);
AugmentedSamples cems_first_order_batch(const NeighborIndex& index, Index anchor, const SamplerConfig& config,
                                        Rng& rng);

/// FOMA baseline: member j maps to B_T u_j + lambda B_N g_j + origin.
/// Centering follows config.mode; lambda may be 0 (pure tangent projection).
AugmentedSamples foma_sample(const Neighborhood& neighborhood, double lambda, const SamplerConfig& config);

/// Generates n_gen samples from a normalized dataset. Anchors are drawn
/// uniformly with replacement; work unit t uses stream_rng(seed, t), so the
/// result does not depend on config.workers.
AugmentedSamples augment_dataset(const Dataset& normalized, const SamplerConfig& config, Index n_gen);

}  // namespace cems
