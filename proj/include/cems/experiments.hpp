#pragma once

#include "cems/dataset.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace cems {

enum class CurveKind { Sine, Circle, Quadratic };

const char* to_string(CurveKind kind);
CurveKind parse_curve_kind(const std::string& text);

/// Euclidean distance from `point` to the graph {(t, sin t)}.
double distance_to_sine(double x, double y);

/// Distance to the graph {(t, a t^2)}.
double distance_to_parabola(double x, double y, double a);

struct OrderExperimentConfig {
    CurveKind curve = CurveKind::Sine;
    std::vector<double> scales{0.02, 0.04, 0.08, 0.16};
    std::vector<int> orders{1, 2};
    Index n_seeds = 20;
    Index neighbors_per_side = 4;
    double circle_radius = 1.0;
    std::uint64_t seed = 0;
    int workers = 1;
};

struct CurvatureSweepConfig {
    std::vector<double> curvatures{1.0, 4.0, 16.0, 64.0};
    Index intrinsic_d = 2;
    Index ambient_D = 6;
    Index n = 3000;
    double noise_sd = 1e-3;
    double sigma = 0.02;
    Index k = 32;
    Index anchors_per_seed = 20;
    Index draws_per_anchor = 4;
    double foma_lambda = 0.5;
    Index n_seeds = 20;
    std::uint64_t seed = 0;
    int workers = 1;
};

struct ReportRow {
    double parameter = 0.0;  // sampling radius h or curvature
    std::string method;
    double mean_error = 0.0;
    double sd_error = 0.0;
    Index count = 0;
};

struct SlopeFit {
    std::string method;
    double slope = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    bool exact = false;  // errors at round-off level for every scale
};

struct ExperimentReport {
    std::string kind;            // "order" or "curvature"
    std::string parameter_name;  // "h" or "curvature"
    std::vector<std::pair<std::string, std::string>> config;
    std::vector<ReportRow> rows;
    std::vector<SlopeFit> slopes;                      // order experiment
    std::vector<std::pair<double, double>> ratios;     // curvature -> first/second error ratio
    double spearman = 0.0;                             // rank correlation of ratios with curvature
    double runtime_seconds = 0.0;                      // not serialized

    const ReportRow* find(double parameter, const std::string& method) const;
    const SlopeFit* slope_for(const std::string& method) const;
};

/// Samples each curve at tangent distance h from seeded anchors using the
/// first- and/or second-order point chart fitted on 2m curve points spaced
/// h/m apart in arc length, and records the distance to the true curve.
/// Slopes are least-squares fits of log(mean error) on log(h); intervals
/// come from the spread of per-seed slopes.
ExperimentReport run_order_experiment(const OrderExperimentConfig& config);

/// For each curvature, generates noisy hyperspheres (one per seed) and
/// measures the distance of CEMS second-order, first-order and FOMA samples
/// to the sphere in feature space.
ExperimentReport run_curvature_sweep(const CurvatureSweepConfig& config);

/// Tab-separated table with a '#'-prefixed metadata header.
void write_report(const ExperimentReport& report, std::ostream& out);

double spearman_correlation(const std::vector<double>& a, const std::vector<double>& b);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace cems
