#pragma once

#include "cems/error.hpp"
#include "cems/experiments.hpp"
#include "cems/intrinsic_dim.hpp"
#include "cems/samplers.hpp"
#include "cems/synthetic.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace cems {

/// Everything the augment command needs.
struct RunConfig {
    SamplerConfig sampler;
    std::string input;
    std::string output;
    std::vector<std::string> targets;
    bool scale_features = true;  // min-max the feature columns as well as the targets
    Index n_gen = 0;             // 0 = one sample per training row
    bool append = false;
    bool denormalize = false;
    bool provenance = false;
};

struct AugmentSummary {
    Index rows_in = 0;
    Index n_gen = 0;
    Index rows_written = 0;
    Index failures = 0;
    Index near_degenerate = 0;
    Index d_used = 0;
    double d_real = 0.0;  // 0 when the dimension was given explicitly
    double runtime_seconds = 0.0;
};

/// load -> normalize -> (TwoNN) -> augment_dataset -> save. Prints the
/// effective configuration and a summary to `log`.
AugmentSummary cmd_augment(const RunConfig& config, std::ostream& log);

/// TwoNN over the normalized joint samples of a CSV. Without target
/// selectors the last column is treated as the target.
DimEstimate cmd_estimate_dim(const std::string& input, const std::vector<std::string>& targets, bool scale_features,
                             std::ostream& log);

/// Writes the generated CSV and a `<output>.meta` sidecar echoing the generator settings.
void cmd_synth(const SyntheticSpec& spec, const std::string& output, std::ostream& log);

ExperimentReport cmd_bench_order(const OrderExperimentConfig& config, const std::string& output, std::ostream& log);
ExperimentReport cmd_bench_curvature(const CurvatureSweepConfig& config, const std::string& output,
                                     std::ostream& log);

/// Exit status for an error category: config 2, data/schema 3,
/// geometry/numeric/estimation 4, io 5, anything else 1.
int exit_code_for(ErrorKind kind);

}  // namespace cems
