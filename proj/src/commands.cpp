#include "cems/commands.hpp"

#include "cems/csv_io.hpp"
#include "cems/error.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <ostream>

namespace cems {

namespace {

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void write_report_file(const ExperimentReport& report, const std::string& output) {
    std::ofstream out(output, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot open '" + output + "' for writing");
    write_report(report, out);
    out.flush();
    if (!out) fail(ErrorKind::Io, "write to '" + output + "' failed");
}

}  // namespace

int exit_code_for(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::Config:
    case ErrorKind::Parameter: return 2;
    case ErrorKind::Data:
    case ErrorKind::Schema: return 3;
    case ErrorKind::Geometry:
    case ErrorKind::Numeric:
    case ErrorKind::Estimation: return 4;
    case ErrorKind::Io: return 5;
    case ErrorKind::Internal: return 1;
    }
    return 1;
}

AugmentSummary cmd_augment(const RunConfig& config, std::ostream& log) {
    const auto start = std::chrono::steady_clock::now();
    if (config.input.empty()) fail(ErrorKind::Config, "--input is required");
    if (config.output.empty()) fail(ErrorKind::Config, "--output is required");
    if (config.targets.empty()) fail(ErrorKind::Config, "--targets is required");

    const Dataset raw = load_csv(config.input, config.targets);
    SamplerConfig sampler = config.sampler;
    if (!(sampler.sigma > 0.0)) fail(ErrorKind::Config, "sigma must be positive");
    validate(sampler, raw.rows(), raw.ambient_dim());
    const Index n_gen = config.n_gen > 0 ? config.n_gen : raw.rows();

    auto [normalized, state] = normalize_targets(raw, NormalizeOptions{config.scale_features});

    AugmentSummary summary;
    summary.rows_in = raw.rows();
    if (!sampler.intrinsic_dim) {
        const DimEstimate est = twonn_estimate(joint_matrix(normalized));
        sampler.intrinsic_dim = est.d_used;
        summary.d_real = est.d_real;
    }
    const AugmentedSamples samples = augment_dataset(normalized, sampler, n_gen);
    save_augmented(samples, normalized, state, config.output,
                   ExportOptions{config.denormalize, config.append, config.provenance});

    summary.n_gen = samples.size();
    summary.rows_written = samples.size() + (config.append ? raw.rows() : 0);
    summary.failures = samples.failures;
    summary.near_degenerate = samples.near_degenerate;
    summary.d_used = samples.intrinsic_dim;
    summary.runtime_seconds = seconds_since(start);

    log << "input = " << config.input << '\n'
        << "output = " << config.output << '\n'
        << "method = " << to_string(sampler.method) << '\n'
        << "mode = " << to_string(sampler.mode) << '\n'
        << "select = " << to_string(sampler.selection) << '\n'
        << "order = " << sampler.order << '\n'
        << "sigma = " << num(sampler.sigma) << '\n'
        << "k = " << sampler.k << '\n'
        << "ridge = " << (sampler.ridge ? num(*sampler.ridge) : std::string("auto")) << '\n'
        << "lambda = " << num(sampler.lambda) << '\n'
        << "seed = " << sampler.seed << '\n'
        << "workers = " << sampler.workers << '\n'
        << "rows_in = " << summary.rows_in << '\n'
        << "n_gen = " << summary.n_gen << '\n'
        << "rows_written = " << summary.rows_written << '\n'
        << "failures = " << summary.failures << '\n'
        << "near_degenerate_spectra = " << summary.near_degenerate << '\n'
        << "d_used = " << summary.d_used << (config.sampler.intrinsic_dim ? "" : " (twonn d_real = " + num(summary.d_real) + ")")
        << '\n'
        << "runtime_s = " << num(summary.runtime_seconds) << '\n';
    return summary;
}

DimEstimate cmd_estimate_dim(const std::string& input, const std::vector<std::string>& targets, bool scale_features,
                             std::ostream& log) {
    if (input.empty()) fail(ErrorKind::Config, "--input is required");
    std::vector<std::string> selectors = targets;
    if (selectors.empty()) {
        const CsvTable head = read_csv(input);
        if (head.header.size() < 2) fail(ErrorKind::Schema, "estimate-dim needs at least two columns");
        selectors.push_back(head.header.back());
    }
    const Dataset raw = load_csv(input, selectors);
    const auto [normalized, state] = normalize_targets(raw, NormalizeOptions{scale_features});
    const DimEstimate est = twonn_estimate(joint_matrix(normalized));
    log << "rows = " << raw.rows() << '\n'
        << "ambient_dim = " << raw.ambient_dim() << '\n'
        << "n_valid = " << est.n_valid << '\n'
        << "d_real = " << num(est.d_real) << '\n'
        << "d_used = " << est.d_used << '\n';
    return est;
}

void cmd_synth(const SyntheticSpec& spec, const std::string& output, std::ostream& log) {
    if (output.empty()) fail(ErrorKind::Config, "--output is required");
    const SyntheticData data = generate(spec);
    save_csv(data.data, output);

    const std::string meta_path = output + ".meta";
    std::ofstream meta(meta_path, std::ios::binary | std::ios::trunc);
    if (!meta) fail(ErrorKind::Io, "cannot open '" + meta_path + "' for writing");
    meta << "kind = " << to_string(spec.kind) << '\n'
         << "n = " << spec.n << '\n'
         << "noise_sd = " << num(spec.noise_sd) << '\n'
         << "seed = " << spec.seed << '\n';
    if (spec.kind != SyntheticKind::Sine)
        meta << "intrinsic_d = " << spec.intrinsic_d << '\n' << "ambient_D = " << spec.ambient_D << '\n';
    if (spec.kind == SyntheticKind::Hypersphere) {
        meta << "curvature = " << num(spec.curvature) << '\n'
             << "radius = " << num(data.radius) << '\n'
             << "min_max_scaled = true\n";
    }
    meta.flush();
    if (!meta) fail(ErrorKind::Io, "write to '" + meta_path + "' failed");
    log << "wrote " << data.data.rows() << " rows to " << output << " (metadata " << meta_path << ")\n";
}

ExperimentReport cmd_bench_order(const OrderExperimentConfig& config, const std::string& output, std::ostream& log) {
    if (output.empty()) fail(ErrorKind::Config, "--output is required");
    const ExperimentReport report = run_order_experiment(config);
    write_report_file(report, output);
    for (const auto& s : report.slopes)
        log << s.method << " slope = " << (s.exact ? std::string("exact") : num(s.slope)) << " ci95 = ["
            << num(s.ci_low) << ", " << num(s.ci_high) << "]\n";
    log << "runtime_s = " << num(report.runtime_seconds) << '\n';
    return report;
}

ExperimentReport cmd_bench_curvature(const CurvatureSweepConfig& config, const std::string& output,
                                     std::ostream& log) {
    if (output.empty()) fail(ErrorKind::Config, "--output is required");
    const ExperimentReport report = run_curvature_sweep(config);
    write_report_file(report, output);
    for (const auto& [c, r] : report.ratios) log << "curvature " << num(c) << " first/second = " << num(r) << '\n';
    log << "spearman = " << num(report.spearman) << '\n' << "runtime_s = " << num(report.runtime_seconds) << '\n';
    return report;
}

}  // namespace cems
