#include "cems/commands.hpp"
#include "cems/error.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <exception>
#include <iostream>
#include <random>
#include <string>
#include <vector>

namespace {

struct Options {
    std::string input;
    std::string output;
    std::vector<std::string> targets;
    double sigma = 0.1;
    long long k = 16;
    std::string dim = "auto";
    std::string mode = "batch";
    std::string select = "knn";
    int order = 2;
    std::string ridge = "auto";
    double lambda = 0.5;
    std::string method = "cems";
    long long n_gen = 0;
    bool append = false;
    bool denormalize = false;
    bool provenance = false;
    bool raw_features = false;
    std::uint64_t seed = 0;
    int workers = 1;
    double failure_budget = 0.01;

    std::string kind = "sine";
    long long n = 500;
    double noise = 0.0;
    double curvature = 1.0;
    long long intrinsic_d = 1;
    long long ambient_D = 2;

    std::string curve = "sine";
    std::vector<double> scales;
    std::vector<double> curvatures;
    long long seeds = 20;
};

long long parse_integer(const std::string& text, const char* flag) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(text, &used);
        if (used == text.size()) return v;
    } catch (const std::exception&) {
    }
    cems::fail(cems::ErrorKind::Config, std::string(flag) + " expects an integer or 'auto', got '" + text + "'");
}

double parse_real(const std::string& text, const char* flag) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used == text.size()) return v;
    } catch (const std::exception&) {
    }
    cems::fail(cems::ErrorKind::Config, std::string(flag) + " expects a number or 'auto', got '" + text + "'");
}

cems::SamplerConfig sampler_config(const Options& o) {
    cems::SamplerConfig c;
    c.sigma = o.sigma;
    c.k = o.k;
    if (o.dim != "auto") c.intrinsic_dim = parse_integer(o.dim, "--dim");
    c.mode = cems::parse_center_mode(o.mode);
    c.selection = cems::parse_selection(o.select);
    c.order = o.order;
    if (o.ridge != "auto") c.ridge = parse_real(o.ridge, "--ridge");
    c.lambda = o.lambda;
    c.method = cems::parse_method(o.method);
    c.seed = o.seed;
    c.workers = o.workers;
    c.failure_budget = o.failure_budget;
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Curvature-enhanced manifold sampling for tabular regression data"};
    app.set_config("--config", "", "Flat 'key = value' file; keys mirror the long flag names");
    app.require_subcommand(1);

    Options o;
    app.add_option("--input", o.input, "Input CSV with a header row");
    app.add_option("--output", o.output, "Output file");
    app.add_option("--targets", o.targets, "Target column names")->delimiter(',');
    app.add_option("--sigma", o.sigma, "Tangent-space noise scale");
    app.add_option("--k", o.k, "Neighborhood size");
    app.add_option("--dim", o.dim, "Intrinsic dimension, or 'auto' for TwoNN");
    app.add_option("--mode", o.mode, "point | batch");
    app.add_option("--select", o.select, "knn | knnp | random");
    app.add_option("--order", o.order, "Chart order, 1 or 2");
    app.add_option("--ridge", o.ridge, "Ridge for the chart solve, or 'auto'");
    app.add_option("--lambda", o.lambda, "FOMA normal-space scale");
    app.add_option("--method", o.method, "cems | foma");
    app.add_option("--n-gen", o.n_gen, "Samples to generate (0 = one per row)");
    app.add_flag("--append", o.append, "Write the original rows before the generated ones");
    app.add_flag("--denormalize", o.denormalize, "Write values in original units");
    app.add_flag("--provenance", o.provenance, "Add anchor/source/residual/eta columns");
    app.add_flag("--raw-features", o.raw_features, "Leave feature columns unscaled");
    auto* seed_opt = app.add_option("--seed", o.seed, "Random seed (drawn and printed when omitted)");
    app.add_option("--workers", o.workers, "Worker threads");
    app.add_option("--failure-budget", o.failure_budget, "Fraction of anchors allowed to fail");

    app.add_option("--kind", o.kind, "sine | hypersphere | quadratic | plane");
    auto* n_opt = app.add_option("--n", o.n, "Number of points");
    auto* noise_opt = app.add_option("--noise", o.noise, "Additive Gaussian noise sd");
    app.add_option("--curvature", o.curvature, "Hypersphere sectional curvature");
    auto* d_opt = app.add_option("--intrinsic-d", o.intrinsic_d, "Intrinsic dimension of the generator");
    auto* D_opt = app.add_option("--ambient-D", o.ambient_D, "Ambient feature dimension");

    app.add_option("--curve", o.curve, "sine | circle | quadratic");
    app.add_option("--scales", o.scales, "Sampling radii")->delimiter(',');
    app.add_option("--curvatures", o.curvatures, "Curvatures to sweep")->delimiter(',');
    app.add_option("--seeds", o.seeds, "Repetitions");

    auto* augment = app.add_subcommand("augment", "Generate synthetic samples from a CSV");
    auto* estimate = app.add_subcommand("estimate-dim", "TwoNN intrinsic dimension of a CSV");
    auto* synth = app.add_subcommand("synth", "Write a synthetic benchmark dataset");
    auto* bench_order = app.add_subcommand("bench-order", "Error versus sampling radius");
    auto* bench_curv = app.add_subcommand("bench-curvature", "Error ratio versus curvature");
    for (auto* sub : {augment, estimate, synth, bench_order, bench_curv}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return cems::exit_code_for(cems::ErrorKind::Config);
    }

    if (seed_opt->count() == 0 && !estimate->parsed()) {
        o.seed = (static_cast<std::uint64_t>(std::random_device{}()) << 32) ^ std::random_device{}();
        std::cout << "seed = " << o.seed << " (drawn)\n";
    }

    try {
        if (augment->parsed()) {
            cems::RunConfig run;
            run.sampler = sampler_config(o);
            run.input = o.input;
            run.output = o.output;
            run.targets = o.targets;
            run.scale_features = !o.raw_features;
            if (o.n_gen < 0) cems::fail(cems::ErrorKind::Config, "--n-gen must be non-negative");
            run.n_gen = o.n_gen;
            run.append = o.append;
            run.denormalize = o.denormalize;
            run.provenance = o.provenance;
            cems::cmd_augment(run, std::cout);
        } else if (estimate->parsed()) {
            cems::cmd_estimate_dim(o.input, o.targets, !o.raw_features, std::cout);
        } else if (synth->parsed()) {
            cems::SyntheticSpec spec;
            spec.kind = cems::parse_synthetic_kind(o.kind);
            spec.n = o.n;
            spec.noise_sd = o.noise;
            spec.curvature = o.curvature;
            spec.intrinsic_d = o.intrinsic_d;
            spec.ambient_D = o.ambient_D;
            spec.seed = o.seed;
            cems::cmd_synth(spec, o.output, std::cout);
        } else if (bench_order->parsed()) {
            cems::OrderExperimentConfig config;
            config.curve = cems::parse_curve_kind(o.curve);
            if (!o.scales.empty()) config.scales = o.scales;
            config.n_seeds = o.seeds;
            config.seed = o.seed;
            config.workers = o.workers;
            cems::cmd_bench_order(config, o.output, std::cout);
        } else if (bench_curv->parsed()) {
            cems::CurvatureSweepConfig config;
            if (!o.curvatures.empty()) config.curvatures = o.curvatures;
            if (d_opt->count()) config.intrinsic_d = o.intrinsic_d;
            if (D_opt->count()) config.ambient_D = o.ambient_D;
            if (n_opt->count()) config.n = o.n;
            if (noise_opt->count()) config.noise_sd = o.noise;
            if (app.get_option("--sigma")->count()) config.sigma = o.sigma;
            if (app.get_option("--k")->count()) config.k = o.k;
            if (app.get_option("--lambda")->count()) config.foma_lambda = o.lambda;
            config.n_seeds = o.seeds;
            config.seed = o.seed;
            config.workers = o.workers;
            cems::cmd_bench_curvature(config, o.output, std::cout);
        }
    } catch (const cems::Error& e) {
        std::cerr << "error [" << cems::to_string(e.kind()) << "]: " << e.what() << '\n';
        return cems::exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
