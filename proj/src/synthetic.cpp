#include "cems/synthetic.hpp"

#include "cems/error.hpp"
#include "cems/rng.hpp"

#include <Eigen/QR>

#include <cmath>
#include <numbers>

namespace cems {

namespace {

// Generator streams are keyed so that one seed drives independent draws.
enum StreamKey : std::uint64_t { kPoints = 1, kNoise = 2, kEmbedding = 3, kShape = 4 };

Eigen::MatrixXd gaussian_matrix(Index rows, Index cols, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd m(rows, cols);
    for (Index c = 0; c < cols; ++c)
        for (Index r = 0; r < rows; ++r) m(r, c) = normal(rng);
    return m;
}

void add_noise(Eigen::MatrixXd& m, double noise_sd, Rng& rng) {
    if (noise_sd <= 0.0) return;
    m += noise_sd * gaussian_matrix(m.rows(), m.cols(), rng);
}

SyntheticData split_joint(const Eigen::MatrixXd& joint) {
    SyntheticData out;
    out.raw = make_dataset(joint.leftCols(joint.cols() - 1), joint.rightCols(1));
    out.data = out.raw;
    return out;
}

}  // namespace

const char* to_string(SyntheticKind kind) {
    switch (kind) {
    case SyntheticKind::Sine: return "sine";
    case SyntheticKind::Hypersphere: return "hypersphere";
    case SyntheticKind::Quadratic: return "quadratic";
    case SyntheticKind::Plane: return "plane";
    }
    return "unknown";
}

SyntheticKind parse_synthetic_kind(const std::string& text) {
    if (text == "sine") return SyntheticKind::Sine;
    if (text == "hypersphere") return SyntheticKind::Hypersphere;
    if (text == "quadratic") return SyntheticKind::Quadratic;
    if (text == "plane") return SyntheticKind::Plane;
    fail(ErrorKind::Config, "unknown synthetic kind '" + text + "' (expected sine|hypersphere|quadratic|plane)");
}

void validate(const SyntheticSpec& spec) {
    const auto bad = [](const std::string& what) { fail(ErrorKind::Config, what); };
    if (spec.n < 10) bad("synthetic datasets need n >= 10");
    if (!(spec.noise_sd >= 0.0)) bad("noise_sd must be >= 0");
    if (spec.kind == SyntheticKind::Sine) return;
    if (spec.intrinsic_d < 1) bad("intrinsic dimension must be >= 1");
    if (spec.kind == SyntheticKind::Hypersphere) {
        if (!(spec.curvature > 0.0) || !std::isfinite(spec.curvature)) bad("curvature must be > 0");
        if (spec.intrinsic_d + 1 > spec.ambient_D) bad("hypersphere needs intrinsic_d + 1 <= ambient_D");
    } else if (spec.intrinsic_d >= spec.ambient_D) {
        bad("intrinsic_d must be < ambient_D");
    }
}

Eigen::MatrixXd random_orthonormal(Index rows, Index cols, std::uint64_t seed) {
    if (cols > rows) fail(ErrorKind::Parameter, "orthonormal embedding needs cols <= rows");
    Rng rng = stream_rng(seed, kEmbedding);
    const Eigen::MatrixXd a = gaussian_matrix(rows, cols, rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    return qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
}

Dataset gen_sine(Index n, double noise_sd, std::uint64_t seed) {
    validate(SyntheticSpec{SyntheticKind::Sine, n, noise_sd});
    Rng rng = stream_rng(seed, kPoints);
    std::uniform_real_distribution<double> uniform(0.0, 2.0 * std::numbers::pi);
    Eigen::MatrixXd x(n, 1), y(n, 1);
    for (Index i = 0; i < n; ++i) {
        x(i, 0) = uniform(rng);
        y(i, 0) = std::sin(x(i, 0));
    }
    Rng noise = stream_rng(seed, kNoise);
    add_noise(y, noise_sd, noise);
    return make_dataset(std::move(x), std::move(y), {"x"}, {"y"});
}

double sphere_radius(Index intrinsic_d, double curvature) {
    if (!(curvature > 0.0)) fail(ErrorKind::Parameter, "curvature must be > 0");
    if (intrinsic_d == 1) return 1.0 / std::sqrt(curvature);
    const auto d = static_cast<double>(intrinsic_d);
    return std::sqrt(d * (d - 1.0) / curvature);
}

SyntheticData gen_hypersphere(Index n, Index intrinsic_d, double curvature, Index ambient_D, std::uint64_t seed,
                              double noise_sd) {
    validate(SyntheticSpec{SyntheticKind::Hypersphere, n, noise_sd, curvature, intrinsic_d, ambient_D, seed});
    SyntheticData out;
    out.radius = sphere_radius(intrinsic_d, curvature);
    Rng rng = stream_rng(seed, kPoints);
    Eigen::MatrixXd p = gaussian_matrix(n, intrinsic_d + 1, rng);
    for (Index i = 0; i < n; ++i) p.row(i) *= out.radius / p.row(i).norm();
    out.intrinsic = p;
    out.embedding = random_orthonormal(ambient_D, intrinsic_d + 1, seed);

    Eigen::MatrixXd features = p * out.embedding.transpose();
    Rng noise = stream_rng(seed, kNoise);
    add_noise(features, noise_sd, noise);
    Eigen::MatrixXd target = p.rowwise().sum().array().sin().matrix();
    out.raw = make_dataset(std::move(features), std::move(target));
    auto [scaled, state] = normalize_targets(out.raw, NormalizeOptions{true});
    out.data = std::move(scaled);
    out.scaling = std::move(state);
    return out;
}

SyntheticData gen_quadratic(Index n, Index intrinsic_d, Index ambient_D, std::uint64_t seed, double noise_sd) {
    validate(SyntheticSpec{SyntheticKind::Quadratic, n, noise_sd, 1.0, intrinsic_d, ambient_D, seed});
    const Index d = intrinsic_d;
    const Index normal = ambient_D - d;
    Rng shape = stream_rng(seed, kShape);
    std::vector<Eigen::MatrixXd> hessians;
    for (Index a = 0; a < normal; ++a) {
        const Eigen::MatrixXd m = gaussian_matrix(d, d, shape);
        hessians.emplace_back(0.5 * (m + m.transpose()));
    }
    Rng rng = stream_rng(seed, kPoints);
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    Eigen::MatrixXd local(n, ambient_D);
    for (Index i = 0; i < n; ++i) {
        Eigen::VectorXd u(d);
        for (Index j = 0; j < d; ++j) u(j) = uniform(rng);
        local.row(i).head(d) = u.transpose();
        for (Index a = 0; a < normal; ++a)
            local(i, d + a) = 0.5 * u.dot(hessians[static_cast<std::size_t>(a)] * u);
    }
    const Eigen::MatrixXd rotation = random_orthonormal(ambient_D, ambient_D, seed);
    Eigen::MatrixXd joint = local * rotation.transpose();
    Rng noise = stream_rng(seed, kNoise);
    add_noise(joint, noise_sd, noise);
    SyntheticData out = split_joint(joint);
    out.embedding = rotation;
    out.intrinsic = local;
    return out;
}

SyntheticData gen_plane(Index n, Index intrinsic_d, Index ambient_D, std::uint64_t seed, double noise_sd) {
    validate(SyntheticSpec{SyntheticKind::Plane, n, noise_sd, 1.0, intrinsic_d, ambient_D, seed});
    Rng rng = stream_rng(seed, kPoints);
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    Eigen::MatrixXd u(n, intrinsic_d);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < intrinsic_d; ++j) u(i, j) = uniform(rng);
    const Eigen::MatrixXd basis = random_orthonormal(ambient_D, intrinsic_d, seed);
    Eigen::MatrixXd joint = u * basis.transpose();
    Rng noise = stream_rng(seed, kNoise);
    add_noise(joint, noise_sd, noise);
    SyntheticData out = split_joint(joint);
    out.embedding = basis;
    out.intrinsic = u;
    return out;
}

SyntheticData generate(const SyntheticSpec& spec) {
    validate(spec);
    switch (spec.kind) {
    case SyntheticKind::Sine: {
        SyntheticData out;
        out.raw = gen_sine(spec.n, spec.noise_sd, spec.seed);
        out.data = out.raw;
        out.intrinsic = out.raw.features;
        return out;
    }
    case SyntheticKind::Hypersphere:
        return gen_hypersphere(spec.n, spec.intrinsic_d, spec.curvature, spec.ambient_D, spec.seed, spec.noise_sd);
    case SyntheticKind::Quadratic:
        return gen_quadratic(spec.n, spec.intrinsic_d, spec.ambient_D, spec.seed, spec.noise_sd);
    case SyntheticKind::Plane:
        return gen_plane(spec.n, spec.intrinsic_d, spec.ambient_D, spec.seed, spec.noise_sd);
    }
    fail(ErrorKind::Internal, "unhandled synthetic kind");
}

}  // namespace cems
