#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cems/samplers.hpp"
#include "test_util.hpp"

#include <cmath>
#include <set>

using namespace cems;
using cems::testing::error_kind;

namespace {

constexpr double kTwoPi = 6.283185307179586;

Eigen::MatrixXd gaussian(Index rows, Index cols, std::uint64_t seed) {
    Rng rng(seed);
    std::normal_distribution<double> n01;
    Eigen::MatrixXd m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) m(i, j) = n01(rng);
    return m;
}

Eigen::MatrixXd rotation(Index D, std::uint64_t seed) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian(D, D, seed));
    return qr.householderQ() * Eigen::MatrixXd::Identity(D, D);
}

// Sine curve in normalized coordinates: (t / 2pi, (sin t + 1) / 2).
Eigen::Vector2d sine_point(double t) { return {t / kTwoPi, 0.5 * (std::sin(t) + 1.0)}; }

Eigen::MatrixXd sine_rows(Index n, std::uint64_t seed) {
    Rng rng(seed);
    std::uniform_real_distribution<double> u(0.0, kTwoPi);
    Eigen::MatrixXd p(n, 2);
    for (Index i = 0; i < n; ++i) p.row(i) = sine_point(u(rng)).transpose();
    return p;
}

// Local scan over t in [2 pi x - 1, 2 pi x + 1] followed by golden-section
// refinement of the squared distance. Valid for points within 1 / (2 pi)
// of the curve, far more than any sample here strays.
double sine_distance(const Eigen::Vector2d& z) {
    const auto f = [&](double t) { return (sine_point(t) - z).squaredNorm(); };
    const double t0 = kTwoPi * z(0);
    const int grid = 400;
    const double step = 2.0 / grid;
    double best_t = t0, best = f(t0);
    for (int i = 0; i <= grid; ++i) {
        const double t = t0 - 1.0 + step * i;
        if (f(t) < best) best = f(t), best_t = t;
    }
    double a = best_t - step, b = best_t + step;
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 60; ++it) {
        const double c = b - phi * (b - a), d = a + phi * (b - a);
        if (f(c) < f(d))
            b = d;
        else
            a = c;
    }
    return std::sqrt(std::min(best, f(0.5 * (a + b))));
}

// Quadric g^a(u) = 1/2 u^T H^a u with u in R^2, normals in R^3, rotated by Q.
struct Quadric {
    std::vector<Eigen::Matrix2d> h;
    Eigen::MatrixXd q;  // 5 x 5
    Eigen::VectorXd vertex;

    Eigen::VectorXd embed(const Eigen::Vector2d& u) const {
        Eigen::VectorXd w(5);
        w.head(2) = u;
        for (int a = 0; a < 3; ++a) w(2 + a) = 0.5 * u.dot(h[a] * u);
        return q * w + vertex;
    }
    double surface_residual(const Eigen::VectorXd& z) const {
        const Eigen::VectorXd w = q.transpose() * (z - vertex);
        const Eigen::Vector2d u = w.head(2);
        double worst = 0.0;
        for (int a = 0; a < 3; ++a) worst = std::max(worst, std::abs(w(2 + a) - 0.5 * u.dot(h[a] * u)));
        return worst;
    }
};

Quadric make_quadric(std::uint64_t seed) {
    Quadric s;
    for (int a = 0; a < 3; ++a) {
        const Eigen::MatrixXd m = gaussian(2, 2, seed + a);
        s.h.push_back(0.5 * (m + m.transpose()));
    }
    s.q = rotation(5, seed + 10);
    s.vertex = gaussian(5, 1, seed + 20);
    return s;
}

// Symmetric pairs +-u_i at distinct radii: the tangent plane of the
// point cloud is the u-plane for both anchor and mean centering.
Eigen::MatrixXd symmetric_patch(const Quadric& s, Index pairs, double scale, std::uint64_t seed) {
    Eigen::MatrixXd rows(2 * pairs, 5);
    Rng rng(seed);
    std::uniform_real_distribution<double> angle(0.0, kTwoPi);
    for (Index i = 0; i < pairs; ++i) {
        const double r = scale * (0.5 + 0.5 * static_cast<double>(i + 1) / static_cast<double>(pairs));
        const double a = angle(rng);
        const Eigen::Vector2d u(r * std::cos(a), r * std::sin(a));
        rows.row(2 * i) = s.embed(u).transpose();
        rows.row(2 * i + 1) = s.embed(-u).transpose();
    }
    return rows;
}

SamplerConfig config_for(Index d, Index k, double sigma, CenterMode mode) {
    SamplerConfig c;
    c.intrinsic_dim = d;
    c.k = k;
    c.sigma = sigma;
    c.mode = mode;
    c.ridge = 0.0;
    return c;
}

}  // namespace

TEST_CASE("draw_noise") {
    Rng rng(1);
    const Eigen::Vector3d mean(0.5, -1.0, 2.0);
    CHECK(draw_noise(rng, 0.0, mean) == mean);

    const double sigma = 0.3;
    const int n = 100000;
    Eigen::Vector3d sum = Eigen::Vector3d::Zero(), sq = Eigen::Vector3d::Zero();
    for (int i = 0; i < n; ++i) {
        const Eigen::Vector3d v = draw_noise(rng, sigma, mean) - mean;
        sum += v;
        sq += v.cwiseProduct(v);
    }
    const Eigen::Vector3d m = sum / n;
    const Eigen::Vector3d var = sq / n - m.cwiseProduct(m);
    for (int i = 0; i < 3; ++i) {
        CHECK(std::abs(m(i)) < 4.0 * sigma / std::sqrt(static_cast<double>(n)));
        CHECK(std::abs(var(i) - sigma * sigma) < 0.05 * sigma * sigma);
    }

    Rng a(77), b(77);
    CHECK(draw_noise(a, 1.0, mean) == draw_noise(b, 1.0, mean));
}

TEST_CASE("point sampler returns the anchor when sigma is zero") {
    const Eigen::MatrixXd p = sine_rows(300, 2);
    const NeighborIndex index = build_index(p);
    const SamplerConfig c = config_for(1, 10, 0.0, CenterMode::Point);
    Rng rng(3);
    for (Index anchor : {0, 17, 150, 299}) CHECK(cems_point(index, anchor, c, rng) == p.row(anchor).transpose());
}

TEST_CASE("point samples on a line stay on the line") {
    Eigen::MatrixXd p(60, 2);
    Rng rng(4);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const Eigen::Vector2d dir = Eigen::Vector2d(3.0, 4.0).normalized();
    for (Index i = 0; i < 60; ++i) p.row(i) = (Eigen::Vector2d(0.2, 0.1) + u(rng) * dir).transpose();
    const NeighborIndex index = build_index(p);
    const SamplerConfig c = config_for(1, 8, 0.2, CenterMode::Point);
    for (Index anchor = 0; anchor < 60; anchor += 5) {
        const Eigen::Vector2d z = cems_point(index, anchor, c, rng) - Eigen::Vector2d(0.2, 0.1);
        CHECK(std::abs(z(0) * dir(1) - z(1) * dir(0)) < 1e-8);
    }
}

TEST_CASE("point samples converge linearly to the anchor as sigma shrinks") {
    const Eigen::MatrixXd p = sine_rows(400, 5);
    const NeighborIndex index = build_index(p);
    double previous = 0.0;
    for (double sigma : {1e-3, 5e-4, 2.5e-4, 1.25e-4}) {
        double worst = 0.0;
        for (Index anchor = 0; anchor < 400; anchor += 20) {
            Rng rng(stream_rng(9, static_cast<std::uint64_t>(anchor)));
            const Eigen::VectorXd z = cems_point(index, anchor, config_for(1, 10, sigma, CenterMode::Point), rng);
            worst = std::max(worst, (z - p.row(anchor).transpose()).norm());
        }
        if (previous > 0.0) CHECK(worst / previous == doctest::Approx(0.5).epsilon(0.05));
        previous = worst;
    }
}

TEST_CASE("batch sampler with zero sigma reconstructs its members") {
    const Eigen::MatrixXd p = gaussian(80, 4, 6);
    const NeighborIndex index = build_index(p);
    Rng rng(7);
    const SamplerConfig c = config_for(2, 12, 0.0, CenterMode::Batch);
    const AugmentedSamples s = cems_batch(index, 11, c, rng);
    REQUIRE(s.size() == 12);
    CHECK(s.samples.allFinite());
    for (Index l = 0; l < 12; ++l)
        CHECK((s.samples.row(l) - p.row(s.provenance[static_cast<std::size_t>(l)].source)).norm() < 1e-8);
    CHECK(s.provenance.front().source == 11);
    CHECK(s.provenance.front().anchor == 11);
}

TEST_CASE("FOMA with lambda one and batch CEMS with zero sigma agree") {
    const Eigen::MatrixXd p = sine_rows(200, 8);
    const NeighborIndex index = build_index(p);
    const SamplerConfig c = config_for(1, 9, 0.0, CenterMode::Batch);
    for (Index anchor : {3, 50, 120}) {
        Rng rng(1);
        const AugmentedSamples cems = cems_batch(index, anchor, c, rng);
        const AugmentedSamples foma = foma_sample(knn_neighbors(index, anchor, 9, true), 1.0, c);
        CHECK((cems.samples - foma.samples).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("FOMA with lambda zero projects onto the tangent affine subspace") {
    const Eigen::MatrixXd p = gaussian(50, 5, 9);
    const Neighborhood nb = knn_neighbors(build_index(p), 4, 10, true);
    const SamplerConfig c = config_for(2, 10, 0.1, CenterMode::Batch);
    const AugmentedSamples s = foma_sample(nb, 0.0, c);
    const CenteredNeighborhood centered = center(nb, CenterMode::Batch);
    const OrthonormalBasis basis = fit_basis(centered, 2);
    for (Index j = 0; j < s.size(); ++j) {
        const Eigen::VectorXd delta = s.samples.row(j).transpose() - centered.origin;
        CHECK((delta - basis.tangent * (basis.tangent.transpose() * delta)).norm() < 1e-12);
    }
    CHECK(error_kind([&] { foma_sample(nb, 1.5, c); }) == ErrorKind::Parameter);
}

TEST_CASE("first and second order agree on flat data") {
    const Eigen::MatrixXd plane = rotation(4, 11).leftCols(2);
    const Eigen::MatrixXd p = gaussian(100, 2, 12) * plane.transpose();
    const NeighborIndex index = build_index(p);
    for (Index anchor = 0; anchor < 100; anchor += 9) {
        Rng a(anchor), b(anchor);
        const SamplerConfig c = config_for(2, 12, 0.3, CenterMode::Point);
        CHECK((cems_point(index, anchor, c, a) - cems_first_order_point(index, anchor, c, b)).norm() < 1e-8);
        const PointModel m = fit_point_model(knn_neighbors(index, anchor, 12).members, p.row(anchor).transpose(), 2, 2, 0.0);
        for (const auto& h : m.chart.hessians) CHECK(h.cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("order-one charts use d columns") {
    CHECK(design_layout(1, 1).size() == 1);
    CHECK(design_layout(3, 1).size() == 3);
}

TEST_CASE("second-order samples lie on a quadric, first-order samples miss it quadratically") {
    const Quadric s = make_quadric(100);
    const Eigen::MatrixXd patch = symmetric_patch(s, 6, 0.5, 101);
    SUBCASE("point mode") {
        const Eigen::VectorXd anchor = s.embed(Eigen::Vector2d::Zero());
        const PointModel second = fit_point_model(patch, anchor, 2, 2, 0.0);
        const PointModel first = fit_point_model(patch, anchor, 2, 1, 0.0);
        std::vector<double> logs_r, logs_e;
        for (double r : {0.02, 0.04, 0.08, 0.16, 0.32}) {
            const Eigen::Vector2d eta(r * 0.6, r * 0.8);
            CHECK(s.surface_residual(chart_to_ambient(second.basis, second.chart, second.origin, eta)) < 1e-6);
            logs_r.push_back(std::log(r));
            logs_e.push_back(std::log(s.surface_residual(chart_to_ambient(first.basis, first.chart, first.origin, eta))));
        }
        double mr = 0, me = 0;
        for (std::size_t i = 0; i < logs_r.size(); ++i) mr += logs_r[i] / 5, me += logs_e[i] / 5;
        double num = 0, den = 0;
        for (std::size_t i = 0; i < logs_r.size(); ++i)
            num += (logs_r[i] - mr) * (logs_e[i] - me), den += (logs_r[i] - mr) * (logs_r[i] - mr);
        CHECK(std::abs(num / den - 2.0) < 0.3);
    }
    SUBCASE("batch mode") {
        Eigen::MatrixXd rows(patch.rows() + 1, 5);
        rows.row(0) = s.embed(Eigen::Vector2d::Zero()).transpose();
        rows.bottomRows(patch.rows()) = patch;
        const NeighborIndex index = build_index(rows);
        Rng rng(5);
        const AugmentedSamples out = cems_batch(index, 0, config_for(2, 13, 0.1, CenterMode::Batch), rng);
        REQUIRE(out.size() == 13);
        for (Index l = 0; l < out.size(); ++l) CHECK(s.surface_residual(out.samples.row(l).transpose()) < 1e-6);
    }
}

TEST_CASE("near sine crests the second-order sampler beats the first-order sampler and FOMA") {
    const Eigen::MatrixXd p = sine_rows(500, 21);
    const NeighborIndex index = build_index(p);
    std::vector<Index> crests;
    for (Index i = 0; i < p.rows(); ++i)
        if (std::abs(2.0 * p(i, 1) - 1.0) > 0.99) crests.push_back(i);
    REQUIRE(crests.size() >= 10);

    const SamplerConfig c = config_for(1, 16, 0.005, CenterMode::Batch);
    double e2 = 0, e1 = 0, ef = 0, n = 0;
    for (Index anchor : crests) {
        Rng a = stream_rng(1, static_cast<std::uint64_t>(anchor)), b = a;
        const AugmentedSamples s2 = cems_batch(index, anchor, c, a);
        const AugmentedSamples s1 = cems_first_order_batch(index, anchor, c, b);
        const AugmentedSamples sf = foma_sample(knn_neighbors(index, anchor, 16, true), 0.5, c);
        for (Index j = 0; j < s2.size(); ++j) {
            e2 += sine_distance(s2.samples.row(j).transpose());
            e1 += sine_distance(s1.samples.row(j).transpose());
            ef += sine_distance(sf.samples.row(j).transpose());
            n += 1;
        }
    }
    e2 /= n, e1 /= n, ef /= n;
    MESSAGE("crest errors: second " << e2 << " first " << e1 << " foma " << ef);
    CHECK(e2 < e1);
    CHECK(e2 < ef);
}

TEST_CASE("augment_dataset bookkeeping and determinism") {
    const Eigen::MatrixXd p = sine_rows(96, 31);
    const Dataset data = make_dataset(p.col(0), p.col(1));
    SamplerConfig c = config_for(1, 16, 0.05, CenterMode::Batch);
    c.seed = 42;
    const AugmentedSamples a = augment_dataset(data, c, 96);
    REQUIRE(a.size() == 96);
    REQUIRE(a.provenance.size() == 96);
    CHECK(a.samples.allFinite());
    std::set<Index> anchors;
    for (const auto& rec : a.provenance) {
        CHECK(rec.anchor >= 0);
        CHECK(rec.anchor < 96);
        CHECK(rec.source >= 0);
        CHECK(rec.source < 96);
        anchors.insert(rec.anchor);
    }
    CHECK(anchors.size() == 6);  // 96 samples from batches of 16

    const AugmentedSamples again = augment_dataset(data, c, 96);
    CHECK(again.samples == a.samples);
    c.workers = 3;
    CHECK(augment_dataset(data, c, 96).samples == a.samples);
    c.mode = CenterMode::Point;
    c.workers = 1;
    const AugmentedSamples point = augment_dataset(data, c, 37);
    c.workers = 4;
    CHECK(augment_dataset(data, c, 37).samples == point.samples);
    CHECK(point.size() == 37);
    c.method = Method::Foma;
    CHECK(augment_dataset(data, c, 37).size() == 37);
    c.seed = 43;
    CHECK(augment_dataset(data, c, 37).samples != augment_dataset(data, config_for(1, 16, 0.05, CenterMode::Point), 37).samples);
}

TEST_CASE("tabular data with a small sigma runs end to end") {
    const Eigen::MatrixXd latent = gaussian(300, 3, 50);
    Eigen::MatrixXd x(300, 5), y(300, 1);
    for (Index i = 0; i < 300; ++i) {
        x.row(i) << latent(i, 0), latent(i, 1), latent(i, 2), latent(i, 0) * latent(i, 1), std::sin(latent(i, 2));
        y(i, 0) = latent.row(i).squaredNorm();
    }
    auto [norm, state] = normalize_targets(make_dataset(x, y), NormalizeOptions{true});
    SamplerConfig c;
    c.sigma = 1e-4;
    c.k = 16;
    c.seed = 1;
    const AugmentedSamples s = augment_dataset(norm, c, 300);
    CHECK(s.size() == 300);
    CHECK(s.samples.allFinite());
    CHECK(s.intrinsic_dim >= 1);
    CHECK(s.intrinsic_dim <= 5);
}

TEST_CASE("failure budget") {
    Eigen::MatrixXd p(60, 2);
    for (Index i = 0; i < 60; ++i) p.row(i) << static_cast<double>(i / 20), static_cast<double>(i / 20) * 0.5;
    const Dataset dup = make_dataset(p.col(0), p.col(1));
    SamplerConfig c = config_for(1, 5, 0.1, CenterMode::Point);
    CHECK(error_kind([&] { augment_dataset(dup, c, 20); }) == ErrorKind::Geometry);
    c.failure_budget = 1.0;
    CHECK(error_kind([&] { augment_dataset(dup, c, 20); }) == ErrorKind::Geometry);
}

TEST_CASE("a few failed anchors fit inside the budget") {
    // 200 sine rows plus one cluster of 6 duplicates: only anchors in the cluster fail.
    const Eigen::MatrixXd sine = sine_rows(200, 61);
    Eigen::MatrixXd p(206, 2);
    p.topRows(200) = sine;
    for (Index i = 200; i < 206; ++i) p.row(i) << 3.0, 3.0;
    SamplerConfig c = config_for(1, 4, 0.05, CenterMode::Point);
    c.failure_budget = 0.2;
    c.seed = 3;
    const AugmentedSamples s = augment_dataset(make_dataset(p.col(0), p.col(1)), c, 200);
    CHECK(s.size() == 200);
    CHECK(s.failures > 0);
    CHECK(s.failures <= 40);
}

TEST_CASE("config validation") {
    const auto v = [](SamplerConfig c, Index rows, Index D) { return error_kind([&] { validate(c, rows, D); }); };
    SamplerConfig c = config_for(1, 16, 0.1, CenterMode::Batch);
    CHECK_FALSE(v(c, 16, 3));
    CHECK(v(c, 15, 3) == ErrorKind::Config);
    c.mode = CenterMode::Point;
    CHECK(v(c, 16, 3) == ErrorKind::Config);
    c = config_for(3, 16, 0.1, CenterMode::Batch);
    CHECK(v(c, 100, 3) == ErrorKind::Config);
    c = config_for(1, 16, -0.1, CenterMode::Batch);
    CHECK(v(c, 100, 3) == ErrorKind::Config);
    c = config_for(1, 16, 0.1, CenterMode::Batch);
    c.lambda = 1.2;
    CHECK(v(c, 100, 3) == ErrorKind::Config);
    c.lambda = 0.5;
    c.order = 3;
    CHECK(v(c, 100, 3) == ErrorKind::Config);
    CHECK(parse_method("foma") == Method::Foma);
    CHECK(error_kind([] { parse_method("mixup"); }) == ErrorKind::Config);
}
