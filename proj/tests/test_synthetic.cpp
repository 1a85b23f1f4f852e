#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cems/experiments.hpp"
#include "cems/intrinsic_dim.hpp"
#include "cems/rng.hpp"
#include "cems/synthetic.hpp"
#include "test_util.hpp"

#include <cmath>
#include <sstream>

using namespace cems;
using cems::testing::error_kind;

namespace {

// Brute-force distance to {(t, f(t))} over a fine window plus local refinement.
template <class F>
double curve_distance(double x, double y, F f, double half_width) {
    double best = INFINITY, best_t = x;
    const int grid = 20000;
    for (int i = 0; i <= grid; ++i) {
        const double t = x - half_width + 2.0 * half_width * i / grid;
        const double d = std::hypot(t - x, f(t) - y);
        if (d < best) best = d, best_t = t;
    }
    double step = 2.0 * half_width / grid;
    for (int it = 0; it < 60; ++it) {
        for (double t : {best_t - step, best_t + step}) {
            const double d = std::hypot(t - x, f(t) - y);
            if (d < best) best = d, best_t = t;
        }
        step *= 0.5;
    }
    return best;
}

}  // namespace

TEST_CASE("noiseless sine samples lie on the curve") {
    const Dataset d = gen_sine(500, 0.0, 3);
    REQUIRE(d.rows() == 500);
    for (Index i = 0; i < d.rows(); ++i) {
        CHECK(d.targets(i, 0) == std::sin(d.features(i, 0)));
        CHECK(d.features(i, 0) >= 0.0);
        CHECK(d.features(i, 0) <= 6.283185307179586);
    }
    CHECK(twonn_estimate(joint_matrix(d)).d_used == 1);
    CHECK(gen_sine(500, 0.1, 3).features == gen_sine(500, 0.1, 3).features);
    CHECK(gen_sine(500, 0.1, 3).targets == gen_sine(500, 0.1, 3).targets);
    CHECK(gen_sine(500, 0.0, 4).features != d.features);
}

TEST_CASE("noisy sine keeps the abscissa and perturbs the ordinate") {
    const Dataset clean = gen_sine(2000, 0.0, 5), noisy = gen_sine(2000, 0.2, 5);
    CHECK(noisy.features == clean.features);
    const Eigen::ArrayXd diff = (noisy.targets - clean.targets).col(0).array();
    const double sd = std::sqrt((diff - diff.mean()).square().mean());
    CHECK(sd == doctest::Approx(0.2).epsilon(0.1));
}

TEST_CASE("sphere radius convention") {
    CHECK(sphere_radius(1, 4.0) == doctest::Approx(0.5));
    CHECK(sphere_radius(2, 2.0) == doctest::Approx(1.0));
    CHECK(sphere_radius(3, 6.0) == doctest::Approx(1.0));
    CHECK(sphere_radius(2, 64.0) == doctest::Approx(std::sqrt(2.0 / 64.0)));
}

TEST_CASE("hypersphere samples") {
    const SyntheticData s = gen_hypersphere(400, 2, 16.0, 8, 7);
    const double r = sphere_radius(2, 16.0);
    CHECK(s.radius == doctest::Approx(r));
    REQUIRE(s.raw.features.cols() == 8);
    REQUIRE(s.raw.targets.cols() == 1);
    for (Index i = 0; i < 400; ++i) CHECK(std::abs(s.raw.features.row(i).norm() - r) < 1e-10);

    SUBCASE("embedding is an isometry") {
        for (Index i = 0; i < 400; i += 7)
            for (Index j = i + 1; j < 400; j += 11) {
                const double before = (s.intrinsic.row(i) - s.intrinsic.row(j)).norm();
                const double after = (s.raw.features.row(i) - s.raw.features.row(j)).norm();
                CHECK(std::abs(before - after) < 1e-10);
            }
        const Eigen::MatrixXd e = s.embedding;
        CHECK((e.transpose() * e - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("target is the sine of the coordinate sum") {
        for (Index i = 0; i < 400; ++i) CHECK(s.raw.targets(i, 0) == doctest::Approx(std::sin(s.intrinsic.row(i).sum())));
    }
    SUBCASE("written data is min-max scaled") {
        CHECK(s.data.features.minCoeff() >= 0.0);
        CHECK(s.data.features.maxCoeff() <= 1.0);
        CHECK(s.data.targets.minCoeff() == doctest::Approx(0.0));
        CHECK(s.data.targets.maxCoeff() == doctest::Approx(1.0));
        const Dataset back = denormalize_all(s.data, s.scaling);
        CHECK((back.features - s.raw.features).cwiseAbs().maxCoeff() < 1e-12);
    }
    CHECK(gen_hypersphere(400, 2, 16.0, 8, 7).data.features == s.data.features);
}

TEST_CASE("TwoNN recovers the dimension of S^2") {
    const SyntheticData s = gen_hypersphere(2000, 2, 1.0, 5, 11);
    CHECK(twonn_estimate(s.raw.features).d_used == 2);
}

TEST_CASE("quadratic and plane generators") {
    const SyntheticData plane = gen_plane(300, 2, 5, 3);
    const Eigen::MatrixXd joint = joint_matrix(plane.raw);
    CHECK(joint.cols() == 5);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(joint.rowwise() - joint.colwise().mean());
    CHECK(svd.singularValues()(2) < 1e-10 * svd.singularValues()(0));

    const SyntheticData quad = gen_quadratic(300, 2, 5, 4);
    CHECK(joint_matrix(quad.raw).cols() == 5);
    const Eigen::MatrixXd local = joint_matrix(quad.raw) * quad.embedding;  // back to generator frame
    CHECK((local - quad.intrinsic).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(local.leftCols(2).cwiseAbs().maxCoeff() <= 1.0);
    // every normal coordinate is a pure quadratic form in the first two
    Eigen::MatrixXd forms(300, 3);
    forms.col(0) = local.col(0).cwiseAbs2();
    forms.col(1) = local.col(1).cwiseAbs2();
    forms.col(2) = local.col(0).cwiseProduct(local.col(1));
    for (Index a = 2; a < 5; ++a) {
        const Eigen::VectorXd c = forms.colPivHouseholderQr().solve(local.col(a));
        CHECK((forms * c - local.col(a)).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("generator validation") {
    SyntheticSpec spec;
    spec.kind = SyntheticKind::Hypersphere;
    spec.intrinsic_d = 2;
    spec.ambient_D = 8;
    spec.curvature = 0.0;
    CHECK(error_kind([&] { validate(spec); }) == ErrorKind::Config);
    spec.curvature = -1.0;
    CHECK(error_kind([&] { generate(spec); }) == ErrorKind::Config);
    spec.curvature = 1.0;
    spec.ambient_D = 2;
    CHECK(error_kind([&] { validate(spec); }) == ErrorKind::Config);
    spec.ambient_D = 8;
    spec.n = 9;
    CHECK(error_kind([&] { validate(spec); }) == ErrorKind::Config);
    spec.n = 100;
    CHECK_FALSE(error_kind([&] { validate(spec); }));
    CHECK(generate(spec).data.features.cols() == 8);
    CHECK(parse_synthetic_kind("plane") == SyntheticKind::Plane);
    CHECK(error_kind([] { parse_synthetic_kind("torus"); }) == ErrorKind::Config);
}

TEST_CASE("distance oracles agree with a brute-force scan") {
    Rng rng(2);
    std::uniform_real_distribution<double> ux(-1.0, 8.0), uy(-1.6, 1.6);
    for (int t = 0; t < 30; ++t) {
        const double x = ux(rng), y = uy(rng);
        const double expected = curve_distance(x, y, [](double s) { return std::sin(s); }, 3.5);
        CHECK(distance_to_sine(x, y) == doctest::Approx(expected).epsilon(1e-9));
    }
    std::uniform_real_distribution<double> px(-1.5, 1.5), py(-0.5, 2.0);
    for (double a : {0.5, 1.0, 2.0}) {
        for (int t = 0; t < 20; ++t) {
            const double x = px(rng), y = py(rng);
            const double expected = curve_distance(x, y, [a](double s) { return a * s * s; }, 3.0);
            CHECK(distance_to_parabola(x, y, a) == doctest::Approx(expected).epsilon(1e-9));
        }
    }
    CHECK(distance_to_sine(1.0, std::sin(1.0)) == 0.0);
}

TEST_CASE("statistics helpers") {
    CHECK(spearman_correlation({1, 2, 3, 4}, {10, 20, 30, 40}) == doctest::Approx(1.0));
    CHECK(spearman_correlation({1, 2, 3, 4}, {4, 3, 2, 1}) == doctest::Approx(-1.0));
    CHECK(spearman_correlation({1, 2, 3, 4}, {1, 3, 2, 4}) == doctest::Approx(0.8));
    CHECK(loglog_slope({1, 2, 4, 8}, {3, 12, 48, 192}) == doctest::Approx(2.0));
}

TEST_CASE("order experiment on the sine") {
    OrderExperimentConfig c;
    c.seed = 5;
    const ExperimentReport r = run_order_experiment(c);
    const SlopeFit* first = r.slope_for("cems_first_order");
    const SlopeFit* second = r.slope_for("cems_second_order");
    REQUIRE(first);
    REQUIRE(second);
    CHECK(std::abs(first->slope - 2.0) < 0.35);
    CHECK(std::abs(second->slope - 3.0) < 0.35);
    CHECK(first->ci_low <= first->slope);
    CHECK(first->ci_high >= first->slope);
    CHECK_FALSE(second->exact);

    const double e1a = r.find(0.08, "cems_first_order")->mean_error, e1b = r.find(0.04, "cems_first_order")->mean_error;
    const double e2a = r.find(0.08, "cems_second_order")->mean_error, e2b = r.find(0.04, "cems_second_order")->mean_error;
    CHECK(e1a / e1b == doctest::Approx(4.0).epsilon(0.2));
    CHECK(e2a / e2b == doctest::Approx(8.0).epsilon(0.2));
    for (const auto& row : r.rows) {
        CHECK(std::isfinite(row.mean_error));
        CHECK(row.count == 20);
    }
}

TEST_CASE("order experiment on a parabola is exact at second order") {
    OrderExperimentConfig c;
    c.curve = CurveKind::Quadratic;
    const ExperimentReport r = run_order_experiment(c);
    CHECK(r.slope_for("cems_second_order")->exact);
    for (double h : c.scales) CHECK(r.find(h, "cems_second_order")->mean_error < 1e-12);
    CHECK(std::abs(r.slope_for("cems_first_order")->slope - 2.0) < 0.35);
}

TEST_CASE("order experiment on a circle") {
    OrderExperimentConfig c;
    c.curve = CurveKind::Circle;
    const ExperimentReport r = run_order_experiment(c);
    CHECK(std::abs(r.slope_for("cems_first_order")->slope - 2.0) < 0.35);
    CHECK(r.slope_for("cems_second_order")->slope > 2.65);
}

TEST_CASE("order report does not depend on the worker count") {
    OrderExperimentConfig c;
    c.n_seeds = 6;
    std::ostringstream a, b;
    write_report(run_order_experiment(c), a);
    c.workers = 3;
    write_report(run_order_experiment(c), b);
    CHECK(a.str() == b.str());
    CHECK(a.str().rfind("# ", 0) == 0);
    CHECK(a.str().find("h\tmethod\tmean_error") != std::string::npos);
}

TEST_CASE("curvature sweep") {
    CurvatureSweepConfig c;
    c.n_seeds = 4;
    c.curvatures = {1e-4, 1.0, 64.0};
    const ExperimentReport r = run_curvature_sweep(c);
    CHECK(r.rows.size() == 9);  // one row per (curvature, method)
    for (double k : c.curvatures)
        for (const char* m : {"cems_second_order", "cems_first_order", "foma"}) CHECK(r.find(k, m));
    REQUIRE(r.ratios.size() == 3);
    const double flat = r.ratios[0].second;
    MESSAGE("flat-limit ratio " << flat);
    CHECK(std::abs(flat - 1.0) < 0.1);
    CHECK(r.ratios[2].second > r.ratios[1].second);

    std::ostringstream a, b;
    write_report(r, a);
    c.workers = 4;
    write_report(run_curvature_sweep(c), b);
    CHECK(a.str() == b.str());
    CHECK(a.str().find("# seed = 0") != std::string::npos);
    CHECK(a.str().find("# sigma = 0.02") != std::string::npos);
}
