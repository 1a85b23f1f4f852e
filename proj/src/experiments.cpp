#include "cems/experiments.hpp"

#include "cems/error.hpp"
#include "cems/neighbors.hpp"
#include "cems/parallel.hpp"
#include "cems/rng.hpp"
#include "cems/samplers.hpp"
#include "cems/synthetic.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>

namespace cems {

namespace {

constexpr double kExactThreshold = 1e-12;

/// Distance from (x, y) to the graph of f. The closest graph point lies in
/// [x - r, x + r] with r the vertical gap; every sign change of the
/// stationarity condition on a fine grid of that bracket is refined with
/// TOMS 748 and the nearest candidate wins.
template <class F, class DF>
double distance_to_graph(double x, double y, F f, DF df) {
    const double r = std::abs(y - f(x));
    if (r == 0.0) return 0.0;
    const auto dist = [&](double t) { return std::hypot(t - x, f(t) - y); };
    const auto stationary = [&](double t) { return (t - x) + (f(t) - y) * df(t); };

    constexpr int kGrid = 512;
    const double step = 2.0 * r / kGrid;
    double best = std::min(dist(x - r), dist(x + r));
    double lo = x - r, g_lo = stationary(lo);
    for (int i = 1; i <= kGrid; ++i) {
        const double hi = i == kGrid ? x + r : x - r + step * i;
        const double g_hi = stationary(hi);
        if (g_lo == 0.0) best = std::min(best, dist(lo));
        if ((g_lo < 0.0) != (g_hi < 0.0) && g_hi != 0.0) {
            std::uintmax_t iterations = 200;
            const auto [a, b] = boost::math::tools::toms748_solve(
                stationary, lo, hi, g_lo, g_hi, boost::math::tools::eps_tolerance<double>(), iterations);
            best = std::min({best, dist(a), dist(b)});
        }
        lo = hi;
        g_lo = g_hi;
    }
    return std::min(best, r);
}

double mean_of(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

template <class T>
std::string join(const std::vector<T>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ',';
        if constexpr (std::is_floating_point_v<T>)
            out += fmt_double(values[i]);
        else
            out += std::to_string(values[i]);
    }
    return out;
}

std::string method_name(int order) { return order == 2 ? "cems_second_order" : "cems_first_order"; }

struct CurvePoint {
    Eigen::Vector2d position;
    double speed;
};

CurvePoint curve_at(const OrderExperimentConfig& cfg, double t, double shape) {
    switch (cfg.curve) {
    case CurveKind::Sine: return {{t, std::sin(t)}, std::hypot(1.0, std::cos(t))};
    case CurveKind::Circle: return {{cfg.circle_radius * std::cos(t), cfg.circle_radius * std::sin(t)}, cfg.circle_radius};
    case CurveKind::Quadratic: return {{t, shape * t * t}, std::hypot(1.0, 2.0 * shape * t)};
    }
    fail(ErrorKind::Internal, "unhandled curve");
}

double curve_distance(const OrderExperimentConfig& cfg, const Eigen::VectorXd& p, double shape) {
    switch (cfg.curve) {
    case CurveKind::Sine: return distance_to_sine(p(0), p(1));
    case CurveKind::Circle: return std::abs(p.norm() - cfg.circle_radius);
    case CurveKind::Quadratic: return distance_to_parabola(p(0), p(1), shape);
    }
    fail(ErrorKind::Internal, "unhandled curve");
}

}  // namespace

const char* to_string(CurveKind kind) {
    switch (kind) {
    case CurveKind::Sine: return "sine";
    case CurveKind::Circle: return "circle";
    case CurveKind::Quadratic: return "quadratic";
    }
    return "unknown";
}

CurveKind parse_curve_kind(const std::string& text) {
    if (text == "sine") return CurveKind::Sine;
    if (text == "circle") return CurveKind::Circle;
    if (text == "quadratic") return CurveKind::Quadratic;
    fail(ErrorKind::Config, "unknown curve '" + text + "' (expected sine|circle|quadratic)");
}

double distance_to_sine(double x, double y) {
    return distance_to_graph(x, y, [](double t) { return std::sin(t); }, [](double t) { return std::cos(t); });
}

double distance_to_parabola(double x, double y, double a) {
    return distance_to_graph(x, y, [a](double t) { return a * t * t; }, [a](double t) { return 2.0 * a * t; });
}

const ReportRow* ExperimentReport::find(double parameter, const std::string& method) const {
    for (const auto& r : rows)
        if (r.parameter == parameter && r.method == method) return &r;
    return nullptr;
}

const SlopeFit* ExperimentReport::slope_for(const std::string& method) const {
    for (const auto& s : slopes)
        if (s.method == method) return &s;
    return nullptr;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) fail(ErrorKind::Parameter, "slope fit needs >= 2 matching points");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    const double mx = mean_of(lx), my = mean_of(ly);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    return sxy / sxx;
}

double spearman_correlation(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2) fail(ErrorKind::Parameter, "rank correlation needs >= 2 pairs");
    const auto ranks = [](const std::vector<double>& v) {
        std::vector<std::size_t> order(v.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
        std::vector<double> r(v.size());
        for (std::size_t i = 0; i < order.size();) {
            std::size_t j = i;
            while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
            const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
            for (std::size_t q = i; q <= j; ++q) r[order[q]] = avg;
            i = j + 1;
        }
        return r;
    };
    const auto ra = ranks(a), rb = ranks(b);
    const double ma = mean_of(ra), mb = mean_of(rb);
    double num = 0.0, da = 0.0, db = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        num += (ra[i] - ma) * (rb[i] - mb);
        da += (ra[i] - ma) * (ra[i] - ma);
        db += (rb[i] - mb) * (rb[i] - mb);
    }
    if (da == 0.0 || db == 0.0) return 0.0;
    return num / std::sqrt(da * db);
}

ExperimentReport run_order_experiment(const OrderExperimentConfig& cfg) {
    if (cfg.scales.size() < 2) fail(ErrorKind::Config, "order experiment needs at least two scales");
    if (std::any_of(cfg.scales.begin(), cfg.scales.end(), [](double h) { return !(h > 0.0); }))
        fail(ErrorKind::Config, "scales must be positive");
    if (cfg.n_seeds < 2) fail(ErrorKind::Config, "order experiment needs at least two seeds");
    if (cfg.neighbors_per_side < 1) fail(ErrorKind::Config, "neighbors_per_side must be >= 1");
    for (int o : cfg.orders)
        if (o != 1 && o != 2) fail(ErrorKind::Config, "orders must be 1 or 2");
    const auto start = std::chrono::steady_clock::now();

    const std::size_t n_scales = cfg.scales.size();
    const std::size_t n_orders = cfg.orders.size();
    const auto seeds = static_cast<std::size_t>(cfg.n_seeds);
    // errors[seed][order][scale]
    std::vector<std::vector<std::vector<double>>> errors(
        seeds, std::vector<std::vector<double>>(n_orders, std::vector<double>(n_scales, 0.0)));

    parallel_for(seeds, cfg.workers, [&](std::size_t s) {
        Rng rng = stream_rng(cfg.seed, s);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        double t0 = 0.0;
        double shape = 1.0;
        if (cfg.curve == CurveKind::Quadratic)
            shape = 0.5 + 1.5 * unit(rng);  // anchored at the vertex
        else
            t0 = 2.0 * std::numbers::pi * unit(rng);
        const double sign = unit(rng) < 0.5 ? -1.0 : 1.0;
        const CurvePoint anchor = curve_at(cfg, t0, shape);
        const Index m = cfg.neighbors_per_side;

        for (std::size_t hi = 0; hi < n_scales; ++hi) {
            const double h = cfg.scales[hi];
            const double step = h / (static_cast<double>(m) * anchor.speed);
            Eigen::MatrixXd members(2 * m, 2);
            Index row = 0;
            for (Index j = -m; j <= m; ++j) {
                if (j == 0) continue;
                members.row(row++) = curve_at(cfg, t0 + static_cast<double>(j) * step, shape).position.transpose();
            }
            const Eigen::VectorXd eta = Eigen::VectorXd::Constant(1, sign * h);
            for (std::size_t oi = 0; oi < n_orders; ++oi) {
                const PointModel model = fit_point_model(members, anchor.position, 1, cfg.orders[oi], 0.0);
                const Eigen::VectorXd z = chart_to_ambient(model.basis, model.chart, model.origin, eta);
                errors[s][oi][hi] = curve_distance(cfg, z, shape);
            }
        }
    });

    ExperimentReport report;
    report.kind = "order";
    report.parameter_name = "h";
    report.config = {{"curve", to_string(cfg.curve)},
                     {"scales", join(cfg.scales)},
                     {"orders", join(cfg.orders)},
                     {"n_seeds", std::to_string(cfg.n_seeds)},
                     {"neighbors_per_side", std::to_string(cfg.neighbors_per_side)},
                     {"seed", std::to_string(cfg.seed)}};
    if (cfg.curve == CurveKind::Circle) report.config.emplace_back("circle_radius", fmt_double(cfg.circle_radius));

    boost::math::students_t t_dist(static_cast<double>(cfg.n_seeds - 1));
    const double t_crit = boost::math::quantile(boost::math::complement(t_dist, 0.025));

    for (std::size_t oi = 0; oi < n_orders; ++oi) {
        const std::string name = method_name(cfg.orders[oi]);
        std::vector<double> means;
        for (std::size_t hi = 0; hi < n_scales; ++hi) {
            std::vector<double> cell;
            for (std::size_t s = 0; s < seeds; ++s) cell.push_back(errors[s][oi][hi]);
            report.rows.push_back({cfg.scales[hi], name, mean_of(cell), sd_of(cell), cfg.n_seeds});
            means.push_back(mean_of(cell));
        }
        SlopeFit fit;
        fit.method = name;
        if (*std::max_element(means.begin(), means.end()) < kExactThreshold) {
            fit.exact = true;
        } else {
            fit.slope = loglog_slope(cfg.scales, means);
            std::vector<double> per_seed;
            for (std::size_t s = 0; s < seeds; ++s) {
                std::vector<double> e = errors[s][oi];
                for (double& v : e) v = std::max(v, std::numeric_limits<double>::min());
                per_seed.push_back(loglog_slope(cfg.scales, e));
            }
            const double half = t_crit * sd_of(per_seed) / std::sqrt(static_cast<double>(per_seed.size()));
            fit.ci_low = fit.slope - half;
            fit.ci_high = fit.slope + half;
        }
        report.slopes.push_back(fit);
    }
    report.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

namespace {

double sphere_distance(const Eigen::VectorXd& features, const Eigen::MatrixXd& embedding, double radius) {
    const Eigen::VectorXd p = embedding.transpose() * features;
    const double off_span = (features - embedding * p).norm();
    return std::hypot(p.norm() - radius, off_span);
}

}  // namespace

ExperimentReport run_curvature_sweep(const CurvatureSweepConfig& cfg) {
    if (cfg.curvatures.size() < 2) fail(ErrorKind::Config, "curvature sweep needs at least two curvatures");
    if (cfg.n_seeds < 1 || cfg.anchors_per_seed < 1 || cfg.draws_per_anchor < 1)
        fail(ErrorKind::Config, "seed, anchor and draw counts must be >= 1");
    if (!(cfg.sigma >= 0.0)) fail(ErrorKind::Config, "sigma must be >= 0");
    const auto start = std::chrono::steady_clock::now();

    const std::vector<std::string> methods{"cems_second_order", "cems_first_order", "foma"};
    const std::size_t n_curv = cfg.curvatures.size();
    const auto seeds = static_cast<std::size_t>(cfg.n_seeds);
    // errors[curvature * seeds + seed][method] = list of distances
    std::vector<std::vector<std::vector<double>>> errors(n_curv * seeds,
                                                         std::vector<std::vector<double>>(methods.size()));

    parallel_for(n_curv * seeds, cfg.workers, [&](std::size_t cell) {
        const std::size_t ci = cell / seeds;
        const std::size_t s = cell % seeds;
        const std::uint64_t data_seed = splitmix64(cfg.seed ^ splitmix64(s + 1));
        const SyntheticData sphere =
            gen_hypersphere(cfg.n, cfg.intrinsic_d, cfg.curvatures[ci], cfg.ambient_D, data_seed, cfg.noise_sd);
        const Eigen::MatrixXd joint = joint_matrix(sphere.raw);
        const NeighborIndex index(joint);
        Rng rng = stream_rng(cfg.seed, cell);
        std::uniform_int_distribution<Index> pick(0, index.size() - 1);
        const auto dist = [&](const Eigen::VectorXd& z) {
            return sphere_distance(z.head(cfg.ambient_D), sphere.embedding, sphere.radius);
        };

        for (Index a = 0; a < cfg.anchors_per_seed; ++a) {
            const Index anchor = pick(rng);
            try {
                const Neighborhood nb = knn_neighbors(index, anchor, cfg.k, false);
                const PointModel second = fit_point_model(nb.members, nb.anchor, cfg.intrinsic_d, 2, std::nullopt);
                const PointModel first = fit_point_model(nb.members, nb.anchor, cfg.intrinsic_d, 1, std::nullopt);
                for (Index q = 0; q < cfg.draws_per_anchor; ++q) {
                    const Eigen::VectorXd eta =
                        draw_noise(rng, cfg.sigma, Eigen::VectorXd::Zero(cfg.intrinsic_d));
                    errors[cell][0].push_back(dist(chart_to_ambient(second.basis, second.chart, second.origin, eta)));
                    errors[cell][1].push_back(dist(chart_to_ambient(first.basis, first.chart, first.origin, eta)));
                }
                SamplerConfig foma_cfg;
                foma_cfg.intrinsic_dim = cfg.intrinsic_d;
                foma_cfg.mode = CenterMode::Batch;
                const Neighborhood batch = knn_neighbors(index, anchor, cfg.k, true);
                const AugmentedSamples foma = foma_sample(batch, cfg.foma_lambda, foma_cfg);
                for (Index j = 0; j < foma.size(); ++j)
                    errors[cell][2].push_back(dist(foma.samples.row(j).transpose()));
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::Geometry && e.kind() != ErrorKind::Numeric) throw;
            }
        }
    });

    ExperimentReport report;
    report.kind = "curvature";
    report.parameter_name = "curvature";
    report.config = {{"curvatures", join(cfg.curvatures)},
                     {"intrinsic_d", std::to_string(cfg.intrinsic_d)},
                     {"ambient_D", std::to_string(cfg.ambient_D)},
                     {"n", std::to_string(cfg.n)},
                     {"noise_sd", fmt_double(cfg.noise_sd)},
                     {"sigma", fmt_double(cfg.sigma)},
                     {"k", std::to_string(cfg.k)},
                     {"anchors_per_seed", std::to_string(cfg.anchors_per_seed)},
                     {"draws_per_anchor", std::to_string(cfg.draws_per_anchor)},
                     {"foma_lambda", fmt_double(cfg.foma_lambda)},
                     {"n_seeds", std::to_string(cfg.n_seeds)},
                     {"seed", std::to_string(cfg.seed)},
                     {"radius_rule", "R = sqrt(d(d-1)/curvature) for d >= 2, 1/sqrt(curvature) for d = 1"}};

    std::vector<double> ratio_values;
    for (std::size_t ci = 0; ci < n_curv; ++ci) {
        std::vector<double> means(methods.size());
        for (std::size_t mi = 0; mi < methods.size(); ++mi) {
            std::vector<double> pooled;
            for (std::size_t s = 0; s < seeds; ++s) {
                const auto& v = errors[ci * seeds + s][mi];
                pooled.insert(pooled.end(), v.begin(), v.end());
            }
            means[mi] = mean_of(pooled);
            report.rows.push_back({cfg.curvatures[ci], methods[mi], means[mi], sd_of(pooled),
                                   static_cast<Index>(pooled.size())});
        }
        const double ratio = means[0] > 0.0 ? means[1] / means[0] : 0.0;
        report.ratios.emplace_back(cfg.curvatures[ci], ratio);
        ratio_values.push_back(ratio);
    }
    report.spearman = spearman_correlation(cfg.curvatures, ratio_values);
    report.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

void write_report(const ExperimentReport& report, std::ostream& out) {
    out << "# report = " << report.kind << '\n';
    for (const auto& [key, value] : report.config) out << "# " << key << " = " << value << '\n';
    if (report.kind == "order") {
        for (const auto& s : report.slopes)
            out << "# slope " << s.method << " = " << (s.exact ? std::string("exact") : fmt_double(s.slope))
                << " ci95 = [" << fmt_double(s.ci_low) << ", " << fmt_double(s.ci_high) << "]\n";
        out << "h\tmethod\tmean_error\tsd_error\tcount\tslope\tslope_ci_low\tslope_ci_high\texact\n";
        for (const auto& r : report.rows) {
            const SlopeFit* s = report.slope_for(r.method);
            out << fmt_double(r.parameter) << '\t' << r.method << '\t' << fmt_double(r.mean_error) << '\t'
                << fmt_double(r.sd_error) << '\t' << r.count << '\t' << fmt_double(s ? s->slope : 0.0) << '\t'
                << fmt_double(s ? s->ci_low : 0.0) << '\t' << fmt_double(s ? s->ci_high : 0.0) << '\t'
                << (s && s->exact ? 1 : 0) << '\n';
        }
    } else {
        out << "# spearman_ratio_vs_curvature = " << fmt_double(report.spearman) << '\n';
        out << "curvature\tmethod\tmean_error\tsd_error\tcount\tratio_first_second\n";
        for (const auto& r : report.rows) {
            double ratio = 0.0;
            for (const auto& [c, v] : report.ratios)
                if (c == r.parameter) ratio = v;
            out << fmt_double(r.parameter) << '\t' << r.method << '\t' << fmt_double(r.mean_error) << '\t'
                << fmt_double(r.sd_error) << '\t' << r.count << '\t' << fmt_double(ratio) << '\n';
        }
    }
}

}  // namespace cems
