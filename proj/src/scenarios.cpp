#include "ehlab/scenarios.hpp"

#include <cmath>
#include <memory>
#include <utility>

#include "ehlab/errors.hpp"
#include "ehlab/example3.hpp"
#include "ehlab/rng.hpp"

namespace ehlab {

namespace {

constexpr double kPi = 3.14159265358979323846;

Chart interval_chart(int id, double u_lo, double u_hi, double v_lo, double v_hi) {
    Chart c;
    c.id = id;
    c.u_lo = vec1(u_lo);
    c.u_hi = vec1(u_hi);
    c.v_lo = vec1(v_lo);
    c.v_hi = vec1(v_hi);
    return c;
}

TransitionMap identity_transition(int from, int to, int m) {
    TransitionMap t;
    t.from = from;
    t.to = to;
    t.map = [](const Vec&, const Vec& f) { return f; };
    t.d_b = [m](const Vec& b, const Vec&) { return Mat::Zero(m, b.size()); };
    t.d_f = [m](const Vec&, const Vec&) { return Mat::Identity(m, m); };
    auto zeros_bb = [m](const Vec& b, const Vec&) {
        return std::vector<Mat>(m, Mat::Zero(b.size(), b.size()));
    };
    auto zeros_bf = [m](const Vec& b, const Vec&) {
        return std::vector<Mat>(m, Mat::Zero(b.size(), m));
    };
    auto zeros_ff = [m](const Vec&, const Vec&) {
        return std::vector<Mat>(m, Mat::Zero(m, m));
    };
    t.d2_bb = zeros_bb;
    t.d2_bf = zeros_bf;
    t.d2_ff = zeros_ff;
    return t;
}

// f' = f + s*b and its inverse, with every derivative closed-form
TransitionMap shear_transition(int from, int to, double s) {
    TransitionMap t;
    t.from = from;
    t.to = to;
    t.map = [s](const Vec& b, const Vec& f) { return vec1(f[0] + s * b[0]); };
    t.d_b = [s](const Vec&, const Vec&) { return mat1(s); };
    t.d_f = [](const Vec&, const Vec&) { return mat1(1.0); };
    auto zeros = [](const Vec&, const Vec&) {
        return std::vector<Mat>(1, Mat::Zero(1, 1));
    };
    t.d2_bb = zeros;
    t.d2_bf = zeros;
    t.d2_ff = zeros;
    return t;
}

Connection scalar_connection(AtlasPtr atlas, std::function<double(double)> g,
                             std::function<double(double)> dg) {
    Connection c;
    c.atlas = std::move(atlas);
    c.coeff = [g](int, const Vec&, const Vec& f) { return mat1(g(f[0])); };
    c.coeff_deriv = [dg](int, const Vec& b, const Vec& f) {
        CoeffDeriv d;
        d.db.assign(b.size(), Mat::Zero(1, 1));
        d.df.assign(1, mat1(dg(f[0])));
        return d;
    };
    return c;
}

Scenario make_example1() {
    Scenario s;
    s.name = "example1";
    s.summary = "single-chart line bundle with two complete connections whose "
                "average blows up in finite time";

    auto atlas = std::make_shared<BundleAtlas>();
    atlas->base.dim = 1;
    atlas->base.lo = vec1(-105.0);
    atlas->base.hi = vec1(105.0);
    atlas->fiber = default_euclidean_fiber(1);
    atlas->charts.push_back(interval_chart(0, -110.0, 110.0, -112.0, 112.0));
    s.atlas = atlas;

    s.connection_names = {"H1", "H2", "average"};
    s.default_connection = "H1";
    s.connection = [atlas](const std::string& name) {
        if (name == "H1")
            return scalar_connection(
                atlas,
                [](double y) {
                    double sy = std::sin(y);
                    return 2.0 * y * y * sy * sy;
                },
                [](double y) {
                    double sy = std::sin(y);
                    return 4.0 * y * sy * sy + 2.0 * y * y * std::sin(2.0 * y);
                });
        if (name == "H2")
            return scalar_connection(
                atlas,
                [](double y) {
                    double cy = std::cos(y);
                    return 2.0 * y * y * cy * cy;
                },
                [](double y) {
                    double cy = std::cos(y);
                    return 4.0 * y * cy * cy - 2.0 * y * y * std::sin(2.0 * y);
                });
        if (name == "average")
            return scalar_connection(
                atlas, [](double y) { return y * y; },
                [](double y) { return 2.0 * y; });
        throw ConfigError("example1: unknown connection '" + name + "'");
    };

    s.has_sections = true;
    s.sections.chart = 0;
    s.sections.b_lo = vec1(-10.0);
    s.sections.b_hi = vec1(10.0);
    for (int k = -6; k <= 6; ++k) {
        Section sec;
        double level = k * kPi;
        sec.fiber = [level](const Vec&) { return vec1(level); };
        sec.fiber_d = [](const Vec& b) { return Mat::Zero(1, b.size()); };
        sec.level = level;
        s.sections.sections.push_back(std::move(sec));
    }
    s.window_lo = -18.0;
    s.window_hi = 18.0;

    s.probe_fiber_lo = vec1(0.1);
    s.probe_fiber_hi = vec1(3.0);
    s.params = {{"connection", s.default_connection}};
    return s;
}

Scenario make_tube_demo() {
    Scenario s;
    s.name = "tube-demo";
    s.summary = "two-chart shear bundle for the tube / partition / blend "
                "constructions";

    auto atlas = std::make_shared<BundleAtlas>();
    atlas->base.dim = 1;
    atlas->base.lo = vec1(-2.0);
    atlas->base.hi = vec1(2.0);
    atlas->fiber = default_euclidean_fiber(1);
    atlas->charts.push_back(interval_chart(0, -2.1, 0.5, -2.2, 0.7));
    atlas->charts.push_back(interval_chart(1, -0.5, 2.1, -0.7, 2.2));
    atlas->transitions[{0, 1}] = shear_transition(0, 1, 1.0);
    atlas->transitions[{1, 0}] = shear_transition(1, 0, -1.0);
    s.atlas = atlas;

    s.default_rounds = 4;
    s.complete_connection = [atlas](int rounds) {
        return build_complete_connection(atlas, rounds);
    };
    s.complete_metric = [atlas](int rounds) {
        return build_complete_fibered_metric(atlas, rounds);
    };

    s.connection_names = {"chart0", "chart1", "blended"};
    s.default_connection = "blended";
    int rounds = s.default_rounds;
    s.connection = [atlas, rounds](const std::string& name) {
        if (name == "chart0") return chart_induced_connection(atlas, 0);
        if (name == "chart1") return chart_induced_connection(atlas, 1);
        if (name == "blended")
            return build_complete_connection(atlas, rounds).connection;
        throw ConfigError("tube-demo: unknown connection '" + name + "'");
    };

    s.metric_names = {"blended"};
    s.default_metric = "blended";
    int mrounds = 3;
    s.metric = [atlas, mrounds](const std::string& name) {
        if (name != "blended")
            throw ConfigError("tube-demo: unknown metric '" + name + "'");
        return build_complete_fibered_metric(atlas, mrounds).metric;
    };

    s.probe_fiber_lo = vec1(-5.0);
    s.probe_fiber_hi = vec1(5.0);
    s.metric_rounds = 3;
    s.geo_x0 = vec2(-1.5, 0.5);
    s.geo_v0 = vec2(1.0, 0.2);
    s.exp_b0 = -1.5;
    s.exp_radius = 0.5;
    s.params = {{"connection", s.default_connection}, {"rounds", "4"}};
    return s;
}

Scenario make_compact_fiber(std::uint64_t seed) {
    Scenario s;
    s.name = "compact-fiber";
    s.summary = "circle-fiber bundle with a seeded bounded connection; every "
                "lift runs to the horizon";

    auto atlas = std::make_shared<BundleAtlas>();
    atlas->base.dim = 1;
    atlas->base.lo = vec1(-3.0);
    atlas->base.hi = vec1(3.0);
    atlas->fiber = default_circle_fiber();
    atlas->charts.push_back(interval_chart(0, -3.2, 0.6, -3.4, 0.8));
    atlas->charts.push_back(interval_chart(1, -0.6, 3.2, -0.8, 3.4));
    atlas->transitions[{0, 1}] = identity_transition(0, 1, 1);
    atlas->transitions[{1, 0}] = identity_transition(1, 0, 1);
    s.atlas = atlas;

    s.connection_names = {"bounded"};
    s.default_connection = "bounded";
    s.connection = [atlas, seed](const std::string& name) {
        if (name != "bounded")
            throw ConfigError("compact-fiber: unknown connection '" + name + "'");
        Rng rng(seed ^ 0xC0FFEEull);
        double c1 = rng.uniform(0.5, 1.5), c2 = rng.uniform(0.5, 1.5);
        double p1 = rng.uniform(0.0, 2.0 * kPi), p2 = rng.uniform(0.0, 2.0 * kPi);
        double w1 = rng.uniform(0.5, 2.0), w2 = rng.uniform(0.5, 2.0);
        double q1 = rng.uniform(0.0, 2.0 * kPi), q2 = rng.uniform(0.0, 2.0 * kPi);
        Connection c;
        c.atlas = atlas;
        c.coeff = [=](int, const Vec& b, const Vec& f) {
            double th = f[0], x = b[0];
            return mat1(c1 * std::sin(th + p1) * std::cos(w1 * x + q1) +
                        c2 * std::cos(2.0 * th + p2) * std::sin(w2 * x + q2));
        };
        c.coeff_deriv = [=](int, const Vec& b, const Vec& f) {
            double th = f[0], x = b[0];
            CoeffDeriv d;
            d.db.assign(1, mat1(-c1 * w1 * std::sin(th + p1) * std::sin(w1 * x + q1) +
                                c2 * w2 * std::cos(2.0 * th + p2) *
                                    std::cos(w2 * x + q2)));
            d.df.assign(1, mat1(c1 * std::cos(th + p1) * std::cos(w1 * x + q1) -
                                2.0 * c2 * std::sin(2.0 * th + p2) *
                                    std::sin(w2 * x + q2)));
            return d;
        };
        return c;
    };

    s.probe_fiber_lo = vec1(0.0);
    s.probe_fiber_hi = vec1(2.0 * kPi);
    s.params = {{"connection", s.default_connection}, {"seed", "0"}};
    return s;
}

Scenario make_example3(std::uint64_t /*seed*/, int k_max) {
    Scenario s;
    s.name = "example3";
    s.summary = "hill-chain surface: complete induced metric vs the finite-"
                "length recipe that flattens the horizontal norm";

    auto atlas = std::make_shared<BundleAtlas>();
    atlas->base.dim = 1;
    atlas->base.lo = vec1(-7.0);
    atlas->base.hi = vec1(7.0);
    atlas->fiber = default_euclidean_fiber(1);
    atlas->charts.push_back(interval_chart(0, -8.0, 8.0, -8.5, 8.5));
    s.atlas = atlas;

    auto ex = std::make_shared<Example3>(ehlab::make_example3(k_max));
    s.k_max = k_max;

    s.metric_names = {"induced", "w-recipe"};
    s.default_metric = "induced";
    s.surface = [ex](const std::string& name) {
        if (name == "induced") return ex->induced;
        if (name == "w-recipe") return ex->w;
        throw ConfigError("example3: unknown metric '" + name + "'");
    };
    auto surf = s.surface;
    s.metric = [surf](const std::string& name) {
        return surface_to_metric(surf(name));
    };

    s.probe_fiber_lo = vec1(0.5);
    s.probe_fiber_hi = vec1(6.0);
    s.geo_x0 = vec2(-2.5, 2.0);
    s.geo_v0 = vec2(1.0, 0.0);
    s.params = {{"metric", s.default_metric}, {"k_max", std::to_string(k_max)}};
    return s;
}

Scenario make_product_flat() {
    Scenario s;
    s.name = "product-flat";
    s.summary = "trivial line bundle with the zero connection and the flat "
                "product metric";

    auto atlas = std::make_shared<BundleAtlas>();
    atlas->base.dim = 1;
    atlas->base.lo = vec1(-1.0);
    atlas->base.hi = vec1(1.0);
    atlas->fiber = default_euclidean_fiber(1);
    atlas->charts.push_back(interval_chart(0, -1.1, 1.1, -1.2, 1.2));
    s.atlas = atlas;

    s.connection_names = {"zero"};
    s.default_connection = "zero";
    s.connection = [atlas](const std::string& name) {
        if (name != "zero")
            throw ConfigError("product-flat: unknown connection '" + name + "'");
        return chart_induced_connection(atlas, 0);
    };

    s.metric_names = {"flat"};
    s.default_metric = "flat";
    s.metric = [atlas](const std::string& name) {
        if (name != "flat")
            throw ConfigError("product-flat: unknown metric '" + name + "'");
        return total_metric(
            flat_fibered_metric(atlas, chart_induced_connection(atlas, 0)));
    };

    s.default_rounds = 2;
    s.complete_connection = [atlas](int rounds) {
        return build_complete_connection(atlas, rounds);
    };
    s.complete_metric = [atlas](int rounds) {
        return build_complete_fibered_metric(atlas, rounds);
    };

    s.probe_fiber_lo = vec1(-5.0);
    s.probe_fiber_hi = vec1(5.0);
    s.metric_rounds = 2;
    s.geo_x0 = vec2(0.0, 0.0);
    s.geo_v0 = vec2(1.0, 0.3);
    s.exp_b0 = 0.0;
    s.exp_radius = 0.5;
    s.params = {{"connection", s.default_connection},
                {"metric", s.default_metric}};
    return s;
}

} // namespace

std::vector<std::string> scenario_names() {
    return {"example1", "tube-demo", "compact-fiber", "example3", "product-flat"};
}

Scenario build_scenario(const std::string& name, std::uint64_t seed, int k_max) {
    if (name == "example1") return make_example1();
    if (name == "tube-demo") return make_tube_demo();
    if (name == "compact-fiber") return make_compact_fiber(seed);
    if (name == "example3") return make_example3(seed, k_max);
    if (name == "product-flat") return make_product_flat();
    throw ConfigError("unknown scenario '" + name + "'");
}

} // namespace ehlab
