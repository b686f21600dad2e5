#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>

#include "ehlab/bundle.hpp"
#include "ehlab/errors.hpp"

using namespace ehlab;

namespace {

Vec v1(double x) {
    Vec v(1);
    v[0] = x;
    return v;
}

Chart interval_chart(int id, double u_lo, double u_hi, double v_lo, double v_hi) {
    Chart c;
    c.id = id;
    c.u_lo = v1(u_lo);
    c.u_hi = v1(u_hi);
    c.v_lo = v1(v_lo);
    c.v_hi = v1(v_hi);
    return c;
}

TransitionMap sine_shift(int from, int to, double s, bool analytic) {
    TransitionMap t;
    t.from = from;
    t.to = to;
    t.map = [s](const Vec& b, const Vec& f) { return Vec(f.array() + s * std::sin(b[0])); };
    if (analytic) {
        t.d_b = [s](const Vec& b, const Vec&) {
            Mat m(1, 1);
            m(0, 0) = s * std::cos(b[0]);
            return m;
        };
        t.d_f = [](const Vec&, const Vec&) { return Mat(Mat::Identity(1, 1)); };
        t.d2_bb = [s](const Vec& b, const Vec&) {
            Mat m(1, 1);
            m(0, 0) = -s * std::sin(b[0]);
            return std::vector<Mat>{m};
        };
        t.d2_bf = [](const Vec&, const Vec&) {
            return std::vector<Mat>{Mat(Mat::Zero(1, 1))};
        };
        t.d2_ff = [](const Vec&, const Vec&) {
            return std::vector<Mat>{Mat(Mat::Zero(1, 1))};
        };
    }
    return t;
}

// two interval charts glued by f -> f + sin(b) over the overlap
AtlasPtr make_two_chart_atlas(bool analytic = true) {
    auto atlas = std::make_shared<BundleAtlas>();
    atlas->base.dim = 1;
    atlas->base.lo = v1(-2.0);
    atlas->base.hi = v1(2.0);
    atlas->fiber = default_euclidean_fiber(1);
    atlas->charts = {interval_chart(0, -2.1, 0.5, -2.2, 0.7),
                     interval_chart(1, -0.5, 2.1, -0.7, 2.2)};
    atlas->transitions[{1, 0}] = sine_shift(1, 0, -1.0, analytic);
    atlas->transitions[{0, 1}] = sine_shift(0, 1, 1.0, analytic);
    return atlas;
}

} // namespace

TEST_SUITE("bundle") {

TEST_CASE("default fiber height, gradient, properness, level sets") {
    FiberModel fm = default_euclidean_fiber(1);
    CHECK(fm.height(v1(0.0)) == 1.0);
    CHECK(fm.height(v1(std::sqrt(3.0))) == doctest::Approx(2.0).epsilon(1e-15));
    for (double f : {-4.0, -0.3, 0.0, 1.7, 9.0}) {
        double h = 1e-6;
        double num = (fm.height(v1(f + h)) - fm.height(v1(f - h))) / (2.0 * h);
        CHECK(fm.height_grad(v1(f))[0] == doctest::Approx(num).epsilon(1e-7));
        CHECK(fm.height(v1(f)) >= fm.alpha * std::abs(f) - fm.beta);
    }
    auto pts = fm.level_set(2.0);
    REQUIRE(pts.size() == 2);
    std::vector<double> vals = {pts[0][0], pts[1][0]};
    std::sort(vals.begin(), vals.end());
    CHECK(vals[0] == doctest::Approx(-std::sqrt(3.0)).epsilon(1e-15));
    CHECK(vals[1] == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
    CHECK(fm.level_set(0.5).empty());
    CHECK(fm.level_set(1.0).size() == 1);

    FiberModel fm2 = default_euclidean_fiber(2);
    Vec f2(2);
    f2 << 1.0, std::sqrt(2.0);
    CHECK(fm2.height(f2) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("chart membership and normalized margin") {
    Chart c = interval_chart(0, -1.0, 3.0, -1.5, 3.5);
    CHECK(c.contains_u(v1(0.0)));
    CHECK(c.contains_u(v1(2.9)));
    CHECK_FALSE(c.contains_u(v1(3.1)));
    CHECK(c.contains_v(v1(3.1)));
    CHECK_FALSE(c.contains_v(v1(3.6)));
    // midpoint of a width-4 interval sits half a box from either wall
    CHECK(c.margin_u(v1(1.0)) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(c.margin_u(v1(2.0)) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(c.margin_u(v1(4.0)) < 0.0);
}

TEST_CASE("charts_containing reports every covering chart") {
    AtlasPtr atlas = make_two_chart_atlas();
    auto only0 = atlas->charts_containing(v1(-1.5));
    REQUIRE(only0.size() == 1);
    CHECK(only0[0] == 0);
    auto both = atlas->charts_containing(v1(0.0));
    CHECK(both.size() == 2);
    auto only1 = atlas->charts_containing(v1(1.5));
    REQUIRE(only1.size() == 1);
    CHECK(only1[0] == 1);
}

TEST_CASE("change_chart applies the transition and round-trips") {
    AtlasPtr atlas = make_two_chart_atlas();
    BundlePoint p{0, v1(0.3), v1(2.0)};
    BundlePoint q = change_chart(*atlas, p, 1);
    CHECK(q.chart == 1);
    CHECK(q.b[0] == 0.3);
    CHECK(q.f[0] == doctest::Approx(2.0 + std::sin(0.3)).epsilon(1e-15));
    BundlePoint back = change_chart(*atlas, q, 0);
    CHECK(back.f[0] == doctest::Approx(2.0).epsilon(1e-14));
    // staying put is the identity
    BundlePoint same = change_chart(*atlas, p, 0);
    CHECK(same.f[0] == 2.0);
}

TEST_CASE("change_chart rejects points outside the shared domain") {
    AtlasPtr atlas = make_two_chart_atlas();
    BundlePoint far{1, v1(2.0), v1(0.0)};
    CHECK_THROWS_AS(change_chart(*atlas, far, 0), OutOfOverlap);

    // drop one direction of the gluing and ask for it
    auto broken = std::make_shared<BundleAtlas>(*atlas);
    broken->transitions.erase({0, 1});
    BundlePoint mid{0, v1(0.0), v1(1.0)};
    CHECK_THROWS_AS(change_chart(*broken, mid, 1), MissingTransition);
}

TEST_CASE("height is a chart-level quantity, not an invariant") {
    AtlasPtr atlas = make_two_chart_atlas();
    BundlePoint p{0, v1(0.3), v1(1.0)};
    double h0 = height_of(*atlas, p);
    double h1 = height_of(*atlas, change_chart(*atlas, p, 1));
    CHECK(h0 == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(std::abs(h1 - h0) > 0.1);
}

TEST_CASE("finite-difference Jacobians agree with analytic handles") {
    TransitionMap an = sine_shift(0, 1, 1.0, true);
    TransitionMap fd = sine_shift(0, 1, 1.0, false);
    for (double b : {-0.4, 0.0, 0.3}) {
        for (double f : {-1.0, 0.5, 2.0}) {
            Mat db_a = transition_db(an, v1(b), v1(f));
            Mat db_n = transition_db(fd, v1(b), v1(f));
            CHECK(db_a(0, 0) == doctest::Approx(db_n(0, 0)).epsilon(1e-6));
            Mat df_a = transition_df(an, v1(b), v1(f));
            Mat df_n = transition_df(fd, v1(b), v1(f));
            CHECK(df_a(0, 0) == doctest::Approx(df_n(0, 0)).epsilon(1e-6));
            auto bb_a = transition_d2bb(an, v1(b), v1(f));
            auto bb_n = transition_d2bb(fd, v1(b), v1(f));
            CHECK(bb_a[0](0, 0) ==
                  doctest::Approx(bb_n[0](0, 0)).epsilon(1e-4).scale(1.0));
        }
    }
}

TEST_CASE("validate_atlas passes a consistent atlas") {
    AtlasPtr atlas = make_two_chart_atlas();
    AtlasReport rep = validate_atlas(*atlas, 300, 7);
    CHECK(rep.ok(1e-9));
    CHECK(rep.max_identity_residual <= 1e-12);
    CHECK(rep.cover_gap_count == 0);
    CHECK(rep.min_det_df > 0.5);
}

TEST_CASE("validate_atlas flags a broken cocycle") {
    auto atlas = std::make_shared<BundleAtlas>(*make_two_chart_atlas());
    TransitionMap bad = sine_shift(1, 0, -1.0, false);
    bad.map = [](const Vec& b, const Vec& f) {
        return Vec(f.array() - std::sin(b[0]) + 0.05);
    };
    atlas->transitions[{1, 0}] = bad;
    AtlasReport rep = validate_atlas(*atlas, 300, 7);
    CHECK(rep.max_cocycle_residual >= 0.04);
    CHECK_FALSE(rep.ok(1e-9));
}

TEST_CASE("validate_atlas flags an uncovered base region") {
    auto atlas = std::make_shared<BundleAtlas>(*make_two_chart_atlas());
    atlas->charts[0] = interval_chart(0, -2.1, 0.3, -2.2, 0.5);
    atlas->charts[1] = interval_chart(1, 0.9, 2.1, 0.7, 2.2);
    AtlasReport rep = validate_atlas(*atlas, 400, 7);
    CHECK(rep.cover_gap_count > 0);
    CHECK_FALSE(rep.cover_gap_examples.empty());
}

} // TEST_SUITE
