#include <doctest.h>

#include <cmath>

#include "ehlab/construct.hpp"
#include "ehlab/errors.hpp"
#include "ehlab/lift.hpp"
#include "fixtures.hpp"

using namespace ehlab;
using namespace ehlab::fixtures;

namespace {

Mat m11(double v) {
    Mat m(1, 1);
    m(0, 0) = v;
    return m;
}

SectionFamily pi_sections(double b_lo, double b_hi, const std::vector<int>& ks) {
    const double pi = std::acos(-1.0);
    SectionFamily fam;
    fam.chart = 0;
    fam.b_lo = v1(b_lo);
    fam.b_hi = v1(b_hi);
    for (int k : ks) {
        Section s;
        double level = k * pi;
        s.level = level;
        s.fiber = [level](const Vec&) { return v1(level); };
        s.fiber_d = [](const Vec&) { return Mat(Mat::Zero(1, 1)); };
        fam.sections.push_back(std::move(s));
    }
    return fam;
}

} // namespace

TEST_SUITE("construct") {

TEST_CASE("staged construction record: barriers, separation, partition, blend") {
    AtlasPtr atlas = shear_atlas();
    CompleteConnection cc = build_complete_connection(atlas, 3);

    CHECK(cc.record.tubes->radii_of_chart(0) == std::vector<int>{1, 3, 5});
    CHECK(cc.record.tubes->radii_of_chart(1) == std::vector<int>{2, 4, 6});
    CHECK(cc.record.covered_height == 5.0);
    CHECK(cc.record.separation.min_distance > 0.0);
    CHECK(cc.record.partition.gap_count == 0);
    CHECK(cc.record.max_agreement_residual <= 1e-12);

    // the blend is usable from every chart
    CHECK(cc.connection.native_on(0));
    CHECK(cc.connection.native_on(1));
}

TEST_CASE("blend equals the chart connection exactly on its tubes") {
    AtlasPtr atlas = shear_atlas();
    CompleteConnection cc = build_complete_connection(atlas, 3);
    for (const auto& t : cc.record.tubes->tubes) {
        const Chart& c = atlas->chart(t.chart);
        for (double s : {0.15, 0.5, 0.85}) {
            Vec b = v1(c.u_lo[0] + s * (c.u_hi[0] - c.u_lo[0]));
            for (const auto& f : t.level_points) {
                // chart-induced means coefficient 0 in the owning chart
                CHECK(cc.connection.coeff(t.chart, b, f)(0, 0) == 0.0);
            }
        }
    }
}

TEST_CASE("between barrier levels the blend genuinely mixes the charts") {
    AtlasPtr atlas = shear_atlas();
    CompleteConnection cc = build_complete_connection(atlas, 3);
    // in the overlap, between chart-0 level 1 and chart-1 level 2, both
    // weights are live; the chart-1 flat family pulls the coefficient off 0
    bool saw_mix = false;
    for (double f = 1.0; f <= 4.0; f += 0.125) {
        double w0 = cc.partition->weight(0, 0, v1(0.1), v1(f));
        if (w0 > 0.05 && w0 < 0.95) {
            saw_mix = true;
            double g = cc.connection.coeff(0, v1(0.1), v1(f))(0, 0);
            CHECK(std::abs(g) > 1e-6);
            CHECK(std::abs(g) <= 1.0 + 1e-9);
        }
    }
    CHECK(saw_mix);
}

TEST_CASE("random lifts through the blended field stay finite") {
    AtlasPtr atlas = shear_atlas();
    CompleteConnection cc = build_complete_connection(atlas, 3);
    double top = std::sqrt(cc.record.covered_height * cc.record.covered_height - 1.0);
    ProbeOptions opt;
    opt.trials = 24;
    opt.horizon = 8.0;
    opt.seed = 3;
    opt.fiber_lo = v1(-0.9 * top);
    opt.fiber_hi = v1(0.9 * top);
    ProbeReport rep = completeness_probe(cc.connection, opt);
    CHECK(rep.completed == rep.trials);
    CHECK(rep.blowups == 0);
    CHECK(rep.underflow == 0);
}

TEST_CASE("equilibrium sections are horizontal and straddle small windows") {
    AtlasPtr atlas = single_chart_atlas(12.0);
    Connection trapconn;
    trapconn.atlas = atlas;
    trapconn.native_charts = {0};
    trapconn.coeff = [](int, const Vec&, const Vec& f) {
        double s = std::sin(f[0]);
        return m11(2.0 * f[0] * f[0] * s * s);
    };

    SectionFamily fam = pi_sections(-10.0, 10.0, {-1, 0, 1});
    const double pi = std::acos(-1.0);
    DisconnectVerdict v = check_disconnecting(trapconn, fam, 1e-12, -2.0, 2.0);
    CHECK(v.horizontal);
    CHECK(v.max_horizontal_residual <= 1e-12);
    CHECK(v.disconnecting);
    CHECK(v.min_level == doctest::Approx(-pi));
    CHECK(v.max_level == doctest::Approx(pi));

    // the same sections cannot fence a window wider than their span
    DisconnectVerdict wide = check_disconnecting(trapconn, fam, 1e-12, -18.0, 18.0);
    CHECK(wide.horizontal);
    CHECK_FALSE(wide.disconnecting);
}

TEST_CASE("a coefficient without zeros fails horizontality by pi squared") {
    AtlasPtr atlas = single_chart_atlas(12.0);
    Connection avg;
    avg.atlas = atlas;
    avg.native_charts = {0};
    avg.coeff = [](int, const Vec&, const Vec& f) { return m11(f[0] * f[0]); };

    SectionFamily fam = pi_sections(-10.0, 10.0, {-1, 0, 1});
    const double pi = std::acos(-1.0);
    DisconnectVerdict v = check_disconnecting(avg, fam, 1e-12, -2.0, 2.0);
    CHECK_FALSE(v.horizontal);
    // constant-height sections: residual is |Gamma(b, k pi)| = (k pi)^2
    CHECK(v.max_horizontal_residual == doctest::Approx(pi * pi).epsilon(1e-12));
    CHECK(v.max_horizontal_residual >= 9.0);
}

TEST_CASE("the straddle check refuses higher fiber dimensions") {
    auto atlas = std::make_shared<BundleAtlas>();
    atlas->base.dim = 1;
    atlas->base.lo = v1(-1.0);
    atlas->base.hi = v1(1.0);
    atlas->fiber = default_euclidean_fiber(2);
    atlas->charts = {interval_chart(0, -1.1, 1.1, -1.2, 1.2)};
    Connection zero;
    zero.atlas = atlas;
    zero.coeff = [](int, const Vec&, const Vec&) { return Mat(Mat::Zero(2, 1)); };

    SectionFamily fam;
    fam.chart = 0;
    fam.b_lo = v1(-1.0);
    fam.b_hi = v1(1.0);
    Section s;
    s.fiber = [](const Vec&) {
        Vec f(2);
        f << 0.0, 0.0;
        return f;
    };
    s.fiber_d = [](const Vec&) { return Mat(Mat::Zero(2, 1)); };
    fam.sections.push_back(s);
    CHECK_THROWS_AS(check_disconnecting(zero, fam, 1e-12, -1.0, 1.0),
                    ValidationError);
}

} // TEST_SUITE
