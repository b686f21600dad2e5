#include <doctest.h>

#include <cmath>

#include "ehlab/errors.hpp"
#include "ehlab/metric_construct.hpp"
#include "fixtures.hpp"

using namespace ehlab;
using namespace ehlab::fixtures;

namespace {

// conformal scalar fiber metric g(f) df^2
FiberMetricField scalar_fiber_metric(double (*g)(double), double (*dg)(double)) {
    FiberMetricField fm;
    fm.value = [g](const Vec& f) {
        Mat m(1, 1);
        m(0, 0) = g(f[0]);
        return m;
    };
    fm.deriv = [dg](const Vec& f) {
        Mat m(1, 1);
        m(0, 0) = dg(f[0]);
        return std::vector<Mat>{m};
    };
    return fm;
}

double inv1pf2(double f) { return 1.0 / (1.0 + f * f); }
double inv1pf2_d(double f) {
    double d = 1.0 + f * f;
    return -2.0 * f / (d * d);
}

} // namespace

TEST_SUITE("metric_construct") {

TEST_CASE("flat crossing distances are height-level chord lengths") {
    AtlasPtr atlas = shear_atlas();
    FiberMetricField flat = flat_fiber_metric(1);
    // from h = n_lo to h = n_hi the fiber runs between sqrt(n^2 - 1) marks
    CHECK(band_crossing_distance(*atlas, flat, 1.0, 2.0) ==
          doctest::Approx(std::sqrt(3.0)).epsilon(1e-9));
    CHECK(band_crossing_distance(*atlas, flat, 5.0, 6.0) ==
          doctest::Approx(std::sqrt(35.0) - std::sqrt(24.0)).epsilon(1e-9));
}

TEST_CASE("crossing distances integrate a genuine fiber metric") {
    AtlasPtr atlas = shear_atlas();
    FiberMetricField g = scalar_fiber_metric(inv1pf2, inv1pf2_d);
    // int_0^{sqrt 3} df / sqrt{1 + f^2} = asinh(sqrt 3)
    CHECK(band_crossing_distance(*atlas, g, 1.0, 2.0) ==
          doctest::Approx(std::asinh(std::sqrt(3.0))).epsilon(1e-8));
    // crossing from the negative side must give the same by symmetry: the
    // reported value is the minimum over band components
    double d12 = band_crossing_distance(*atlas, g, 2.0, 3.0);
    double direct = std::asinh(std::sqrt(8.0)) - std::asinh(std::sqrt(3.0));
    CHECK(d12 == doctest::Approx(direct).epsilon(1e-8));
}

TEST_CASE("band construction interleaves and certifies unit crossings") {
    AtlasPtr atlas = shear_atlas();
    ThickTubeFamily fam = build_thick_tube_family(*atlas, 3);
    REQUIRE(fam.tubes.size() == 6);

    auto b0 = fam.bands_of_chart(0);
    auto b1 = fam.bands_of_chart(1);
    REQUIRE(b0.size() == 3);
    REQUIRE(b1.size() == 3);
    CHECK(b0[0].lo == 1.0);
    CHECK(b0[0].hi == 2.0);
    CHECK(b0[1].lo == 5.0);
    CHECK(b0[1].hi == 6.0);
    CHECK(b0[2].lo == 9.0);
    CHECK(b0[2].hi == 10.0);
    CHECK(b1[0].lo == 3.0);
    CHECK(b1[0].hi == 4.0);
    CHECK(b1[1].lo == 7.0);
    CHECK(b1[1].hi == 8.0);
    CHECK(b1[2].lo == 11.0);
    CHECK(b1[2].hi == 12.0);

    const double expected[6] = {
        std::sqrt(3.0),                      // 1 -> 2
        std::sqrt(15.0) - std::sqrt(8.0),    // 3 -> 4
        std::sqrt(35.0) - std::sqrt(24.0),   // 5 -> 6
        std::sqrt(63.0) - std::sqrt(48.0),   // 7 -> 8
        std::sqrt(99.0) - std::sqrt(80.0),   // 9 -> 10
        std::sqrt(143.0) - std::sqrt(120.0), // 11 -> 12
    };
    int checked = 0;
    for (const auto& t : fam.tubes) {
        CHECK(t.thickness == 1.0);
        CHECK(t.crossing_distance >= 1.0);
        for (int i = 0; i < 6; ++i) {
            if (std::abs(t.radius - std::vector<double>{1, 3, 5, 7, 9, 11}[i]) <
                1e-12) {
                CHECK(t.crossing_distance ==
                      doctest::Approx(expected[i]).epsilon(1e-9));
                ++checked;
            }
        }
    }
    CHECK(checked == 6);
}

TEST_CASE("a shrinking fiber metric forces thicker bands") {
    AtlasPtr atlas = shear_atlas();
    MetricConstructOptions opt;
    // constant conformal factor 0.04: flat distances scale by 0.2, so the
    // unit-thickness band 1 -> 2 crosses in 0.2 sqrt 3 < 1 and the ladder
    // must escalate to thickness 8 (0.2 sqrt 80 > 1)
    opt.fiber_metric.value = [](const Vec&) {
        Mat m(1, 1);
        m(0, 0) = 0.04;
        return m;
    };
    opt.fiber_metric.deriv = [](const Vec&) {
        return std::vector<Mat>{Mat(Mat::Zero(1, 1))};
    };
    ThickTubeFamily fam = build_thick_tube_family(*atlas, 1, opt);
    REQUIRE_FALSE(fam.tubes.empty());
    const ThickTube& first = fam.tubes.front();
    CHECK(first.radius == 1.0);
    CHECK(first.thickness == 8.0);
    CHECK(first.crossing_distance >= 1.0);
    CHECK(first.crossing_distance ==
          doctest::Approx(0.2 * std::sqrt(80.0)).epsilon(1e-8));
}

TEST_CASE("an exhausted thickness ladder is a hard failure") {
    AtlasPtr atlas = shear_atlas();
    MetricConstructOptions opt;
    opt.fiber_metric.value = [](const Vec&) {
        Mat m(1, 1);
        m(0, 0) = 0.01; // 0.1 sqrt 80 < 1 even at thickness 8
        return m;
    };
    opt.fiber_metric.deriv = [](const Vec&) {
        return std::vector<Mat>{Mat(Mat::Zero(1, 1))};
    };
    CHECK_THROWS_AS(build_thick_tube_family(*atlas, 1, opt), SeparationViolation);
}

TEST_CASE("blended metric is the exact product on its own bands") {
    AtlasPtr atlas = shear_atlas();
    CompleteFiberedMetric cfm = build_complete_fibered_metric(atlas, 3);
    CHECK(cfm.record.partition.gap_count == 0);
    CHECK(cfm.record.max_agreement_residual <= 1e-12);
    CHECK(cfm.record.covered_height == 9.0);
    CHECK(cfm.record.min_crossing_distance >= 1.0);

    for (const auto& t : cfm.tubes->tubes) {
        const Chart& c = atlas->chart(t.chart);
        double b_mid = 0.5 * (c.u_lo[0] + c.u_hi[0]);
        double f_mid = std::sqrt(std::pow(t.radius + 0.5 * t.thickness, 2) - 1.0);
        Vec x(2);
        x << b_mid, f_mid;
        Mat G = cfm.metric.value(t.chart, x);
        CHECK(G(0, 0) == 1.0);
        CHECK(G(0, 1) == 0.0);
        CHECK(G(1, 1) == 1.0);
        // flat zone: every derivative entry vanishes identically
        auto dG = cfm.metric.deriv(t.chart, x);
        for (const auto& d : dG) {
            CHECK(d.cwiseAbs().maxCoeff() == 0.0);
        }
    }
}

TEST_CASE("mixing zones stay symmetric positive definite") {
    AtlasPtr atlas = shear_atlas();
    CompleteFiberedMetric cfm = build_complete_fibered_metric(atlas, 2);
    for (double b : {-0.4, 0.0, 0.3}) {
        for (double f : {0.0, 1.4, 2.3, 3.6, 5.2}) {
            Vec x(2);
            x << b, f;
            Mat G = cfm.metric.value(0, x);
            CHECK(G(0, 1) == doctest::Approx(G(1, 0)).epsilon(1e-15));
            double tr = G(0, 0) + G(1, 1);
            double det = G(0, 0) * G(1, 1) - G(0, 1) * G(1, 0);
            CHECK(det > 0.0);
            CHECK(tr > 0.0);
        }
    }
}

TEST_CASE("vertical flat-zone geodesics cross bands at the certified cost") {
    AtlasPtr atlas = shear_atlas();
    CompleteFiberedMetric cfm = build_complete_fibered_metric(atlas, 3);
    // b = -1.5 lies outside chart 1's outer domain, so the blend is the
    // pure product there for every height and the vertical line is a
    // geodesic; it enters band [5, 6] at f = sqrt(24) and leaves at sqrt(35)
    Vec x0(2), v0(2);
    x0 << -1.5, 3.0;
    v0 << 0.0, 1.0;
    GeodesicTrace tr = geodesic(cfm.metric, 0, x0, v0, 4.0);
    REQUIRE(tr.status == GeoStatus::Completed);
    CHECK(tr.last().x[0] == doctest::Approx(-1.5).epsilon(1e-10));
    CHECK(tr.last().x[1] == doctest::Approx(7.0).epsilon(1e-9));
    double enter = std::sqrt(24.0) - 3.0, exit = std::sqrt(35.0) - 3.0;
    CHECK(exit - enter ==
          doctest::Approx(std::sqrt(35.0) - std::sqrt(24.0)).epsilon(1e-12));
    // the certified distance for band [5, 6] is exactly that span
    for (const auto& t : cfm.tubes->tubes) {
        if (t.chart == 0 && t.radius == 5.0) {
            CHECK(t.crossing_distance ==
                  doctest::Approx(exit - enter).epsilon(1e-9));
        }
    }
}

TEST_CASE("the completeness probe counts crossings and never escapes") {
    AtlasPtr atlas = shear_atlas();
    CompleteFiberedMetric cfm = build_complete_fibered_metric(atlas, 3);
    MetricProbeOptions opt;
    opt.trials = 30;
    opt.horizon = 5.0;
    opt.seed = 11;
    opt.threads = 1;
    MetricProbeReport rep = metric_completeness_probe(cfm, opt);
    CHECK(rep.trials == 30);
    CHECK(rep.escapes == 0);
    CHECK(rep.completed + rep.left_domain == rep.trials);
    CHECK(rep.crossings == int(rep.records.size()));
    if (rep.crossings > 0) {
        CHECK(rep.min_crossing_arc >= 1.0 - 1e-6);
        for (const auto& c : rep.records) {
            CHECK(c.arc >= 1.0 - 1e-6);
            CHECK(c.t_exit > c.t_enter);
        }
    }

    // deterministic and thread-count independent
    MetricProbeReport again = metric_completeness_probe(cfm, opt);
    CHECK(again.max_height == rep.max_height);
    CHECK(again.crossings == rep.crossings);
    CHECK(again.completed == rep.completed);
    opt.threads = 2;
    MetricProbeReport wide = metric_completeness_probe(cfm, opt);
    CHECK(wide.max_height == rep.max_height);
    CHECK(wide.crossings == rep.crossings);
}

TEST_CASE("the probe refuses a family too short to start under") {
    AtlasPtr atlas = shear_atlas();
    CompleteFiberedMetric cfm = build_complete_fibered_metric(atlas, 1);
    // covered height 1 leaves no room below after the safety margin
    MetricProbeOptions opt;
    opt.trials = 4;
    CHECK_THROWS_AS(metric_completeness_probe(cfm, opt), ValidationError);
}

} // TEST_SUITE
