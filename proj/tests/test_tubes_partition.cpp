#include <doctest.h>

#include <cmath>
#include <memory>

#include "ehlab/errors.hpp"
#include "ehlab/partition.hpp"
#include "ehlab/tubes.hpp"
#include "fixtures.hpp"

using namespace ehlab;
using namespace ehlab::fixtures;

TEST_SUITE("tubes_partition") {

TEST_CASE("radius picking starts at 1 and clears the sheared neighbor") {
    AtlasPtr atlas = shear_atlas();
    TubeFamily none;
    CHECK(pick_tube_radius(*atlas, none, 0) == 1);

    TubeFamily one;
    one.tubes.push_back({0, 1, 0, atlas->fiber.level_set(1.0)});
    one.rounds = 1;
    // T0(1) seen from chart 1 reaches height sqrt(1 + 0.5^2) < 2 over the
    // overlap, so the next barrier sits at level 2
    CHECK(pick_tube_radius(*atlas, one, 1) == 2);
}

TEST_CASE("round-robin rounds produce interleaved strictly growing radii") {
    AtlasPtr atlas = shear_atlas();
    TubeFamily fam = build_tube_family(*atlas, 4);
    CHECK(fam.rounds == 4);
    REQUIRE(fam.tubes.size() == 8);
    CHECK(fam.radii_of_chart(0) == std::vector<int>{1, 3, 5, 7});
    CHECK(fam.radii_of_chart(1) == std::vector<int>{2, 4, 6, 8});
    for (const auto& t : fam.tubes) {
        REQUIRE_FALSE(t.level_points.empty());
        for (const auto& f : t.level_points) {
            CHECK(atlas->fiber.height(f) ==
                  doctest::Approx(double(t.radius)).epsilon(1e-12));
        }
    }
}

TEST_CASE("covered height is the weakest chart's strongest barrier") {
    AtlasPtr atlas = shear_atlas();
    CHECK(covered_height(*atlas, TubeFamily{}) == 0.0);
    CHECK(covered_height(*atlas, build_tube_family(*atlas, 1)) == 1.0);
    CHECK(covered_height(*atlas, build_tube_family(*atlas, 4)) == 7.0);
}

TEST_CASE("tube closures stay pairwise separated") {
    AtlasPtr atlas = shear_atlas();
    TubeFamily fam = build_tube_family(*atlas, 3);
    TubeSeparationReport rep = tube_separation(*atlas, fam);
    CHECK(rep.pairs == 15); // 6 choose 2
    CHECK(rep.min_distance > 0.0);
}

TEST_CASE("partition weights: sum to one, subordination, flat on own tubes") {
    AtlasPtr atlas = shear_atlas();
    auto tubes = std::make_shared<TubeFamily>(build_tube_family(*atlas, 3));
    auto [pou, diag] = build_partition(atlas, tubes);

    CHECK(diag.gap_count == 0);
    CHECK(diag.max_weight_sum_err <= 1e-12);
    CHECK(diag.max_offtube_weight == 0.0);
    CHECK(diag.min_weight_sum > 0.0);

    // exactly 1 with an exactly flat gradient on the owning chart's tubes
    for (const auto& t : tubes->tubes) {
        const Chart& c = atlas->chart(t.chart);
        double b_mid = 0.5 * (c.u_lo[0] + c.u_hi[0]);
        for (const auto& f : t.level_points) {
            CHECK(pou.weight(t.chart, t.chart, v1(b_mid), f) == 1.0);
            CHECK(pou.weight(1 - t.chart, t.chart, v1(b_mid), f) == 0.0);
            Vec gb, gf;
            pou.weight_grad(t.chart, t.chart, v1(b_mid), f, gb, gf);
            CHECK(gb[0] == 0.0);
            CHECK(gf[0] == 0.0);
        }
    }

    // generic points still sum to 1
    for (double b : {-1.8, -0.3, 0.1, 0.4}) {
        for (double f : {-3.7, -1.2, 0.0, 2.4, 4.9}) {
            double w0 = pou.weight(0, 0, v1(b), v1(f));
            double w1 = pou.weight(1, 0, v1(b), v1(f));
            CHECK(w0 >= 0.0);
            CHECK(w1 >= 0.0);
            CHECK(w0 + w1 == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("weight gradients match finite differences") {
    AtlasPtr atlas = shear_atlas();
    auto tubes = std::make_shared<TubeFamily>(build_tube_family(*atlas, 3));
    PartitionOfUnity pou(atlas, tubes, 0.25);
    const double h = 1e-6;
    for (double b : {-0.35, 0.05, 0.3}) {
        for (double f : {0.4, 1.55, 2.1, 3.4, 4.15}) {
            Vec gb, gf;
            pou.weight_grad(0, 0, v1(b), v1(f), gb, gf);
            double nb = (pou.weight(0, 0, v1(b + h), v1(f)) -
                         pou.weight(0, 0, v1(b - h), v1(f))) /
                        (2.0 * h);
            double nf = (pou.weight(0, 0, v1(b), v1(f + h)) -
                         pou.weight(0, 0, v1(b), v1(f - h))) /
                        (2.0 * h);
            CHECK(gb[0] == doctest::Approx(nb).epsilon(1e-5).scale(1.0));
            CHECK(gf[0] == doctest::Approx(nf).epsilon(1e-5).scale(1.0));
        }
    }
}

TEST_CASE("same-level barriers on overlapping charts tear a hole") {
    AtlasPtr atlas = shear_atlas();
    auto clash = std::make_shared<TubeFamily>();
    clash->tubes.push_back({0, 1, 0, atlas->fiber.level_set(1.0)});
    clash->tubes.push_back({1, 1, 0, atlas->fiber.level_set(1.0)});
    clash->rounds = 1;

    // both collars are live at the overlap point where the two chart
    // heights coincide, so every mu factor carries a (1 - 1)
    PartitionOfUnity pou(atlas, clash, 0.25);
    CHECK(pou.weight_sum(0, v1(0.0), v1(0.0)) == 0.0);
    CHECK_THROWS_AS(build_partition(atlas, clash), PartitionGap);
}

TEST_CASE("band constructor accepts thick bands and rejects miscounts") {
    AtlasPtr atlas = shear_atlas();
    std::vector<std::vector<HeightBand>> bands = {{{1.0, 2.0}}, {{3.0, 4.0}}};
    PartitionOfUnity pou(atlas, bands, 0.25);
    // single-chart zone: full weight regardless of height
    CHECK(pou.weight(0, 0, v1(-1.5), v1(6.0)) == 1.0);
    // inside the own band over the overlap the collar kills the other chart
    CHECK(pou.weight(0, 0, v1(0.1), v1(1.0)) == 1.0); // height ~ 1.41 in [1,2]
    double w0 = pou.weight(0, 0, v1(0.1), v1(8.0));   // far from every band
    double w1 = pou.weight(1, 0, v1(0.1), v1(8.0));
    CHECK(w0 > 0.0);
    CHECK(w1 > 0.0);
    CHECK(w0 + w1 == doctest::Approx(1.0).epsilon(1e-12));

    std::vector<std::vector<HeightBand>> short_list = {{{1.0, 2.0}}};
    CHECK_THROWS_AS(PartitionOfUnity(atlas, short_list, 0.25), ValidationError);
}

} // TEST_SUITE
