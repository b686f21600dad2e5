#include <doctest.h>

#include <cmath>

#include "ehlab/smooth.hpp"

using namespace ehlab;

namespace {

template <class F>
double fd(F f, double x, double h = 1e-6) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

} // namespace

TEST_SUITE("smooth") {

TEST_CASE("smoothstep5 endpoints, clamping, midpoint") {
    CHECK(smoothstep5(0.0) == 0.0);
    CHECK(smoothstep5(1.0) == 1.0);
    CHECK(smoothstep5(-3.0) == 0.0);
    CHECK(smoothstep5(7.0) == 1.0);
    CHECK(smoothstep5(0.5) == doctest::Approx(0.5).epsilon(1e-15));
    // closed form at 1/4: (1/64)(10 - 15/4 + 6/16)
    CHECK(smoothstep5(0.25) == doctest::Approx(0.103515625).epsilon(1e-15));
}

TEST_CASE("smoothstep5 is monotone with C2-flat ends") {
    double prev = 0.0;
    for (int i = 1; i <= 400; ++i) {
        double v = smoothstep5(i / 400.0);
        CHECK(v >= prev);
        prev = v;
    }
    CHECK(smoothstep5_d(0.0) == 0.0);
    CHECK(smoothstep5_d(1.0) == 0.0);
    CHECK(smoothstep5_dd(0.0) == 0.0);
    CHECK(smoothstep5_dd(1.0) == 0.0);
    // quadratic decay of the slope near the ends keeps the glued pieces C2
    CHECK(smoothstep5_d(1e-4) < 1e-6);
    CHECK(smoothstep5_d(1.0 - 1e-4) < 1e-6);
}

TEST_CASE("smoothstep5 derivative handles match finite differences") {
    CHECK(smoothstep5_d(0.5) == doctest::Approx(1.875).epsilon(1e-15));
    for (double s : {0.1, 0.3, 0.5, 0.62, 0.9}) {
        CHECK(smoothstep5_d(s) ==
              doctest::Approx(fd([](double x) { return smoothstep5(x); }, s))
                  .epsilon(1e-8));
        CHECK(smoothstep5_dd(s) ==
              doctest::Approx(fd([](double x) { return smoothstep5_d(x); }, s))
                  .epsilon(1e-8));
    }
}

TEST_CASE("ramp_up rails and slope scaling") {
    CHECK(ramp_up(1.9, 2.0, 6.0) == 0.0);
    CHECK(ramp_up(2.0, 2.0, 6.0) == 0.0);
    CHECK(ramp_up(6.0, 2.0, 6.0) == 1.0);
    CHECK(ramp_up(9.0, 2.0, 6.0) == 1.0);
    CHECK(ramp_up(4.0, 2.0, 6.0) == doctest::Approx(0.5).epsilon(1e-15));
    // chain rule: peak slope 1.875 divided by the ramp width
    CHECK(ramp_up_d(4.0, 2.0, 6.0) == doctest::Approx(1.875 / 4.0).epsilon(1e-15));
    for (double x : {2.5, 3.7, 5.1}) {
        CHECK(ramp_up_d(x, 2.0, 6.0) ==
              doctest::Approx(fd([](double u) { return ramp_up(u, 2.0, 6.0); }, x))
                  .epsilon(1e-8));
    }
}

TEST_CASE("plateau_bump is exactly 1 on the plateau and 0 outside the support") {
    auto bump = [](double x) { return plateau_bump(x, -2.0, -1.0, 1.0, 3.0); };
    for (double x : {-1.0, -0.5, 0.0, 0.7, 1.0}) CHECK(bump(x) == 1.0);
    for (double x : {-2.0, -5.0, 3.0, 10.0}) CHECK(bump(x) == 0.0);
    for (double x : {-1.7, 1.9}) {
        CHECK(bump(x) > 0.0);
        CHECK(bump(x) < 1.0);
    }
    for (double x : {-1.5, -1.2, 1.4, 2.8, 0.3}) {
        CHECK(plateau_bump_d(x, -2.0, -1.0, 1.0, 3.0) ==
              doctest::Approx(fd(bump, x)).epsilon(1e-8).scale(1.0));
    }
    CHECK(plateau_bump_d(0.0, -2.0, -1.0, 1.0, 3.0) == 0.0);
}

TEST_CASE("collar_cutoff holds its plateau to eps/2 and dies at eps") {
    const double eps = 0.25;
    auto cut = [&](double h) { return collar_cutoff(h, 2.0, 3.0, eps); };
    // on the band and within half the collar: identically 1
    for (double h : {2.0, 2.5, 3.0, 3.0 + 0.5 * eps, 2.0 - 0.5 * eps, 3.124}) {
        CHECK(cut(h) == 1.0);
    }
    // beyond the full collar width: identically 0
    for (double h : {3.0 + eps, 2.0 - eps, 5.0, 0.0}) CHECK(cut(h) == 0.0);
    // halfway down the falloff: distance 3 eps / 4 gives smoothstep5(1/2)
    CHECK(cut(3.0 + 0.75 * eps) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(cut(2.0 - 0.75 * eps) == doctest::Approx(0.5).epsilon(1e-15));

    for (double h : {3.14, 3.2, 1.81, 1.86}) {
        CHECK(collar_cutoff_d(h, 2.0, 3.0, eps) ==
              doctest::Approx(fd(cut, h)).epsilon(1e-7));
    }
    CHECK(collar_cutoff_d(2.5, 2.0, 3.0, eps) == 0.0);
    CHECK(collar_cutoff_d(3.05, 2.0, 3.0, eps) == 0.0);
    CHECK(collar_cutoff_d(4.0, 2.0, 3.0, eps) == 0.0);
}

TEST_CASE("collar_cutoff degenerates cleanly to a thin level") {
    const double eps = 0.25;
    auto cut = [&](double h) { return collar_cutoff(h, 5.0, 5.0, eps); };
    CHECK(cut(5.0) == 1.0);
    CHECK(cut(5.0 + 0.5 * eps) == 1.0);
    CHECK(cut(5.0 - 0.5 * eps) == 1.0);
    CHECK(cut(5.0 + eps) == 0.0);
    CHECK(cut(5.0 + 0.75 * eps) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(cut(5.0 - 0.75 * eps) == doctest::Approx(0.5).epsilon(1e-15));
}

} // TEST_SUITE
