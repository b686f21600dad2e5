#include <doctest.h>

#include <cmath>
#include <functional>

#include "ehlab/rk45.hpp"

using namespace ehlab;

namespace {

struct RunResult {
    Rk45State state;
    StepOutcome last = StepOutcome::Ok;
};

RunResult integrate(const std::function<Vec(double, const Vec&)>& rhs, double t0,
                    Vec y0, double t1, const Rk45Options& opt = {}) {
    RunResult r;
    r.state.t = t0;
    r.state.y = std::move(y0);
    r.state.h = (t1 - t0) / 100.0;
    const double h_min = opt.h_min_frac * (t1 - t0);
    double acc = 0.0;
    while (r.state.t < t1) {
        r.last = rk45_adaptive_step(rhs, r.state, t1, h_min, opt, acc);
        if (r.last == StepOutcome::Underflow) break;
        if (r.state.steps > opt.max_steps) break;
    }
    return r;
}

Vec one(double v) {
    Vec y(1);
    y[0] = v;
    return y;
}

} // namespace

TEST_SUITE("rk45") {

TEST_CASE("exponential growth is integrated to controller accuracy") {
    auto rhs = [](double, const Vec& y) { return y; };
    RunResult r = integrate(rhs, 0.0, one(1.0), 1.0);
    REQUIRE(r.last == StepOutcome::Ok);
    CHECK(std::abs(r.state.t - 1.0) <= 1e-12);
    CHECK(r.state.y[0] == doctest::Approx(std::exp(1.0)).epsilon(1e-8));
    CHECK(r.state.steps > 5);
}

TEST_CASE("oscillatory right-hand side lands on the endpoint") {
    auto rhs = [](double t, const Vec&) { return one(std::cos(t)); };
    const double t1 = 4.0;
    RunResult r = integrate(rhs, 0.0, one(0.0), t1);
    REQUIRE(r.last == StepOutcome::Ok);
    CHECK(std::abs(r.state.t - t1) <= 1e-12);
    CHECK(r.state.y[0] == doctest::Approx(std::sin(t1)).epsilon(1e-9));
}

TEST_CASE("quadratic growth underflows at the pole") {
    // y' = y^2 from 1 blows up at t = 1; the controller must collapse the
    // step below h_min just short of the pole instead of stepping past it
    auto rhs = [](double, const Vec& y) { return one(y[0] * y[0]); };
    RunResult r = integrate(rhs, 0.0, one(1.0), 2.0);
    CHECK(r.last == StepOutcome::Underflow);
    CHECK(r.state.t <= 1.0);
    CHECK(r.state.t > 1.0 - 1e-6);
    CHECK(r.state.y[0] > 1e6);
}

TEST_CASE("fixed step shows fifth order convergence") {
    auto rhs = [](double, const Vec& y) { return y; };
    double e1 = std::abs(rk45_fixed_step(rhs, 0.0, one(1.0), 0.1)[0] - std::exp(0.1));
    double e2 = std::abs(rk45_fixed_step(rhs, 0.0, one(1.0), 0.05)[0] - std::exp(0.05));
    CHECK(e1 < 1e-8);
    // local error of the fifth-order solution scales like h^6
    double ratio = e1 / e2;
    CHECK(ratio > 30.0);
    CHECK(ratio < 130.0);
}

TEST_CASE("error norm is zero for a perfect step and scales linearly") {
    Vec z = one(0.0), y = one(1.0);
    CHECK(rk45_error_norm(z, y, y, 1e-9, 1e-12) == 0.0);
    Vec err = one(1e-10);
    double n1 = rk45_error_norm(err, y, y, 1e-9, 1e-12);
    double n2 = rk45_error_norm(Vec(2.0 * err), y, y, 1e-9, 1e-12);
    CHECK(n1 > 0.0);
    CHECK(n2 == doctest::Approx(2.0 * n1).epsilon(1e-12));
}

TEST_CASE("h_max caps the accepted step size") {
    auto rhs = [](double, const Vec& y) { return y; };
    Rk45Options opt;
    opt.h_max = 0.01;
    RunResult r = integrate(rhs, 0.0, one(1.0), 1.0, opt);
    REQUIRE(r.last == StepOutcome::Ok);
    CHECK(r.state.steps >= 100);
    CHECK(r.state.y[0] == doctest::Approx(std::exp(1.0)).epsilon(1e-10));
}

TEST_CASE("stiff decay still reaches the endpoint") {
    // strongly damped linear problem: accuracy requirements force small
    // steps but the controller must not underflow
    auto rhs = [](double, const Vec& y) { return one(-50.0 * y[0]); };
    RunResult r = integrate(rhs, 0.0, one(1.0), 1.0);
    REQUIRE(r.last == StepOutcome::Ok);
    CHECK(r.state.y[0] == doctest::Approx(std::exp(-50.0)).epsilon(1e-4));
}

} // TEST_SUITE
