#pragma once

#include <cmath>
#include <memory>
#include <vector>

#include "ehlab/bundle.hpp"

namespace ehlab::fixtures {

inline Vec v1(double x) {
    Vec v(1);
    v[0] = x;
    return v;
}

inline Vec v2(double x, double y) {
    Vec v(2);
    v[0] = x;
    v[1] = y;
    return v;
}

inline Chart interval_chart(int id, double u_lo, double u_hi, double v_lo,
                            double v_hi) {
    Chart c;
    c.id = id;
    c.u_lo = v1(u_lo);
    c.u_hi = v1(u_hi);
    c.v_lo = v1(v_lo);
    c.v_hi = v1(v_hi);
    return c;
}

// f -> f + s * sin(b), optionally with analytic jets
inline TransitionMap sine_shift(int from, int to, double s, bool analytic = true) {
    TransitionMap t;
    t.from = from;
    t.to = to;
    t.map = [s](const Vec& b, const Vec& f) {
        return Vec(f.array() + s * std::sin(b[0]));
    };
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

// two interval charts over [-2, 2] glued by f -> f + sin(b)
inline AtlasPtr two_chart_atlas(bool analytic = true) {
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

// f -> f + s * b with analytic jets (all second derivatives vanish)
inline TransitionMap shear(int from, int to, double s) {
    TransitionMap t;
    t.from = from;
    t.to = to;
    t.map = [s](const Vec& b, const Vec& f) { return Vec(f.array() + s * b[0]); };
    t.d_b = [s](const Vec&, const Vec&) {
        Mat m(1, 1);
        m(0, 0) = s;
        return m;
    };
    t.d_f = [](const Vec&, const Vec&) { return Mat(Mat::Identity(1, 1)); };
    auto zeros = [](const Vec&, const Vec&) {
        return std::vector<Mat>(1, Mat::Zero(1, 1));
    };
    t.d2_bb = zeros;
    t.d2_bf = zeros;
    t.d2_ff = zeros;
    return t;
}

// two interval charts over [-2, 2] glued by the unit shear
inline AtlasPtr shear_atlas() {
    auto atlas = std::make_shared<BundleAtlas>();
    atlas->base.dim = 1;
    atlas->base.lo = v1(-2.0);
    atlas->base.hi = v1(2.0);
    atlas->fiber = default_euclidean_fiber(1);
    atlas->charts = {interval_chart(0, -2.1, 0.5, -2.2, 0.7),
                     interval_chart(1, -0.5, 2.1, -0.7, 2.2)};
    atlas->transitions[{0, 1}] = shear(0, 1, 1.0);
    atlas->transitions[{1, 0}] = shear(1, 0, -1.0);
    return atlas;
}

// one chart covering [-lim, lim] with a little slack
inline AtlasPtr single_chart_atlas(double lim) {
    auto atlas = std::make_shared<BundleAtlas>();
    atlas->base.dim = 1;
    atlas->base.lo = v1(-lim);
    atlas->base.hi = v1(lim);
    atlas->fiber = default_euclidean_fiber(1);
    atlas->charts = {
        interval_chart(0, -lim - 0.1, lim + 0.1, -lim - 0.2, lim + 0.2)};
    return atlas;
}

} // namespace ehlab::fixtures
