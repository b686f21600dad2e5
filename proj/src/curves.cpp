#include "ehlab/curves.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "ehlab/smooth.hpp"

namespace ehlab {

BaseCurve segment_curve(const Vec& a, const Vec& b) {
    BaseCurve c;
    c.t0 = 0.0;
    c.t1 = 1.0;
    Vec d = b - a;
    c.pos = [a, d](double t) { return Vec(a + t * d); };
    c.vel = [d](double) { return d; };
    c.speed_bound = d.norm();
    return c;
}

BaseCurve line_curve(const Vec& start, const Vec& direction, double t0, double t1) {
    BaseCurve c;
    c.t0 = t0;
    c.t1 = t1;
    c.pos = [start, direction, t0](double t) { return Vec(start + (t - t0) * direction); };
    c.vel = [direction](double) { return direction; };
    c.speed_bound = direction.norm();
    return c;
}

BaseCurve random_waypoint_curve(const Vec& lo, const Vec& hi, const Vec& start,
                                double horizon, double speed_bound, int segments,
                                Rng& rng) {
    const int n = static_cast<int>(start.size());
    const double tau = horizon / segments;
    // quintic easing peaks at 15/8 of the mean speed
    const double reach = speed_bound * tau / 1.875;

    auto pts = std::make_shared<std::vector<Vec>>();
    pts->push_back(start);
    for (int s = 0; s < segments; ++s) {
        Vec p = pts->back();
        Vec q(n);
        for (int d = 0; d < n; ++d) {
            double step = rng.uniform(-reach, reach);
            q[d] = std::clamp(p[d] + step, lo[d], hi[d]);
        }
        // keep the per-segment displacement within the speed budget even
        // after clamping (clamping only shortens it, so this is a no-op
        // unless reach spans the whole box)
        Vec d = q - p;
        double len = d.norm();
        if (len > reach) d *= reach / len;
        pts->push_back(p + d);
    }

    BaseCurve c;
    c.t0 = 0.0;
    c.t1 = horizon;
    c.speed_bound = speed_bound;
    for (int s = 1; s < segments; ++s) c.knots.push_back(s * tau);
    c.pos = [pts, tau, segments](double t) {
        int s = std::clamp(static_cast<int>(t / tau), 0, segments - 1);
        double u = (t - s * tau) / tau;
        return Vec((*pts)[s] + smoothstep5(u) * ((*pts)[s + 1] - (*pts)[s]));
    };
    c.vel = [pts, tau, segments](double t) {
        int s = std::clamp(static_cast<int>(t / tau), 0, segments - 1);
        double u = (t - s * tau) / tau;
        return Vec((smoothstep5_d(u) / tau) * ((*pts)[s + 1] - (*pts)[s]));
    };
    return c;
}

} // namespace ehlab
