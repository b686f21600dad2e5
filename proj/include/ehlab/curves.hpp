#pragma once

#include <functional>
#include <vector>

#include "ehlab/linalg.hpp"
#include "ehlab/rng.hpp"

namespace ehlab {

struct BaseCurve {
    double t0 = 0.0, t1 = 1.0;
    std::function<Vec(double)> pos;
    std::function<Vec(double)> vel;
    double speed_bound = 1.0;
    // integration restarts here (joints of piecewise curves)
    std::vector<double> knots;
};

// straight segment from a to b over [0, 1]
BaseCurve segment_curve(const Vec& a, const Vec& b);

// gamma(t) = start + t * direction on [t0, t1]
BaseCurve line_curve(const Vec& start, const Vec& direction, double t0, double t1);

// Random bounded-speed curve through waypoints inside a box, each segment
// eased with a quintic smoothstep so joints are C^2 with zero velocity.
// Peak speed of a segment of displacement d over duration tau is 1.875|d|/tau.
BaseCurve random_waypoint_curve(const Vec& lo, const Vec& hi, const Vec& start,
                                double horizon, double speed_bound, int segments,
                                Rng& rng);

} // namespace ehlab
