#pragma once

#include <functional>
#include <vector>

#include "ehlab/lift.hpp"
#include "ehlab/metric.hpp"

namespace ehlab {

enum class GeoStatus { Completed, LeftDomain, StepUnderflow };

const char* geo_status_name(GeoStatus s);

struct GeodesicSample {
    double t;
    int chart;
    Vec x;
    Vec v;
    double speed; // |v|_g, constant along a geodesic
    double arc;   // accumulated length
};

struct GeodesicOptions {
    Rk45Options ode;
    bool normalize = true; // rescale the start velocity to unit speed
    double switch_shrink = 0.05;
    std::vector<double> record_times; // forced sample times within (0, horizon)
};

struct GeodesicTrace {
    std::vector<GeodesicSample> samples;
    std::vector<ChartSwitch> switches;
    GeoStatus status = GeoStatus::Completed;
    double t_star = 0.0;
    double arc_length = 0.0;
    long steps = 0;
    long rejects = 0;

    const GeodesicSample& last() const { return samples.back(); }
};

// acceleration of the geodesic equation from the metric and its derivatives
Vec geodesic_accel(const Metric& m, int chart, const Vec& x, const Vec& v);

GeodesicTrace geodesic(const Metric& m, int chart, const Vec& x0, const Vec& v0,
                       double horizon, const GeodesicOptions& opt = {});

// Horizontal lift of a base geodesic, verified against an independently
// integrated geodesic of the full metric started with the same initial
// conditions, compared on a shared time grid.
struct GeodesicLiftReport {
    LiftTrace lift;
    GeodesicTrace shot;
    double sup_deviation = 0.0;       // max |lift - shot| on the grid (common chart)
    double projection_residual = 0.0; // max |base of lift - curve|
    double max_speed_drift = 0.0;     // of the shot geodesic
};

GeodesicLiftReport lift_geodesic(const FiberedMetric& fm, const BaseCurve& base_geo,
                                 const BundlePoint& start, int grid = 200,
                                 const GeodesicOptions& opt = {});

// Exponential-map trivialization table over a base ball: (u, f) -> endpoint
// of the time-1 geodesic from (b0, f) with horizontal initial velocity u.
struct ExpTrivRow {
    double u;
    Vec f0;
    int chart;
    Vec x;
};

struct ExpTrivReport {
    Vec b0;
    std::vector<ExpTrivRow> rows; // fiber-major: f index outer, u index inner
    int u_count = 0;
    double max_commute_residual = 0.0; // |base(psi) - base_exp(u)|
    double min_jacobian_det = 0.0;     // finite-difference det over the grid
    double max_slice_residual = 0.0;   // |(d psi/du)^T G (d psi/du) - g_B|
};

// 1-dimensional base only (u is a signed radius along the base line).
ExpTrivReport exp_trivialization(const Metric& total, const Vec& b0, double radius,
                                 int u_grid, const std::vector<Vec>& fiber_points,
                                 const std::function<Vec(double)>& base_exp,
                                 double g_base,
                                 const GeodesicOptions& opt = {});

} // namespace ehlab
