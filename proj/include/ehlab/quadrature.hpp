#pragma once

#include <functional>
#include <vector>

#include "ehlab/linalg.hpp"

namespace ehlab {

struct QuadOptions {
    double tol = 1e-10;          // absolute tolerance for the whole integral
    int max_intervals = 200000;  // subdivision budget
    // open endpoints: shrink towards the endpoint dyadically and sum the
    // tail contributions until they stabilize below tail_tol
    bool open_left = false;
    bool open_right = false;
    double endpoint_shrink = 1e-3; // initial inset as a fraction of the span
    double tail_tol = 1e-10;
    int max_tail_halvings = 60;
};

struct QuadResult {
    double value = 0.0;
    double error_estimate = 0.0;
    int evaluations = 0;
    int intervals = 0;
};

// Gauss-Kronrod 7-15 pair on [a, b]; error = |K15 - G7|.
QuadResult gauss_kronrod_15(const std::function<double(double)>& f, double a,
                            double b);

// Adaptive bisection driven by the embedded error estimate.  Breakpoints
// partition [a, b] before refinement starts so that narrow features the
// caller knows about are never skipped over by a too-coarse first pass.
// Throws NonConvergent when the interval budget runs out.
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     const std::vector<double>& breakpoints = {},
                     const QuadOptions& opt = {});

// Re-runs the integral at a decreasing sequence of tolerances and reports
// the values; converged means the last two values agree to within the
// penultimate tolerance times `cauchy_factor`.
struct RefinementStage {
    double tol = 0.0;
    double value = 0.0;
    double error_estimate = 0.0;
    int evaluations = 0;
};

struct RefinementReport {
    std::vector<RefinementStage> stages;
    bool converged = false;
    double final_value = 0.0;
    double last_delta = 0.0;
};

RefinementReport refine_integral(const std::function<double(double)>& f, double a,
                                 double b, const std::vector<double>& breakpoints,
                                 const std::vector<double>& tols,
                                 double cauchy_factor = 10.0,
                                 const QuadOptions& base = {});

// Arc length of t -> x(t) under a metric norm sqrt(v' G(x) v).
QuadResult curve_length(const std::function<Vec(double)>& pos,
                        const std::function<Vec(double)>& vel,
                        const std::function<Mat(const Vec&)>& metric, double t0,
                        double t1, const std::vector<double>& breakpoints = {},
                        const QuadOptions& opt = {});

} // namespace ehlab
