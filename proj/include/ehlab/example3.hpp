#pragma once

#include <vector>

#include "ehlab/metric.hpp"
#include "ehlab/quadrature.hpp"

namespace ehlab {

// value and derivatives of the hill field at one point
struct PhiJet {
    double v = 0.0;
    double x = 0.0, y = 0.0;
    double xx = 0.0, xy = 0.0, yy = 0.0;
};

// sum of the dyadically scaled hill chains up to depth k_max; at most one
// depth is active at any point because the strips 3/2^k < y < 5/2^k are
// pairwise disjoint
PhiJet example3_phi(double x, double y, int k_max);
PhiJet example3_phi_term(double x, double y, int k);

// plateau-and-ramp descent curve: c = 4/2^k on -5/2^k <= t <= -3/2^k,
// quintic ramps between consecutive plateaus
struct CJet {
    double c = 0.0;
    double d = 0.0; // dc/dt
};

CJet example3_c(double t);

struct SurfaceSection {
    int k = 0;
    double y = 0.0;         // 4/2^k
    double x_lo = 0.0, x_hi = 0.0; // hill footprint
};

struct Example3 {
    int k_max = 12;
    SurfaceMetric induced; // first fundamental form of the graph
    SurfaceMetric w;       // flat horizontal norm, same connection and fiber
    std::vector<SurfaceSection> sections;
};

Example3 make_example3(int k_max = 12);

// parameter window of ramp k where the descent curve runs through the
// depth-k hill chain (the only place the integrand leaves 1 + c'^2)
struct SpikeWindow {
    int k = 0;
    double t_lo = 0.0, t_hi = 0.0;
};

std::vector<SpikeWindow> example3_spike_windows(int k_max);

// plateau/ramp boundaries down the ladder plus the spike windows; quadrature
// that skips these misses the crossings entirely
std::vector<double> example3_length_breakpoints(int k_max, int ladder_depth = 45);

struct Example3LengthReport {
    int k_max = 0;
    RefinementReport refinement;
    double value = 0.0;
};

// length of t -> (t, c(t)) on (-5, 0) under the given surface metric,
// refined over the tolerance ladder with the spike breakpoints installed
Example3LengthReport example3_curve_length(const SurfaceMetric& metric, int k_max,
                                           const std::vector<double>& tols = {
                                               1e-4, 1e-6, 1e-8});

} // namespace ehlab
