#pragma once

#include <functional>
#include <vector>

#include "ehlab/bundle.hpp"
#include "ehlab/linalg.hpp"

namespace ehlab {

// Smooth scalar on the total space; evaluation is chart-aware so the same
// field can be queried from any chart presentation of a point.
struct ScalarField {
    std::function<double(int chart, const Vec& b, const Vec& f)> value;
    // optional gradients with respect to the chart's (b, f) coordinates
    std::function<void(int chart, const Vec& b, const Vec& f, Vec& gb, Vec& gf)> grad;
};

// d coeff / d b_l (n entries) and d coeff / d f_l (m entries), each m x n
struct CoeffDeriv {
    std::vector<Mat> db;
    std::vector<Mat> df;
};

// A connection as a per-chart coefficient field Gamma(b, f): R^n -> R^m.
// The horizontal space at (b, f) in a chart is {(v, Gamma v)}.
struct Connection {
    AtlasPtr atlas;
    // charts where coeff may be evaluated directly; empty = all charts
    std::vector<int> native_charts;
    std::function<Mat(int chart, const Vec& b, const Vec& f)> coeff;
    // optional analytic derivatives
    std::function<CoeffDeriv(int chart, const Vec& b, const Vec& f)> coeff_deriv;

    bool native_on(int chart) const;
    int first_native() const;
};

// Chart-induced connection of a trivialization: coefficient identically 0 in
// its own chart.
Connection chart_induced_connection(AtlasPtr atlas, int chart);

// Gamma in chart `to` of the horizontal space given by Gamma_from at (b, f),
// f in chart-`from` fiber coordinates:
//   Gamma_to = d_b t + d_f t * Gamma_from.
Mat push_forward_connection(const Connection& conn, int from, int to, const Vec& b,
                            const Vec& f_from);

// Same pushforward, for a raw coefficient value (no Connection needed).
Mat push_forward_coeff(const BundleAtlas& atlas, int from, int to, const Vec& b,
                       const Vec& f_from, const Mat& gamma_from);

// Coefficient of the connection expressed in an arbitrary chart (pushing
// forward from a native chart when necessary). f is in `chart` coordinates.
Mat coeff_in_chart(const Connection& conn, int chart, const Vec& b, const Vec& f);

// Derivatives of coeff_in_chart with respect to the evaluation chart's
// coordinates; analytic chain rule through the transition when the summand
// lives on another chart.
CoeffDeriv coeff_deriv_in_chart(const Connection& conn, int chart, const Vec& b,
                                const Vec& f);

struct BlendOptions {
    int validation_samples = 200;
    double fiber_range = 10.0;
    double weight_sum_tol = 1e-9;
    std::uint64_t seed = 0;
};

// Pointwise convex combination of connections. Weights must sum to 1
// (validated by sampling); summands with weight exactly 0 are skipped, so on
// a region where one weight is 1 the result is that coefficient bitwise up
// to one multiply-add.
Connection blend(std::vector<Connection> conns, std::vector<ScalarField> weights,
                 const BlendOptions& opt = {});

// Max over sampled overlap points of |pushforward of Gamma_i - Gamma_j|;
// meaningful for globally defined connections.
double connection_compatibility_residual(const Connection& conn, int samples,
                                         double fiber_range, std::uint64_t seed = 0);

} // namespace ehlab
