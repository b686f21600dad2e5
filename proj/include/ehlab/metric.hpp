#pragma once

#include <functional>
#include <vector>

#include "ehlab/connection.hpp"

namespace ehlab {

// A metric as a full coordinate matrix field with analytic derivative
// handles. Multi-chart metrics carry the atlas; the chart argument is then
// live and positions are (b, f) concatenated. Single-chart metrics leave
// atlas null and ignore the chart argument.
struct Metric {
    AtlasPtr atlas;   // null: plain coordinate domain
    int dim = 2;      // total coordinate dimension
    int base_dim = 0; // leading coordinates that project to the base (atlas case)
    std::function<Mat(int chart, const Vec& x)> g;
    // d g / d x_k for k = 0..dim-1; central differences when absent
    std::function<std::vector<Mat>(int chart, const Vec& x)> dg;
    // optional domain guard (box bounds for plain metrics)
    std::function<bool(int chart, const Vec& x)> in_domain;

    Mat value(int chart, const Vec& x) const { return g(chart, x); }
    std::vector<Mat> deriv(int chart, const Vec& x) const;
    bool contains(int chart, const Vec& x) const {
        return !in_domain || in_domain(chart, x);
    }
};

double metric_eval(const Metric& m, int chart, const Vec& x, const Vec& v,
                   const Vec& w);
double metric_norm(const Metric& m, int chart, const Vec& x, const Vec& v);

// connection, vertical metric, base metric; the induced total metric is
//   |(v, w)|^2 = g_B(v, v) + g_V(w - Gamma v, w - Gamma v).
struct FiberedMetric {
    AtlasPtr atlas;
    Connection conn;
    std::function<Mat(int chart, const Vec& b, const Vec& f)> g_v; // m x m
    std::function<Mat(int chart, const Vec& b)> g_b;               // n x n
    // optional analytic derivatives: lists over b then f coordinates
    std::function<void(int chart, const Vec& b, const Vec& f, std::vector<Mat>& db,
                       std::vector<Mat>& df)>
        g_v_deriv;
    std::function<std::vector<Mat>(int chart, const Vec& b)> g_b_deriv;
};

FiberedMetric flat_fibered_metric(AtlasPtr atlas, Connection conn);

// Assembles the block matrix
//   [ g_B + G^T g_V G, -G^T g_V ]
//   [ -g_V G,           g_V     ]
// with analytic derivatives threaded through the connection's coeff_deriv.
Metric total_metric(const FiberedMetric& fm);

// Coefficient of the metric's induced connection (horizontal = orthogonal
// complement of the fiber): Gamma = -G_ff^{-1} G_fb.
Mat induced_connection_coeff(const Metric& m, int chart, const Vec& x);

// 2D single-chart surface metric from component handles with first
// derivatives (needed analytically by the geodesic and length machinery).
struct SurfaceComponent {
    std::function<double(double, double)> v, dx, dy;
};

struct SurfaceMetric {
    SurfaceComponent g11, g12, g22;
    Vec dom_lo, dom_hi; // open domain box

    Mat value(double x, double y) const;
    // induced-connection slope of the y-fiber: -g12/g22
    double slope(double x, double y) const;
};

Metric surface_to_metric(const SurfaceMetric& sm);

// Keep the induced connection and the vertical component, set the
// horizontal norm to the flat base metric:
//   eta = [[1 + g12^2/g22, g12], [g12, g22]].
SurfaceMetric w_recipe(const SurfaceMetric& sm);

} // namespace ehlab
