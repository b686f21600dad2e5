#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <vector>

#include "ehlab/geodesic.hpp"
#include "ehlab/metric.hpp"
#include "ehlab/partition.hpp"
#include "ehlab/tubes.hpp"

namespace ehlab {

// band tube over chart i: base in U_i, height in [radius, radius + thickness]
struct ThickTube {
    int chart = 0;
    double radius = 0.0;
    double thickness = 1.0;
    int round = 0;
    double crossing_distance = 0.0; // verified fiber-metric distance across
};

struct ThickTubeFamily {
    std::vector<ThickTube> tubes;
    int rounds = 0;

    std::vector<HeightBand> bands_of_chart(int chart) const;
};

// metric on the fiber coordinates (the same handle serves every chart)
struct FiberMetricField {
    std::function<Mat(const Vec& f)> value;
    std::function<std::vector<Mat>(const Vec& f)> deriv; // d[k] = dG/df_k
};

struct BaseMetricField {
    std::function<Mat(const Vec& b)> value;
    std::function<std::vector<Mat>(const Vec& b)> deriv;
};

FiberMetricField flat_fiber_metric(int m);
BaseMetricField flat_base_metric(int n);

struct MetricConstructOptions {
    SamplerOptions sampler;
    PartitionOptions partition;
    // candidate band thicknesses, tried in order until the crossing
    // distance across the band reaches 1
    std::vector<double> thickness_ladder{1.0, 2.0, 4.0, 8.0};
    int band_levels = 5; // heights sampled per band when maximizing over it
    double separation_quad_tol = 1e-10;
    int agreement_samples = 200; // per tube
    double agreement_tol = 1e-12;
    // empty handles mean flat pieces
    FiberMetricField fiber_metric;
    BaseMetricField base_metric;
};

struct MetricConstructRecord {
    PartitionDiagnostics partition;
    double max_agreement_residual = 0.0;
    double covered_height = 0.0; // min over charts of the top band bottom
    double min_crossing_distance = std::numeric_limits<double>::infinity();
};

struct CompleteFiberedMetric {
    AtlasPtr atlas;
    std::shared_ptr<const ThickTubeFamily> tubes;
    std::shared_ptr<const PartitionOfUnity> partition;
    Metric metric; // blended product metric, chart-indexed over the atlas
    MetricConstructRecord record;
};

// Fiber-metric distance between the sublevel set below n_lo and the
// suplevel set above n_hi (1-dimensional fibers; quadrature across each
// band component, minimum over components; +inf when nothing connects).
double band_crossing_distance(const BundleAtlas& atlas, const FiberMetricField& g_f,
                              double n_lo, double n_hi, double quad_tol = 1e-10);

// Inductive band construction: radius picked strictly above every prior
// band's reach, thickness from the ladder against the separation contract.
ThickTubeFamily build_thick_tube_family(const BundleAtlas& atlas, int rounds,
                                        const MetricConstructOptions& opt = {});

// Blends per-chart product metrics g_B x g_F by a partition of unity
// subordinate to the band complements; validates the partition and the
// on-tube agreement with the pure product metric.
CompleteFiberedMetric build_complete_fibered_metric(AtlasPtr atlas, int rounds,
                                                    const MetricConstructOptions& opt = {});

struct MetricProbeOptions {
    int trials = 100;
    double horizon = 10.0;
    std::uint64_t seed = 0;
    Rk45Options ode;
    double crossing_h_max = 0.01; // sample density for crossing detection
    double start_height_margin = 0.5; // starts below covered_height - margin
    int threads = 0; // 0: hardware
};

struct CrossingRecord {
    int trial = 0;
    int chart = 0;
    double band_lo = 0.0, band_hi = 0.0;
    double t_enter = 0.0, t_exit = 0.0;
    double arc = 0.0; // in-tube length (= time at unit speed)
};

struct MetricProbeReport {
    std::uint64_t seed = 0;
    int trials = 0;
    int completed = 0;
    int escapes = 0;     // finite-time inextensibility: step underflow
    int left_domain = 0; // hit the base wall (the toy base is an open box)
    int crossings = 0;   // full band traversals found
    double min_crossing_arc = std::numeric_limits<double>::infinity();
    double max_height = 0.0; // largest own-chart height reached by any sample
    std::vector<CrossingRecord> records;
};

// Unit-speed geodesics of the blended metric from random starts below the
// covered height; every full band traversal is timed via interpolated
// boundary hits and reported.
MetricProbeReport metric_completeness_probe(const CompleteFiberedMetric& cfm,
                                            const MetricProbeOptions& opt = {});

} // namespace ehlab
