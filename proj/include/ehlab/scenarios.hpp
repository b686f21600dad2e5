#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ehlab/construct.hpp"
#include "ehlab/metric.hpp"
#include "ehlab/metric_construct.hpp"

namespace ehlab {

// One registry entry, fully built. Named sub-objects are created lazily
// through the handles so a scenario stays cheap until a command needs it.
struct Scenario {
    std::string name;
    std::string summary;
    AtlasPtr atlas;

    std::vector<std::string> connection_names;
    std::string default_connection;
    std::function<Connection(const std::string&)> connection;

    std::vector<std::string> metric_names;
    std::string default_metric;
    std::function<Metric(const std::string&)> metric;
    // single-chart surface view when the metric is a 2D surface metric
    std::function<SurfaceMetric(const std::string&)> surface;

    // staged constructions, when the scenario supports them
    std::function<CompleteConnection(int rounds)> complete_connection;
    std::function<CompleteFiberedMetric(int rounds)> complete_metric;

    bool has_sections = false;
    SectionFamily sections;
    double window_lo = 0.0, window_hi = 0.0;

    Vec probe_fiber_lo, probe_fiber_hi; // default start window for probes
    int default_rounds = 0;             // construct default
    int metric_rounds = 0;              // metric-construct default
    int k_max = 0;                      // hill-chain truncation depth, if any

    // command defaults that only make sense per scenario
    Vec geo_x0, geo_v0;       // geodesic start when the scenario has metrics
    double exp_b0 = 0.0;      // exp-triv base point and ball radius
    double exp_radius = 0.5;

    // parameter schema: name -> default, for self-description
    std::vector<std::pair<std::string, std::string>> params;
};

// names in registry order
std::vector<std::string> scenario_names();

// Throws ConfigError for an unknown name. seed feeds randomized scenario
// ingredients (the compact-fiber connection); k_max only affects example3.
Scenario build_scenario(const std::string& name, std::uint64_t seed = 0,
                        int k_max = 12);

} // namespace ehlab
