#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <vector>

#include "ehlab/bundle.hpp"

namespace ehlab {

// T_i(n) = phi_i^{-1}(U_i x h^{-1}(n)): a barrier hypersurface over chart i.
struct Tube {
    int chart = 0;
    int radius = 0; // integer height level n
    int round = 0;  // creation round
    std::vector<Vec> level_points; // h^{-1}(n) in chart-i fiber coordinates
};

struct TubeFamily {
    std::vector<Tube> tubes;
    int rounds = 0;

    std::vector<int> radii_of_chart(int chart) const;
};

struct SamplerOptions {
    int grid_per_dim = 64;
    int refine_rounds = 3;
    int refine_iters = 40;     // golden-section iterations per round
    long max_evals = 4'000'000;
    double stabilize_tol = 1e-6;
};

// Smallest integer strictly above the max chart-i height over the existing
// tubes' intersection with p^{-1}(closure U_i); 1 when nothing intersects.
int pick_tube_radius(const BundleAtlas& atlas, const TubeFamily& existing, int chart,
                     const SamplerOptions& opt = {});

// K rounds of round-robin tube creation over the charts in order.
TubeFamily build_tube_family(const BundleAtlas& atlas, int rounds,
                             const SamplerOptions& opt = {});

struct TubeSeparationReport {
    double min_distance = std::numeric_limits<double>::infinity();
    int pairs = 0;
    int samples_per_tube = 0;
};

// Lower bound on pairwise closure distances: full (b, f) distance between
// sample clouds presented in a common chart; base-box distance when two
// charts do not overlap.
TubeSeparationReport tube_separation(const BundleAtlas& atlas, const TubeFamily& fam,
                                     int base_samples_per_dim = 32);

// Height below which every chart still has a barrier above: min over charts
// of its largest built radius (0 when some chart has no tube).
double covered_height(const BundleAtlas& atlas, const TubeFamily& fam);

} // namespace ehlab
