#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "ehlab/connection.hpp"
#include "ehlab/partition.hpp"
#include "ehlab/tubes.hpp"

namespace ehlab {

struct ConstructOptions {
    SamplerOptions sampler;
    PartitionOptions partition;
    int agreement_samples = 1000; // per tube
    double agreement_tol = 1e-9;
};

struct ConstructRecord {
    std::shared_ptr<const TubeFamily> tubes;
    TubeSeparationReport separation;
    PartitionDiagnostics partition;
    double max_agreement_residual = 0.0; // sup |Gamma_blend - Gamma_i| on tubes
    double covered_height = 0.0;
};

struct CompleteConnection {
    Connection connection;
    std::shared_ptr<const PartitionOfUnity> partition;
    ConstructRecord record;
};

// Tube family -> subordinated partition -> convex blend of the chart-induced
// connections. Throws AgreementViolation when the blend fails to match the
// chart connection on a sampled tube point.
CompleteConnection build_complete_connection(AtlasPtr atlas, int rounds,
                                             const ConstructOptions& opt = {});

// Horizontal section family over one chart: graphs b -> (b, f(b)).
struct Section {
    std::function<Vec(const Vec& b)> fiber;
    std::function<Mat(const Vec& b)> fiber_d; // m x n
    double level = 0.0;                       // representative fiber value (m = 1)
};

struct SectionFamily {
    int chart = 0;
    Vec b_lo, b_hi; // probing box in base coordinates
    std::vector<Section> sections;
};

struct DisconnectVerdict {
    bool horizontal = false;
    double max_horizontal_residual = 0.0;
    bool disconnecting = false;
    double min_level = 0.0;
    double max_level = 0.0;
    double window_lo = 0.0, window_hi = 0.0;
};

// Horizontality: sup over the grid of |f'(b) - Gamma(b, f(b))| <= tol_h per
// section. Disconnecting (fiber dimension 1): section levels must straddle
// the probed window [window_lo, window_hi] so every complementary component
// inside the window is bounded between two sections.
DisconnectVerdict check_disconnecting(const Connection& conn, const SectionFamily& fam,
                                      double tol_h, double window_lo, double window_hi,
                                      int grid = 101);

} // namespace ehlab
