#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "ehlab/connection.hpp"
#include "ehlab/curves.hpp"
#include "ehlab/rk45.hpp"

namespace ehlab {

enum class LiftStatus { Completed, BlowUp, LeftAtlas, StepUnderflow };

const char* lift_status_name(LiftStatus s);

struct LiftSample {
    double t;
    int chart;
    Vec b;
    Vec f;
    double height;
};

struct ChartSwitch {
    double t;
    int from;
    int to;
};

struct LiftOptions {
    Rk45Options ode;
    double escape_radius = 1e6;
    // hysteresis: only consider switching once outside U shrunk by this
    // fraction of its width (half per side)
    double switch_shrink = 0.05;
    double start_tol = 1e-9;
};

struct LiftTrace {
    std::vector<LiftSample> samples;
    std::vector<ChartSwitch> switches;
    LiftStatus status = LiftStatus::Completed;
    double t_star = 0.0; // termination time; equals the curve end when Completed
    long steps = 0;
    long rejects = 0;

    const LiftSample& last() const { return samples.back(); }
};

// Integrates f' = Gamma_i(gamma(t), f) gamma'(t) in the running chart,
// switching charts with hysteresis. Blow-up = escape radius exceeded while
// the accepted step has collapsed below 10 h_min.
LiftTrace horizontal_lift(const Connection& conn, const BaseCurve& curve,
                          const BundlePoint& start, const LiftOptions& opt = {});

// Step-doubling residual: each accepted step of the trace is re-integrated
// as two half steps; max over steps of |difference| / (10 (atol + rtol |f|)).
struct ResidualReport {
    double max_scaled = 0.0;
    long checked = 0;
};
ResidualReport lift_residual_report(const Connection& conn, const BaseCurve& curve,
                                    const LiftTrace& trace,
                                    const Rk45Options& opt = {});

struct TransportResult {
    BundlePoint end;
    LiftStatus status;
    double t_star;
};
std::vector<TransportResult> parallel_transport(const Connection& conn,
                                                const BaseCurve& curve,
                                                const std::vector<BundlePoint>& starts,
                                                const LiftOptions& opt = {});

// Trivialization over a ball by transport along straight segments from the
// center. Throws IncompleteLift when any segment's lift does not complete.
struct TrivRow {
    Vec b;
    Vec f0;
    BundlePoint image;
};
struct Trivialization {
    Vec center;
    std::vector<TrivRow> rows;
    double max_base_residual = 0.0;  // |base(image) - b| over the table
    double min_injectivity_gap =
        std::numeric_limits<double>::infinity(); // min pairwise image distance at fixed b
};
Trivialization trivialize_via_transport(const Connection& conn, const Vec& b0,
                                        double radius,
                                        const std::vector<Vec>& base_grid,
                                        const std::vector<Vec>& fiber_grid,
                                        const LiftOptions& opt = {});

struct ProbeOptions {
    int trials = 100;
    double horizon = 10.0;
    double speed_bound = 1.0;
    int segments = 8;
    std::uint64_t seed = 0;
    Vec fiber_lo, fiber_hi; // start window in chart fiber coordinates
    LiftOptions lift;
    int threads = 0; // 0: hardware limit capped by EHRESMANN_LAB_THREADS
};

struct TrialOutcome {
    std::uint64_t trial;
    int start_chart;
    Vec b0, f0;
    LiftStatus status;
    double t_star;
};

struct ProbeReport {
    std::uint64_t seed = 0;
    int trials = 0;
    int completed = 0;
    int blowups = 0;
    int left_atlas = 0;
    int underflow = 0;
    double earliest_blowup = std::numeric_limits<double>::infinity();
    long earliest_blowup_trial = -1;
    std::vector<TrialOutcome> outcomes; // in trial order
};

// Lifts of randomized bounded-speed waypoint curves from randomized starts.
// Deterministic per (seed, trial); thread count does not affect results.
ProbeReport completeness_probe(const Connection& conn, const ProbeOptions& opt);

int probe_thread_count(int requested, int trials);

} // namespace ehlab
