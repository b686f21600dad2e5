#pragma once

#include <functional>
#include <limits>

#include "ehlab/linalg.hpp"

namespace ehlab {

// Dormand-Prince 5(4) embedded pair.
struct Rk45Options {
    double rtol = 1e-9;
    double atol = 1e-12;
    double h_min_frac = 1e-12;       // h_min = h_min_frac * (t1 - t0)
    double h_max = std::numeric_limits<double>::infinity();
    long max_steps = 20'000'000;
};

enum class StepOutcome { Ok, Underflow };

struct Rk45State {
    double t;
    Vec y;
    double h;          // current step size proposal
    long steps = 0;    // accepted steps
    long rejects = 0;
};

// One adaptive step: advances state.t / state.y by an accepted step of size
// <= state.h (clipped to t_end) and proposes the next h. Returns Underflow
// if the controller pushes the step below h_min before acceptance; a
// terminal clip shorter than h_min is stepped through, not an underflow.
// accepted_h receives the size of the accepted step.
StepOutcome rk45_adaptive_step(const std::function<Vec(double, const Vec&)>& rhs,
                               Rk45State& state, double t_end, double h_min,
                               const Rk45Options& opt, double& accepted_h);

// Single fixed step of the 5th-order solution (no error control); used by
// the trace residual re-integration check.
Vec rk45_fixed_step(const std::function<Vec(double, const Vec&)>& rhs, double t,
                    const Vec& y, double h);

// error weight norm used by the controller: sqrt(mean((e/sc)^2))
double rk45_error_norm(const Vec& err, const Vec& y0, const Vec& y1, double rtol,
                       double atol);

} // namespace ehlab
