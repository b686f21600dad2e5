#include "ehlab/rk45.hpp"

#include <algorithm>
#include <cmath>

namespace ehlab {

namespace {

// Dormand-Prince tableau
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// y5 - y4 coefficients
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

struct StagePair {
    Vec y5;
    Vec err;
};

StagePair dp_stages(const std::function<Vec(double, const Vec&)>& rhs, double t,
                    const Vec& y, double h) {
    Vec k1 = rhs(t, y);
    Vec k2 = rhs(t + c2 * h, y + h * (a21 * k1));
    Vec k3 = rhs(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
    Vec k4 = rhs(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    Vec k5 = rhs(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    Vec k6 = rhs(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    Vec y5 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    Vec k7 = rhs(t + h, y5);
    Vec err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    return {std::move(y5), std::move(err)};
}

} // namespace

double rk45_error_norm(const Vec& err, const Vec& y0, const Vec& y1, double rtol,
                       double atol) {
    double acc = 0.0;
    for (int i = 0; i < err.size(); ++i) {
        double sc = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        double q = err[i] / sc;
        acc += q * q;
    }
    return std::sqrt(acc / err.size());
}

StepOutcome rk45_adaptive_step(const std::function<Vec(double, const Vec&)>& rhs,
                               Rk45State& state, double t_end, double h_min,
                               const Rk45Options& opt, double& accepted_h) {
    while (true) {
        double span = t_end - state.t;
        double h = std::min({state.h, opt.h_max, span});
        // underflow means the controller collapsed the step, not that the
        // remaining clip to t_end is a sliver; slivers are integrable in one
        // micro-step whose local error is far below any tolerance
        if (h < h_min && h < span) return StepOutcome::Underflow;
        StagePair s = dp_stages(rhs, state.t, state.y, h);
        double err = rk45_error_norm(s.err, state.y, s.y5, opt.rtol, opt.atol);
        double factor = (err > 0.0 && std::isfinite(err))
                            ? std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0)
                            : (std::isfinite(err) ? 5.0 : 0.2);
        if (err <= 1.0 && s.y5.allFinite()) {
            state.t += h;
            state.y = std::move(s.y5);
            state.h = std::min(h * factor, opt.h_max);
            ++state.steps;
            accepted_h = h;
            return StepOutcome::Ok;
        }
        ++state.rejects;
        state.h = h * factor;
        if (state.h < h_min) return StepOutcome::Underflow;
    }
}

Vec rk45_fixed_step(const std::function<Vec(double, const Vec&)>& rhs, double t,
                    const Vec& y, double h) {
    return dp_stages(rhs, t, y, h).y5;
}

} // namespace ehlab
