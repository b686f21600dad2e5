#pragma once

#include <algorithm>
#include <cmath>

namespace ehlab {

// quintic smoothstep: C^2, flat to second order at both ends
inline double smoothstep5(double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

inline double smoothstep5_d(double s) {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    double u = s * (1.0 - s);
    return 30.0 * u * u;
}

inline double smoothstep5_dd(double s) {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    return 60.0 * s * (1.0 - s) * (1.0 - 2.0 * s);
}

// Ramp that is 0 for x <= lo and 1 for x >= hi.
inline double ramp_up(double x, double lo, double hi) {
    return smoothstep5((x - lo) / (hi - lo));
}

inline double ramp_up_d(double x, double lo, double hi) {
    return smoothstep5_d((x - lo) / (hi - lo)) / (hi - lo);
}

// 1D plateau bump: 1 on [u_lo, u_hi], falls smoothly to 0 at v_lo / v_hi.
inline double plateau_bump(double x, double v_lo, double u_lo, double u_hi, double v_hi) {
    if (x <= v_lo || x >= v_hi) return 0.0;
    if (x < u_lo) return ramp_up(x, v_lo, u_lo);
    if (x > u_hi) return ramp_up(-x, -v_hi, -u_hi);
    return 1.0;
}

inline double plateau_bump_d(double x, double v_lo, double u_lo, double u_hi, double v_hi) {
    if (x <= v_lo || x >= v_hi) return 0.0;
    if (x < u_lo) return ramp_up_d(x, v_lo, u_lo);
    if (x > u_hi) return -ramp_up_d(-x, -v_hi, -u_hi);
    return 0.0;
}

// Collar cutoff around a band [n_lo, n_hi] of height values: 1 when the
// height is inside the band or within eps/2 of it, 0 beyond eps.
// A thin level {h = n} is the degenerate band n_lo = n_hi = n.
inline double collar_cutoff(double h, double n_lo, double n_hi, double eps) {
    double d = 0.0;
    if (h < n_lo) d = n_lo - h;
    else if (h > n_hi) d = h - n_hi;
    if (d <= 0.5 * eps) return 1.0;
    if (d >= eps) return 0.0;
    return smoothstep5((eps - d) / (0.5 * eps));
}

// derivative with respect to h
inline double collar_cutoff_d(double h, double n_lo, double n_hi, double eps) {
    double d, sign;
    if (h < n_lo) { d = n_lo - h; sign = -1.0; }
    else if (h > n_hi) { d = h - n_hi; sign = 1.0; }
    else return 0.0;
    if (d <= 0.5 * eps || d >= eps) return 0.0;
    return smoothstep5_d((eps - d) / (0.5 * eps)) * (-sign / (0.5 * eps));
}

} // namespace ehlab
