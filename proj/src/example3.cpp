#include "ehlab/example3.hpp"

#include <algorithm>
#include <cmath>

#include "ehlab/errors.hpp"
#include "ehlab/smooth.hpp"

namespace ehlab {

namespace {

struct Jet2 {
    double v, d1, d2;
};

// a(q) = exp(1 - 1/(1-q^2)) inside (-1, 1), 0 outside
Jet2 bump_a(double q) {
    if (std::abs(q) >= 1.0 - 1e-12) return {0.0, 0.0, 0.0};
    double r = 1.0 - q * q;
    double v = std::exp(1.0 - 1.0 / r);
    double d1 = v * (-2.0 * q) / (r * r);
    double d2 = v * (4.0 * q * q / (r * r * r * r) - (2.0 + 6.0 * q * q) / (r * r * r));
    return {v, d1, d2};
}

// b(u) = u^3/(1-u^2): smooth, increasing, b'(0) = 0, diverges at the ends;
// callers guard |u| < 1
Jet2 slide_b(double u) {
    double r = 1.0 - u * u;
    return {u * u * u / r, (3.0 * u * u - u * u * u * u) / (r * r),
            (6.0 * u + 2.0 * u * u * u) / (r * r * r)};
}

} // namespace

PhiJet example3_phi_term(double x, double y, int k) {
    PhiJet out;
    if (k < 0 || y <= 0.0) return out;
    double Y = std::ldexp(y, k);
    if (Y <= 3.0 || Y >= 5.0) return out;
    double u = Y - 4.0;
    if (std::abs(u) >= 1.0 - 1e-12) return out;
    Jet2 b = slide_b(u);
    double q = std::ldexp(x, k) - b.v - 4.0;
    Jet2 a = bump_a(q);
    if (a.v == 0.0 && a.d1 == 0.0) return out;
    double s = std::ldexp(1.0, k), s2 = s * s;
    out.v = a.v;
    out.x = s * a.d1;
    out.y = -s * a.d1 * b.d1;
    out.xx = s2 * a.d2;
    out.xy = -s2 * a.d2 * b.d1;
    out.yy = s2 * (a.d2 * b.d1 * b.d1 - a.d1 * b.d2);
    return out;
}

PhiJet example3_phi(double x, double y, int k_max) {
    if (y <= 0.0 || y >= 5.0) return {};
    // the strips are disjoint, so at most one candidate depth is active
    int k0 = static_cast<int>(std::floor(std::log2(4.0 / y)));
    for (int k = std::max(0, k0 - 1); k <= k0 + 1; ++k) {
        if (k > k_max) break;
        double Y = std::ldexp(y, k);
        if (Y > 3.0 && Y < 5.0) return example3_phi_term(x, y, k);
    }
    return {};
}

CJet example3_c(double t) {
    double s = -t;
    if (s >= 5.0) return {4.0, 0.0};
    if (s <= 0.0) return {0.0, 0.0};
    int k = static_cast<int>(std::floor(std::log2(5.0 / s)));
    if (k < 0) k = 0;
    while (k > 0 && s > 5.0 * std::ldexp(1.0, -k)) --k;
    while (s <= 2.5 * std::ldexp(1.0, -k)) ++k;
    double w = std::ldexp(1.0, -k); // 2^-k
    if (s >= 3.0 * w) return {4.0 * w, 0.0};
    // ramp from 4/2^k down to 4/2^(k+1) over t in (-3/2^k, -2.5/2^k)
    double s01 = (t + 3.0 * w) / (0.5 * w);
    return {4.0 * w - 2.0 * w * smoothstep5(s01), -4.0 * smoothstep5_d(s01)};
}

Example3 make_example3(int k_max) {
    if (k_max < 1) throw ValidationError("hill-chain surface needs depth >= 1");
    Example3 out;
    out.k_max = k_max;

    auto jet = [k_max](double x, double y) { return example3_phi(x, y, k_max); };

    SurfaceMetric sm;
    sm.dom_lo = vec2(-8.0, 0.0);
    sm.dom_hi = vec2(8.0, 8.0);
    sm.g11.v = [jet](double x, double y) {
        PhiJet p = jet(x, y);
        return 1.0 + p.x * p.x;
    };
    sm.g11.dx = [jet](double x, double y) {
        PhiJet p = jet(x, y);
        return 2.0 * p.x * p.xx;
    };
    sm.g11.dy = [jet](double x, double y) {
        PhiJet p = jet(x, y);
        return 2.0 * p.x * p.xy;
    };
    sm.g12.v = [jet](double x, double y) {
        PhiJet p = jet(x, y);
        return p.x * p.y;
    };
    sm.g12.dx = [jet](double x, double y) {
        PhiJet p = jet(x, y);
        return p.xx * p.y + p.x * p.xy;
    };
    sm.g12.dy = [jet](double x, double y) {
        PhiJet p = jet(x, y);
        return p.xy * p.y + p.x * p.yy;
    };
    sm.g22.v = [jet](double x, double y) {
        PhiJet p = jet(x, y);
        return 1.0 + p.y * p.y;
    };
    sm.g22.dx = [jet](double x, double y) {
        PhiJet p = jet(x, y);
        return 2.0 * p.y * p.xy;
    };
    sm.g22.dy = [jet](double x, double y) {
        PhiJet p = jet(x, y);
        return 2.0 * p.y * p.yy;
    };
    out.induced = sm;
    out.w = w_recipe(sm);

    for (int k = 0; k <= k_max; ++k) {
        double w = std::ldexp(1.0, -k);
        out.sections.push_back({k, 4.0 * w, 3.0 * w, 5.0 * w});
    }
    return out;
}

namespace {

// hill-field argument along the descent curve within ramp k; +1e9 past the
// strip edge keeps the bracket monotone for the bisection
double ramp_arg(int k, double t) {
    CJet c = example3_c(t);
    double u = std::ldexp(c.c, k) - 4.0;
    if (u <= -1.0 + 1e-12) return 1e9;
    return std::ldexp(t, k) - slide_b(u).v - 4.0;
}

double bisect_arg(int k, double level, double a, double b) {
    // ramp_arg increases from -7 at a towards +inf near b
    for (int it = 0; it < 200; ++it) {
        double m = 0.5 * (a + b);
        if (m <= a || m >= b) break;
        if (ramp_arg(k, m) < level)
            a = m;
        else
            b = m;
    }
    return 0.5 * (a + b);
}

} // namespace

std::vector<SpikeWindow> example3_spike_windows(int k_max) {
    std::vector<SpikeWindow> out;
    for (int k = 0; k <= k_max; ++k) {
        double w = std::ldexp(1.0, -k);
        double a = -3.0 * w;
        double b = -2.75 * w; // strip edge: the curve leaves the band here
        out.push_back({k, bisect_arg(k, -1.0, a, b), bisect_arg(k, 1.0, a, b)});
    }
    return out;
}

std::vector<double> example3_length_breakpoints(int k_max, int ladder_depth) {
    std::vector<double> bps;
    for (int k = 0; k <= ladder_depth; ++k) {
        double w = std::ldexp(1.0, -k);
        bps.push_back(-5.0 * w);
        bps.push_back(-3.0 * w);
    }
    bps.push_back(-2.5 * std::ldexp(1.0, -ladder_depth));
    for (const SpikeWindow& sw : example3_spike_windows(std::min(k_max, ladder_depth))) {
        bps.push_back(sw.t_lo);
        bps.push_back(sw.t_hi);
    }
    std::sort(bps.begin(), bps.end());
    return bps;
}

Example3LengthReport example3_curve_length(const SurfaceMetric& metric, int k_max,
                                           const std::vector<double>& tols) {
    auto integrand = [&metric](double t) {
        CJet c = example3_c(t);
        Mat g = metric.value(t, c.c);
        double q = g(0, 0) + 2.0 * g(0, 1) * c.d + g(1, 1) * c.d * c.d;
        return std::sqrt(std::max(0.0, q));
    };
    QuadOptions qo;
    qo.open_right = true;
    qo.endpoint_shrink = 1e-12;
    qo.tail_tol = 1e-13;

    Example3LengthReport rep;
    rep.k_max = k_max;
    rep.refinement = refine_integral(integrand, -5.0, 0.0,
                                     example3_length_breakpoints(k_max), tols, 10.0,
                                     qo);
    rep.value = rep.refinement.final_value;
    return rep;
}

} // namespace ehlab
