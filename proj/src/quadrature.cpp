#include "ehlab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

#include "ehlab/errors.hpp"

namespace ehlab {

namespace {

// Kronrod 15 nodes/weights on [-1, 1]; the odd-indexed nodes are the
// embedded Gauss-7 nodes.
constexpr double xk[15] = {
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0,                0.207784955007898,
    0.405845151377397,  0.586087235467691,  0.741531185599394,
    0.864864423359769,  0.949107912342759,  0.991455371120813};
constexpr double wk[15] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728, 0.204432940075298,
    0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529};
constexpr double wg[7] = {0.129484966168870, 0.279705391489277, 0.381830050505119,
                          0.417959183673469, 0.381830050505119, 0.279705391489277,
                          0.129484966168870};

struct Piece {
    double a, b, value, err;
    bool operator<(const Piece& o) const { return err < o.err; }
};

Piece eval_piece(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double k15 = 0.0, g7 = 0.0;
    for (int i = 0; i < 15; ++i) {
        double v = f(c + h * xk[i]);
        if (!std::isfinite(v))
            throw NonConvergent("integrand is not finite at t = " +
                                std::to_string(c + h * xk[i]));
        k15 += wk[i] * v;
        if (i % 2 == 1) g7 += wg[i / 2] * v;
    }
    k15 *= h;
    g7 *= h;
    return {a, b, k15, std::abs(k15 - g7)};
}

} // namespace

QuadResult gauss_kronrod_15(const std::function<double(double)>& f, double a,
                            double b) {
    Piece p = eval_piece(f, a, b);
    return {p.value, p.err, 15, 1};
}

QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     const std::vector<double>& breakpoints, const QuadOptions& opt) {
    if (!(b > a)) return {0.0, 0.0, 0, 0};

    double lo = a, hi = b;
    QuadResult res;

    // open endpoints: integrate the core [lo', hi'] and approach the
    // endpoint by halving the inset until the tail contribution settles
    double left_tail = 0.0, right_tail = 0.0;
    if (opt.open_left || opt.open_right) {
        double inset = opt.endpoint_shrink * (b - a);
        if (opt.open_left) lo = a + inset;
        if (opt.open_right) hi = b - inset;

        auto shrink = [&](bool left) {
            double total = 0.0;
            double outer = left ? lo : hi;
            double step = inset;
            for (int i = 0; i < opt.max_tail_halvings; ++i) {
                step *= 0.5;
                double na = left ? outer - step : outer;
                double nb = left ? outer : outer + step;
                Piece p = eval_piece(f, na, nb);
                total += p.value;
                res.evaluations += 15;
                ++res.intervals;
                outer = left ? na : nb;
                if (std::abs(p.value) < opt.tail_tol && i > 2) break;
            }
            return total;
        };
        if (opt.open_left) left_tail = shrink(true);
        if (opt.open_right) right_tail = shrink(false);
    }

    // seed intervals from the sorted breakpoints that fall inside (lo, hi)
    std::vector<double> cuts;
    cuts.push_back(lo);
    for (double t : breakpoints)
        if (t > lo && t < hi) cuts.push_back(t);
    cuts.push_back(hi);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    std::priority_queue<Piece> heap;
    double value = 0.0, err = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        Piece p = eval_piece(f, cuts[i], cuts[i + 1]);
        res.evaluations += 15;
        value += p.value;
        err += p.err;
        heap.push(p);
    }

    while (err > opt.tol && !heap.empty()) {
        if (static_cast<int>(heap.size()) >= opt.max_intervals)
            throw NonConvergent("quadrature interval budget exhausted; error estimate " +
                                std::to_string(err));
        Piece worst = heap.top();
        heap.pop();
        double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b)
            throw NonConvergent("quadrature interval collapsed to machine width at t = " +
                                std::to_string(mid));
        Piece l = eval_piece(f, worst.a, mid);
        Piece r = eval_piece(f, mid, worst.b);
        res.evaluations += 30;
        value += l.value + r.value - worst.value;
        err += l.err + r.err - worst.err;
        heap.push(l);
        heap.push(r);
    }

    res.value = value + left_tail + right_tail;
    res.error_estimate = err;
    res.intervals += static_cast<int>(heap.size());
    return res;
}

RefinementReport refine_integral(const std::function<double(double)>& f, double a,
                                 double b, const std::vector<double>& breakpoints,
                                 const std::vector<double>& tols,
                                 double cauchy_factor, const QuadOptions& base) {
    if (tols.empty()) throw ValidationError("refinement needs at least one tolerance");
    RefinementReport rep;
    for (double tol : tols) {
        QuadOptions o = base;
        o.tol = tol;
        QuadResult r = integrate(f, a, b, breakpoints, o);
        rep.stages.push_back({tol, r.value, r.error_estimate, r.evaluations});
    }
    rep.final_value = rep.stages.back().value;
    if (rep.stages.size() >= 2) {
        rep.last_delta = std::abs(rep.stages.back().value -
                                  rep.stages[rep.stages.size() - 2].value);
        // the gap between the last two stages is dominated by the coarser
        // stage's error, so the penultimate tolerance sets the scale
        rep.converged =
            rep.last_delta <= cauchy_factor * tols[tols.size() - 2];
    } else {
        rep.converged = true;
    }
    return rep;
}

QuadResult curve_length(const std::function<Vec(double)>& pos,
                        const std::function<Vec(double)>& vel,
                        const std::function<Mat(const Vec&)>& metric, double t0,
                        double t1, const std::vector<double>& breakpoints,
                        const QuadOptions& opt) {
    auto speed = [&](double t) {
        Vec x = pos(t);
        Vec v = vel(t);
        double q = v.dot(metric(x) * v);
        return std::sqrt(std::max(0.0, q));
    };
    return integrate(speed, t0, t1, breakpoints, opt);
}

} // namespace ehlab
