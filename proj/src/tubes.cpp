#include "ehlab/tubes.hpp"

#include <algorithm>
#include <cmath>

#include "ehlab/errors.hpp"

namespace ehlab {

std::vector<int> TubeFamily::radii_of_chart(int chart) const {
    std::vector<int> out;
    for (const auto& t : tubes)
        if (t.chart == chart) out.push_back(t.radius);
    return out;
}

namespace {

// overlap of closure(U_i) with U_j in base coordinates; false when empty
bool u_overlap(const Chart& ci, const Chart& cj, Vec& lo, Vec& hi) {
    const int n = static_cast<int>(ci.u_lo.size());
    lo.resize(n);
    hi.resize(n);
    for (int d = 0; d < n; ++d) {
        lo[d] = std::max(ci.u_lo[d], cj.u_lo[d]);
        hi[d] = std::min(ci.u_hi[d], cj.u_hi[d]);
        if (lo[d] > hi[d]) return false;
    }
    return true;
}

struct HeightOverTube {
    const BundleAtlas* atlas;
    int chart_i;
    const Tube* tube;
    const Vec* level_point;
    long* evals;
    long max_evals;

    // chart-i height of the tube-j point over base b
    double operator()(const Vec& b) const {
        if (++*evals > max_evals)
            throw SamplerBudgetExceeded("tube radius sampler exceeded its budget");
        Vec f = *level_point;
        if (tube->chart != chart_i)
            f = atlas->transition(tube->chart, chart_i).map(b, f);
        return atlas->fiber.height(f);
    }
};

// one golden-section maximization sweep along axis d over [lo, hi]
double golden_axis_max(const HeightOverTube& fn, Vec& b, int d, double lo, double hi,
                       int iters) {
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, c = hi;
    double x1 = c - invphi * (c - a);
    double x2 = a + invphi * (c - a);
    b[d] = x1;
    double f1 = fn(b);
    b[d] = x2;
    double f2 = fn(b);
    for (int it = 0; it < iters; ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (c - a);
            b[d] = x2;
            f2 = fn(b);
        } else {
            c = x2;
            x2 = x1;
            f2 = f1;
            x1 = c - invphi * (c - a);
            b[d] = x1;
            f1 = fn(b);
        }
    }
    if (f1 >= f2) {
        b[d] = x1;
        return f1;
    }
    b[d] = x2;
    return f2;
}

} // namespace

int pick_tube_radius(const BundleAtlas& atlas, const TubeFamily& existing, int chart,
                     const SamplerOptions& opt) {
    const Chart& ci = atlas.chart(chart);
    const int n = atlas.base.dim;
    long evals = 0;
    double M = 0.0; // empty-intersection convention

    for (const auto& tube : existing.tubes) {
        const Chart& cj = atlas.chart(tube.chart);
        Vec lo, hi;
        if (!u_overlap(ci, cj, lo, hi)) continue;
        if (tube.chart != chart && !atlas.has_transition(tube.chart, chart)) continue;
        for (const Vec& lp : tube.level_points) {
            HeightOverTube fn{&atlas, chart, &tube, &lp, &evals, opt.max_evals};

            // dense grid
            Vec best_b = lo;
            double best = -std::numeric_limits<double>::infinity();
            std::vector<int> idx(n, 0);
            const int G = opt.grid_per_dim;
            Vec b(n);
            while (true) {
                for (int d = 0; d < n; ++d)
                    b[d] = G == 1 ? 0.5 * (lo[d] + hi[d])
                                  : lo[d] + (hi[d] - lo[d]) * idx[d] / double(G - 1);
                double v = fn(b);
                if (v > best) {
                    best = v;
                    best_b = b;
                }
                int d = 0;
                while (d < n && ++idx[d] == G) idx[d++] = 0;
                if (d == n) break;
            }

            // local refinement: golden-section sweeps inside the best cell
            double prev = best;
            for (int round = 0; round < opt.refine_rounds; ++round) {
                for (int d = 0; d < n; ++d) {
                    double cell = (hi[d] - lo[d]) / double(std::max(1, G - 1));
                    double a = std::max(lo[d], best_b[d] - cell);
                    double c = std::min(hi[d], best_b[d] + cell);
                    if (c <= a) continue;
                    double v = golden_axis_max(fn, best_b, d, a, c, opt.refine_iters);
                    best = std::max(best, v);
                }
                if (round + 1 == opt.refine_rounds &&
                    std::abs(best - prev) > opt.stabilize_tol)
                    throw SamplerBudgetExceeded(
                        "tube radius refinement did not stabilize");
                prev = best;
            }
            M = std::max(M, best);
        }
    }
    // minimum integer strictly above M; the nudge guards exact-integer maxima
    // that sampling renders as n - ulp (overestimating by one is harmless,
    // repeating a radius is not)
    return static_cast<int>(std::floor(M + 1e-9)) + 1;
}

TubeFamily build_tube_family(const BundleAtlas& atlas, int rounds,
                             const SamplerOptions& opt) {
    if (rounds < 1) throw ValidationError("tube family needs rounds >= 1");
    if (!atlas.fiber.level_set)
        throw ValidationError("fiber model lacks a level-set handle for tubes");
    TubeFamily fam;
    fam.rounds = rounds;
    for (int round = 0; round < rounds; ++round) {
        for (const auto& c : atlas.charts) {
            int n = pick_tube_radius(atlas, fam, c.id, opt);
            auto prior = fam.radii_of_chart(c.id);
            if (!prior.empty() && n <= prior.back())
                throw SeparationViolation("tube radius failed to increase over chart " +
                                          std::to_string(c.id));
            fam.tubes.push_back({c.id, n, round, atlas.fiber.level_set(double(n))});
        }
    }
    return fam;
}

namespace {

double box_distance(const Vec& alo, const Vec& ahi, const Vec& blo, const Vec& bhi) {
    double s = 0.0;
    for (int d = 0; d < alo.size(); ++d) {
        double gap = std::max({0.0, blo[d] - ahi[d], alo[d] - bhi[d]});
        s += gap * gap;
    }
    return std::sqrt(s);
}

std::vector<Vec> base_grid(const Vec& lo, const Vec& hi, int per_dim) {
    const int n = static_cast<int>(lo.size());
    std::vector<Vec> out;
    std::vector<int> idx(n, 0);
    Vec b(n);
    while (true) {
        for (int d = 0; d < n; ++d)
            b[d] = per_dim == 1
                       ? 0.5 * (lo[d] + hi[d])
                       : lo[d] + (hi[d] - lo[d]) * idx[d] / double(per_dim - 1);
        out.push_back(b);
        int d = 0;
        while (d < n && ++idx[d] == per_dim) idx[d++] = 0;
        if (d == n) break;
    }
    return out;
}

} // namespace

TubeSeparationReport tube_separation(const BundleAtlas& atlas, const TubeFamily& fam,
                                     int base_samples_per_dim) {
    TubeSeparationReport rep;
    rep.samples_per_tube = base_samples_per_dim;
    const size_t T = fam.tubes.size();
    for (size_t a = 0; a < T; ++a) {
        for (size_t b = a + 1; b < T; ++b) {
            const Tube& ta = fam.tubes[a];
            const Tube& tb = fam.tubes[b];
            const Chart& ca = atlas.chart(ta.chart);
            const Chart& cb = atlas.chart(tb.chart);
            rep.pairs += 1;
            double dist = std::numeric_limits<double>::infinity();
            if (ta.chart == tb.chart) {
                // same chart: base boxes coincide; fiber gap decides
                for (const Vec& fa : ta.level_points)
                    for (const Vec& fb : tb.level_points)
                        dist = std::min(dist, (fa - fb).norm());
            } else if (atlas.has_transition(ta.chart, tb.chart)) {
                // present tube-a samples in chart b where possible
                auto grid_a = base_grid(ca.u_lo, ca.u_hi, base_samples_per_dim);
                auto grid_b = base_grid(cb.u_lo, cb.u_hi, base_samples_per_dim);
                const TransitionMap& t_ab = atlas.transition(ta.chart, tb.chart);
                for (const Vec& pa : grid_a) {
                    bool presentable = cb.contains_v(pa);
                    for (const Vec& fa : ta.level_points) {
                        if (presentable) {
                            Vec fa_b = t_ab.map(pa, fa);
                            for (const Vec& pb : grid_b)
                                for (const Vec& fb : tb.level_points) {
                                    double d2 = (pa - pb).squaredNorm() +
                                                (fa_b - fb).squaredNorm();
                                    dist = std::min(dist, std::sqrt(d2));
                                }
                        } else {
                            // valid lower bound: base distance alone
                            dist = std::min(dist,
                                            box_distance(pa, pa, cb.u_lo, cb.u_hi));
                        }
                    }
                }
            } else {
                dist = box_distance(ca.u_lo, ca.u_hi, cb.u_lo, cb.u_hi);
            }
            rep.min_distance = std::min(rep.min_distance, dist);
        }
    }
    return rep;
}

double covered_height(const BundleAtlas& atlas, const TubeFamily& fam) {
    double window = std::numeric_limits<double>::infinity();
    for (const auto& c : atlas.charts) {
        auto radii = fam.radii_of_chart(c.id);
        if (radii.empty()) return 0.0;
        window = std::min(window, double(*std::max_element(radii.begin(), radii.end())));
    }
    return window;
}

} // namespace ehlab
