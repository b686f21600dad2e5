#include "ehlab/lift.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <thread>

#include "ehlab/errors.hpp"
#include "ehlab/rng.hpp"

namespace ehlab {

const char* lift_status_name(LiftStatus s) {
    switch (s) {
        case LiftStatus::Completed: return "Completed";
        case LiftStatus::BlowUp: return "BlowUp";
        case LiftStatus::LeftAtlas: return "LeftAtlas";
        case LiftStatus::StepUnderflow: return "StepUnderflow";
    }
    return "?";
}

namespace {

// max normalized U-margin over all charts; -1 when none contains b
int deepest_chart(const BundleAtlas& atlas, const Vec& b) {
    int best = -1;
    double best_margin = 0.0;
    for (const auto& c : atlas.charts) {
        double m = c.margin_u(b);
        if (m >= 0.0 && (best < 0 || m > best_margin)) {
            best = c.id;
            best_margin = m;
        }
    }
    return best;
}

} // namespace

LiftTrace horizontal_lift(const Connection& conn, const BaseCurve& curve,
                          const BundlePoint& start, const LiftOptions& opt) {
    const BundleAtlas& atlas = *conn.atlas;
    Vec b0 = curve.pos(curve.t0);
    if ((start.b - b0).lpNorm<Eigen::Infinity>() > opt.start_tol)
        throw StartMismatch("start point does not lie over the curve's initial point");

    int cur = start.chart;
    Vec f = start.f;
    if (atlas.chart(cur).margin_u(b0) < 0.0) {
        int best = deepest_chart(atlas, b0);
        if (best < 0)
            throw NoChartContains("no chart contains the curve's initial point");
        if (best != cur) {
            f = atlas.transition(cur, best).map(b0, f);
            cur = best;
        }
    }

    LiftTrace trace;
    trace.samples.push_back({curve.t0, cur, b0, f, atlas.fiber.height(f)});

    const double span = curve.t1 - curve.t0;
    const double h_min = opt.ode.h_min_frac * span;

    // segment boundaries: integration restarts at curve knots
    std::vector<double> stops;
    stops.push_back(curve.t0);
    for (double k : curve.knots)
        if (k > curve.t0 + 1e-15 && k < curve.t1 - 1e-15) stops.push_back(k);
    stops.push_back(curve.t1);
    std::sort(stops.begin(), stops.end());

    auto rhs_for = [&](int chart) {
        return [&conn, &curve, chart](double t, const Vec& y) -> Vec {
            return coeff_in_chart(conn, chart, curve.pos(t), y) * curve.vel(t);
        };
    };

    Rk45State st;
    st.t = curve.t0;
    st.y = f;
    for (size_t seg = 0; seg + 1 < stops.size(); ++seg) {
        double t_end = stops[seg + 1];
        st.h = std::min(opt.ode.h_max, (t_end - st.t) / 16.0);
        while (st.t < t_end - 1e-15 * span) {
            auto rhs = rhs_for(cur);
            double accepted_h = 0.0;
            StepOutcome out = rk45_adaptive_step(rhs, st, t_end, h_min, opt.ode, accepted_h);
            if (out == StepOutcome::Underflow) {
                trace.status = st.y.lpNorm<Eigen::Infinity>() > opt.escape_radius
                                   ? LiftStatus::BlowUp
                                   : LiftStatus::StepUnderflow;
                trace.t_star = st.t;
                trace.steps = st.steps;
                trace.rejects = st.rejects;
                return trace;
            }
            Vec b = curve.pos(st.t);
            trace.samples.push_back({st.t, cur, b, st.y, atlas.fiber.height(st.y)});
            if (st.y.lpNorm<Eigen::Infinity>() > opt.escape_radius &&
                accepted_h < 10.0 * h_min) {
                trace.status = LiftStatus::BlowUp;
                trace.t_star = st.t;
                trace.steps = st.steps;
                trace.rejects = st.rejects;
                return trace;
            }
            if (atlas.chart(cur).margin_u(b) < 0.5 * opt.switch_shrink) {
                int best = deepest_chart(atlas, b);
                if (best < 0) {
                    trace.status = LiftStatus::LeftAtlas;
                    trace.t_star = st.t;
                    trace.steps = st.steps;
                    trace.rejects = st.rejects;
                    return trace;
                }
                if (best != cur) {
                    st.y = atlas.transition(cur, best).map(b, st.y);
                    trace.switches.push_back({st.t, cur, best});
                    cur = best;
                    trace.samples.push_back(
                        {st.t, cur, b, st.y, atlas.fiber.height(st.y)});
                }
            }
        }
        st.t = t_end;
    }
    trace.status = LiftStatus::Completed;
    trace.t_star = curve.t1;
    trace.steps = st.steps;
    trace.rejects = st.rejects;
    return trace;
}

ResidualReport lift_residual_report(const Connection& conn, const BaseCurve& curve,
                                    const LiftTrace& trace, const Rk45Options& opt) {
    ResidualReport rep;
    for (size_t k = 0; k + 1 < trace.samples.size(); ++k) {
        const LiftSample& a = trace.samples[k];
        const LiftSample& b = trace.samples[k + 1];
        if (a.chart != b.chart || b.t <= a.t) continue;
        auto rhs = [&](double t, const Vec& y) -> Vec {
            return coeff_in_chart(conn, a.chart, curve.pos(t), y) * curve.vel(t);
        };
        double h = 0.5 * (b.t - a.t);
        Vec mid = rk45_fixed_step(rhs, a.t, a.f, h);
        Vec end = rk45_fixed_step(rhs, a.t + h, mid, h);
        double diff = (end - b.f).lpNorm<Eigen::Infinity>();
        double scale =
            10.0 * (opt.atol + opt.rtol * std::max(b.f.lpNorm<Eigen::Infinity>(),
                                                   a.f.lpNorm<Eigen::Infinity>()));
        rep.max_scaled = std::max(rep.max_scaled, diff / scale);
        rep.checked += 1;
    }
    return rep;
}

std::vector<TransportResult> parallel_transport(const Connection& conn,
                                                const BaseCurve& curve,
                                                const std::vector<BundlePoint>& starts,
                                                const LiftOptions& opt) {
    std::vector<TransportResult> out;
    out.reserve(starts.size());
    for (const auto& s : starts) {
        LiftTrace tr = horizontal_lift(conn, curve, s, opt);
        const LiftSample& e = tr.last();
        out.push_back({BundlePoint{e.chart, e.b, e.f}, tr.status, tr.t_star});
    }
    return out;
}

Trivialization trivialize_via_transport(const Connection& conn, const Vec& b0,
                                        double radius,
                                        const std::vector<Vec>& base_grid,
                                        const std::vector<Vec>& fiber_grid,
                                        const LiftOptions& opt) {
    const BundleAtlas& atlas = *conn.atlas;
    int c0 = deepest_chart(atlas, b0);
    if (c0 < 0) throw NoChartContains("trivialization center outside the atlas");

    Trivialization triv;
    triv.center = b0;
    for (const Vec& b : base_grid) {
        if ((b - b0).norm() > radius + 1e-12)
            throw OutOfDomain("grid point outside the requested radius");
        std::vector<BundlePoint> images;
        for (const Vec& f0 : fiber_grid) {
            BundlePoint start{c0, b0, f0};
            LiftTrace tr;
            if ((b - b0).norm() == 0.0) {
                tr.samples.push_back({0.0, c0, b0, f0, atlas.fiber.height(f0)});
                tr.status = LiftStatus::Completed;
            } else {
                tr = horizontal_lift(conn, segment_curve(b0, b), start, opt);
            }
            if (tr.status != LiftStatus::Completed)
                throw IncompleteLift(std::string("radial transport ended with ") +
                                     lift_status_name(tr.status) + " at t=" +
                                     std::to_string(tr.t_star));
            const LiftSample& e = tr.last();
            triv.rows.push_back({b, f0, BundlePoint{e.chart, e.b, e.f}});
            triv.max_base_residual = std::max(
                triv.max_base_residual, (e.b - b).lpNorm<Eigen::Infinity>());
            images.push_back({e.chart, e.b, e.f});
        }
        // injectivity: pairwise distance of images over distinct f0 at fixed b,
        // compared in a common chart
        for (size_t i = 0; i < images.size(); ++i) {
            for (size_t j = i + 1; j < images.size(); ++j) {
                BundlePoint pj = images[j].chart == images[i].chart
                                     ? images[j]
                                     : change_chart(atlas, images[j], images[i].chart);
                double gap = (pj.f - images[i].f).norm();
                triv.min_injectivity_gap = std::min(triv.min_injectivity_gap, gap);
            }
        }
    }
    return triv;
}

int probe_thread_count(int requested, int trials) {
    int n = requested;
    if (n <= 0) {
        n = static_cast<int>(std::thread::hardware_concurrency());
        if (n <= 0) n = 1;
    }
    if (const char* env = std::getenv("EHRESMANN_LAB_THREADS")) {
        int cap = std::atoi(env);
        if (cap > 0) n = std::min(n, cap);
    }
    return std::max(1, std::min(n, trials));
}

ProbeReport completeness_probe(const Connection& conn, const ProbeOptions& opt) {
    if (opt.trials < 1) throw ValidationError("completeness probe needs trials >= 1");
    const BundleAtlas& atlas = *conn.atlas;
    const int n = atlas.base.dim;
    const int m = atlas.fiber.dim;
    Vec flo = opt.fiber_lo.size() == m ? opt.fiber_lo : Vec::Constant(m, -1.0);
    Vec fhi = opt.fiber_hi.size() == m ? opt.fiber_hi : Vec::Constant(m, 1.0);

    std::vector<TrialOutcome> outcomes(opt.trials);
    auto run_trial = [&](int trial) {
        Rng rng = trial_rng(opt.seed, static_cast<std::uint64_t>(trial));
        Vec b0(n);
        int chart = -1;
        for (int attempts = 0; attempts < 1000 && chart < 0; ++attempts) {
            for (int d = 0; d < n; ++d)
                b0[d] = rng.uniform(atlas.base.lo[d], atlas.base.hi[d]);
            chart = deepest_chart(atlas, b0);
        }
        if (chart < 0)
            throw NoChartContains("probe could not sample a covered base point");
        Vec f0(m);
        for (int d = 0; d < m; ++d) f0[d] = rng.uniform(flo[d], fhi[d]);
        BaseCurve curve = random_waypoint_curve(atlas.base.lo, atlas.base.hi, b0,
                                                opt.horizon, opt.speed_bound,
                                                opt.segments, rng);
        LiftTrace tr = horizontal_lift(conn, curve, BundlePoint{chart, b0, f0}, opt.lift);
        outcomes[trial] = {static_cast<std::uint64_t>(trial), chart, b0, f0,
                           tr.status, tr.t_star};
    };

    int nthreads = probe_thread_count(opt.threads, opt.trials);
    if (nthreads <= 1) {
        for (int i = 0; i < opt.trials; ++i) run_trial(i);
    } else {
        std::atomic<int> next{0};
        std::exception_ptr failure;
        std::mutex failure_mx;
        std::vector<std::thread> pool;
        pool.reserve(nthreads);
        for (int w = 0; w < nthreads; ++w) {
            pool.emplace_back([&] {
                try {
                    for (int i = next.fetch_add(1); i < opt.trials;
                         i = next.fetch_add(1))
                        run_trial(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mx);
                    if (!failure) failure = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        if (failure) std::rethrow_exception(failure);
    }

    ProbeReport rep;
    rep.seed = opt.seed;
    rep.trials = opt.trials;
    for (const auto& o : outcomes) {
        switch (o.status) {
            case LiftStatus::Completed: rep.completed++; break;
            case LiftStatus::BlowUp:
                rep.blowups++;
                if (o.t_star < rep.earliest_blowup) {
                    rep.earliest_blowup = o.t_star;
                    rep.earliest_blowup_trial = static_cast<long>(o.trial);
                }
                break;
            case LiftStatus::LeftAtlas: rep.left_atlas++; break;
            case LiftStatus::StepUnderflow: rep.underflow++; break;
        }
    }
    rep.outcomes = std::move(outcomes);
    return rep;
}

} // namespace ehlab
