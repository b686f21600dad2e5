#include "ehlab/geodesic.hpp"

#include <algorithm>
#include <cmath>

#include "ehlab/errors.hpp"

namespace ehlab {

const char* geo_status_name(GeoStatus s) {
    switch (s) {
        case GeoStatus::Completed: return "Completed";
        case GeoStatus::LeftDomain: return "LeftDomain";
        case GeoStatus::StepUnderflow: return "StepUnderflow";
    }
    return "?";
}

Vec geodesic_accel(const Metric& m, int chart, const Vec& x, const Vec& v) {
    const int d = m.dim;
    Mat G = m.g(chart, x);
    std::vector<Mat> dG = m.deriv(chart, x);
    Mat A = Mat::Zero(d, d);
    for (int i = 0; i < d; ++i) A += v[i] * dG[i];
    Vec term = A * v;
    for (int l = 0; l < d; ++l) term[l] -= 0.5 * v.dot(dG[l] * v);
    Eigen::LLT<Mat> llt(G);
    if (llt.info() != Eigen::Success)
        throw DegenerateMetric("metric is not positive definite along the geodesic");
    return -llt.solve(term);
}

namespace {

int deepest_chart_of(const BundleAtlas& atlas, const Vec& b) {
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

GeodesicTrace geodesic(const Metric& m, int chart, const Vec& x0, const Vec& v0,
                       double horizon, const GeodesicOptions& opt) {
    const int d = m.dim;
    GeodesicTrace trace;

    Vec v = v0;
    double sp0 = std::sqrt(v.dot(m.g(chart, x0) * v));
    if (opt.normalize) {
        if (!(sp0 > 0.0))
            throw ValidationError("geodesic start velocity must be nonzero");
        v /= sp0;
        sp0 = 1.0;
    }
    trace.samples.push_back({0.0, chart, x0, v, sp0, 0.0});

    const double h_min = opt.ode.h_min_frac * horizon;
    std::vector<double> stops;
    stops.push_back(0.0);
    for (double t : opt.record_times)
        if (t > 1e-15 && t < horizon - 1e-15) stops.push_back(t);
    stops.push_back(horizon);
    std::sort(stops.begin(), stops.end());

    int cur = chart;
    Rk45State st;
    st.t = 0.0;
    st.y.resize(2 * d);
    st.y.head(d) = x0;
    st.y.tail(d) = v;

    auto rhs_for = [&](int c) {
        return [&m, c, d](double, const Vec& y) -> Vec {
            Vec out(2 * d);
            Vec x = y.head(d), vv = y.tail(d);
            out.head(d) = vv;
            out.tail(d) = geodesic_accel(m, c, x, vv);
            return out;
        };
    };

    double prev_speed = sp0;
    for (size_t seg = 0; seg + 1 < stops.size(); ++seg) {
        double t_end = stops[seg + 1];
        st.h = std::min(opt.ode.h_max, (t_end - st.t) / 16.0);
        while (st.t < t_end - 1e-15 * horizon) {
            auto rhs = rhs_for(cur);
            double accepted_h = 0.0;
            StepOutcome out = rk45_adaptive_step(rhs, st, t_end, h_min, opt.ode,
                                                 accepted_h);
            if (out == StepOutcome::Underflow) {
                trace.status = GeoStatus::StepUnderflow;
                trace.t_star = st.t;
                trace.steps = st.steps;
                trace.rejects = st.rejects;
                return trace;
            }
            Vec x = st.y.head(d), vv = st.y.tail(d);
            double sp = std::sqrt(vv.dot(m.g(cur, x) * vv));
            trace.arc_length += 0.5 * (prev_speed + sp) * accepted_h;
            prev_speed = sp;
            trace.samples.push_back({st.t, cur, x, vv, sp, trace.arc_length});

            if (m.atlas) {
                Vec b = x.head(m.base_dim);
                if (m.atlas->chart(cur).margin_u(b) < 0.5 * opt.switch_shrink) {
                    int best = deepest_chart_of(*m.atlas, b);
                    if (best < 0) {
                        trace.status = GeoStatus::LeftDomain;
                        trace.t_star = st.t;
                        trace.steps = st.steps;
                        trace.rejects = st.rejects;
                        return trace;
                    }
                    if (best != cur) {
                        const int mf = d - m.base_dim;
                        Vec f = x.tail(mf);
                        const TransitionMap& t = m.atlas->transition(cur, best);
                        Vec f2 = t.map(b, f);
                        Mat A = transition_db(t, b, f);
                        Mat D = transition_df(t, b, f);
                        Vec vb = vv.head(m.base_dim), vf = vv.tail(mf);
                        st.y.segment(m.base_dim, mf) = f2;
                        st.y.tail(mf) = A * vb + D * vf;
                        trace.switches.push_back({st.t, cur, best});
                        cur = best;
                        Vec x2 = st.y.head(d), v2 = st.y.tail(d);
                        double sp2 = std::sqrt(v2.dot(m.g(cur, x2) * v2));
                        prev_speed = sp2;
                        trace.samples.push_back(
                            {st.t, cur, x2, v2, sp2, trace.arc_length});
                    }
                }
            } else if (!m.contains(cur, x)) {
                trace.status = GeoStatus::LeftDomain;
                trace.t_star = st.t;
                trace.steps = st.steps;
                trace.rejects = st.rejects;
                return trace;
            }
        }
        st.t = t_end;
    }
    trace.status = GeoStatus::Completed;
    trace.t_star = horizon;
    trace.steps = st.steps;
    trace.rejects = st.rejects;
    return trace;
}

namespace {

// sample exactly at time t; the traces force-stop on the shared grid so a
// matching sample exists
template <class SampleT>
const SampleT* sample_at(const std::vector<SampleT>& samples, double t, double tol) {
    auto it = std::lower_bound(samples.begin(), samples.end(), t - tol,
                               [](const SampleT& s, double v) { return s.t < v; });
    if (it == samples.end()) return nullptr;
    if (std::abs(it->t - t) > tol) return nullptr;
    return &*it;
}

} // namespace

GeodesicLiftReport lift_geodesic(const FiberedMetric& fm, const BaseCurve& base_geo,
                                 const BundlePoint& start, int grid,
                                 const GeodesicOptions& opt) {
    const BundleAtlas& atlas = *fm.atlas;
    const int n = atlas.base.dim, mf = atlas.fiber.dim;
    const double span = base_geo.t1 - base_geo.t0;

    std::vector<double> times(grid + 1);
    for (int k = 0; k <= grid; ++k) times[k] = base_geo.t0 + span * k / grid;

    BaseCurve curve = base_geo;
    for (int k = 1; k < grid; ++k) curve.knots.push_back(times[k]);

    LiftOptions lopt;
    lopt.ode = opt.ode;
    GeodesicLiftReport rep;
    rep.lift = horizontal_lift(fm.conn, curve, start, lopt);

    // initial conditions of the shot geodesic: horizontal velocity
    const LiftSample& s0 = rep.lift.samples.front();
    Vec vb = base_geo.vel(base_geo.t0);
    Mat G0 = coeff_in_chart(fm.conn, s0.chart, s0.b, s0.f);
    Vec x0(n + mf), v0(n + mf);
    x0.head(n) = s0.b;
    x0.tail(mf) = s0.f;
    v0.head(n) = vb;
    v0.tail(mf) = G0 * vb;

    Metric total = total_metric(fm);
    GeodesicOptions gopt = opt;
    gopt.normalize = false;
    gopt.record_times.clear();
    for (int k = 1; k < grid; ++k) gopt.record_times.push_back(times[k] - base_geo.t0);
    rep.shot = geodesic(total, s0.chart, x0, v0, span, gopt);

    double tol = 1e-9 * std::max(1.0, span);
    for (int k = 0; k <= grid; ++k) {
        double t = times[k];
        const LiftSample* ls = sample_at(rep.lift.samples, t, tol);
        const GeodesicSample* gs =
            sample_at(rep.shot.samples, t - base_geo.t0, tol);
        if (!ls || !gs) break; // one of the traces ended early
        rep.projection_residual =
            std::max(rep.projection_residual,
                     (ls->b - base_geo.pos(t)).lpNorm<Eigen::Infinity>());
        Vec gb = gs->x.head(n), gf = gs->x.tail(mf);
        BundlePoint gp{gs->chart, gb, gf};
        if (gs->chart != ls->chart) gp = change_chart(atlas, gp, ls->chart);
        double dev = std::max((gp.b - ls->b).lpNorm<Eigen::Infinity>(),
                              (gp.f - ls->f).lpNorm<Eigen::Infinity>());
        rep.sup_deviation = std::max(rep.sup_deviation, dev);
    }
    for (const auto& s : rep.shot.samples)
        rep.max_speed_drift = std::max(
            rep.max_speed_drift, std::abs(s.speed - rep.shot.samples.front().speed));
    return rep;
}

ExpTrivReport exp_trivialization(const Metric& total, const Vec& b0, double radius,
                                 int u_grid, const std::vector<Vec>& fiber_points,
                                 const std::function<Vec(double)>& base_exp,
                                 double g_base, const GeodesicOptions& opt) {
    if (total.base_dim != 1)
        throw ValidationError("exponential trivialization supports 1D bases only");
    if (u_grid < 3) throw ValidationError("u grid needs at least 3 points");
    const BundleAtlas& atlas = *total.atlas;
    int c0 = deepest_chart_of(atlas, b0);
    if (c0 < 0) throw NoChartContains("trivialization base point outside the atlas");
    const int mf = total.dim - 1;

    ExpTrivReport rep;
    rep.b0 = b0;
    rep.u_count = u_grid;
    GeodesicOptions gopt = opt;
    gopt.normalize = false;

    auto shoot = [&](double u, const Vec& f0) {
        Vec x0(total.dim), v0(total.dim);
        x0[0] = b0[0];
        x0.tail(mf) = f0;
        if (u == 0.0) return std::pair<int, Vec>(c0, x0);
        Mat gamma = induced_connection_coeff(total, c0, x0);
        v0[0] = u;
        v0.tail(mf) = gamma * Vec::Constant(1, u);
        GeodesicTrace tr = geodesic(total, c0, x0, v0, 1.0, gopt);
        if (tr.status != GeoStatus::Completed)
            throw EmbeddingFailure(std::string("exponential geodesic ended with ") +
                                   geo_status_name(tr.status));
        return std::pair<int, Vec>(tr.last().chart, tr.last().x);
    };

    // table, fiber-major; endpoints presented in a common chart for the
    // finite-difference Jacobian
    std::vector<std::vector<Vec>> table(fiber_points.size(),
                                        std::vector<Vec>(u_grid));
    int common = -1;
    for (size_t j = 0; j < fiber_points.size(); ++j) {
        for (int i = 0; i < u_grid; ++i) {
            double u = -radius + 2.0 * radius * i / (u_grid - 1);
            auto [chart, x] = shoot(u, fiber_points[j]);
            rep.max_commute_residual =
                std::max(rep.max_commute_residual,
                         std::abs(x[0] - base_exp(u)[0]));
            if (common < 0) common = chart;
            if (chart != common) {
                BundlePoint p{chart, x.head(1), x.tail(mf)};
                p = change_chart(atlas, p, common);
                Vec xc(total.dim);
                xc[0] = p.b[0];
                xc.tail(mf) = p.f;
                x = xc;
            }
            table[j][i] = x;
            rep.rows.push_back({u, fiber_points[j], common, x});
        }
    }

    // finite-difference Jacobian determinant on interior nodes (m = 1)
    rep.min_jacobian_det = std::numeric_limits<double>::infinity();
    if (mf == 1 && fiber_points.size() >= 3) {
        double du = 2.0 * radius / (u_grid - 1);
        for (size_t j = 1; j + 1 < fiber_points.size(); ++j) {
            double df = fiber_points[j + 1][0] - fiber_points[j - 1][0];
            for (int i = 1; i + 1 < u_grid; ++i) {
                Vec d_u = (table[j][i + 1] - table[j][i - 1]) / (2.0 * du);
                Vec d_f = (table[j + 1][i] - table[j - 1][i]) / df;
                double det = d_u[0] * d_f[1] - d_u[1] * d_f[0];
                rep.min_jacobian_det = std::min(rep.min_jacobian_det, det);
            }
        }
        if (rep.min_jacobian_det <= 0.0)
            throw EmbeddingFailure("trivialization Jacobian degenerates in the ball");
    }

    // slice isometry: the u-derivative of each f-slice has g-norm g_base
    double du = 2.0 * radius / (u_grid - 1);
    for (size_t j = 0; j < table.size(); ++j) {
        for (int i = 1; i + 1 < u_grid; ++i) {
            Vec d_u = (table[j][i + 1] - table[j][i - 1]) / (2.0 * du);
            double norm2 = d_u.dot(total.g(common, table[j][i]) * d_u);
            rep.max_slice_residual =
                std::max(rep.max_slice_residual, std::abs(norm2 - g_base));
        }
    }
    return rep;
}

} // namespace ehlab
