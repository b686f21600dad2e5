#include "ehlab/connection.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "ehlab/errors.hpp"
#include "ehlab/rng.hpp"

namespace ehlab {

bool Connection::native_on(int chart) const {
    if (native_charts.empty()) return true;
    return std::find(native_charts.begin(), native_charts.end(), chart) !=
           native_charts.end();
}

int Connection::first_native() const {
    if (native_charts.empty()) return atlas->charts.front().id;
    return native_charts.front();
}

Connection chart_induced_connection(AtlasPtr atlas, int chart) {
    Connection c;
    c.atlas = atlas;
    c.native_charts = {chart};
    const int n = atlas->base.dim, m = atlas->fiber.dim;
    c.coeff = [n, m](int, const Vec&, const Vec&) { return Mat::Zero(m, n); };
    c.coeff_deriv = [n, m](int, const Vec&, const Vec&) {
        CoeffDeriv d;
        d.db.assign(n, Mat::Zero(m, n));
        d.df.assign(m, Mat::Zero(m, n));
        return d;
    };
    return c;
}

Mat push_forward_coeff(const BundleAtlas& atlas, int from, int to, const Vec& b,
                       const Vec& f_from, const Mat& gamma_from) {
    if (from == to) return gamma_from;
    const Chart& cf = atlas.chart(from);
    const Chart& ct = atlas.chart(to);
    if (!cf.contains_v(b) || !ct.contains_v(b))
        throw OutOfOverlap("pushforward outside the chart overlap");
    const TransitionMap& t = atlas.transition(from, to);
    return transition_db(t, b, f_from) + transition_df(t, b, f_from) * gamma_from;
}

Mat push_forward_connection(const Connection& conn, int from, int to, const Vec& b,
                            const Vec& f_from) {
    return push_forward_coeff(*conn.atlas, from, to, b, f_from,
                              conn.coeff(from, b, f_from));
}

namespace {

// Pick a native chart whose V contains b and which can reach `chart`.
int reachable_native(const Connection& conn, int chart, const Vec& b) {
    for (int a : conn.native_charts) {
        if (!conn.atlas->has_transition(a, chart) ||
            !conn.atlas->has_transition(chart, a))
            continue;
        if (conn.atlas->chart(a).contains_v(b)) return a;
    }
    return -1;
}

CoeffDeriv fd_coeff_deriv(const std::function<Mat(const Vec&, const Vec&)>& g,
                          const Vec& b, const Vec& f) {
    const int n = static_cast<int>(b.size()), m = static_cast<int>(f.size());
    CoeffDeriv d;
    d.db.reserve(n);
    d.df.reserve(m);
    Vec bp = b, bm = b, fp = f, fm = f;
    for (int l = 0; l < n; ++l) {
        double h = 1e-5 * std::max(1.0, std::abs(b[l]));
        bp[l] = b[l] + h;
        bm[l] = b[l] - h;
        d.db.push_back((g(bp, f) - g(bm, f)) / (2.0 * h));
        bp[l] = b[l];
        bm[l] = b[l];
    }
    for (int l = 0; l < m; ++l) {
        double h = 1e-5 * std::max(1.0, std::abs(f[l]));
        fp[l] = f[l] + h;
        fm[l] = f[l] - h;
        d.df.push_back((g(b, fp) - g(b, fm)) / (2.0 * h));
        fp[l] = f[l];
        fm[l] = f[l];
    }
    return d;
}

// Analytic derivatives of the chart-`to` coefficient of a connection native
// on chart `from`, with respect to the chart-`to` coordinates (b, f).
CoeffDeriv pushforward_deriv(const Connection& conn, int from, int to, const Vec& b,
                             const Vec& f_to) {
    const BundleAtlas& atlas = *conn.atlas;
    const int n = atlas.base.dim, m = atlas.fiber.dim;
    const TransitionMap& t_back = atlas.transition(to, from); // f_from = t_back(b, f_to)
    const TransitionMap& t_fwd = atlas.transition(from, to);

    Vec f_from = t_back.map(b, f_to);
    Mat A = transition_db(t_back, b, f_to);  // d f_from / d b   (m x n)
    Mat D = transition_df(t_back, b, f_to);  // d f_from / d f_to (m x m)

    Mat G = conn.coeff(from, b, f_from);
    CoeffDeriv dG = conn.coeff_deriv
                        ? conn.coeff_deriv(from, b, f_from)
                        : fd_coeff_deriv([&](const Vec& bb, const Vec& ff) {
                              return conn.coeff(from, bb, ff);
                          }, b, f_from);

    Mat Tb = transition_db(t_fwd, b, f_from); // d_b t_fwd
    Mat Tf = transition_df(t_fwd, b, f_from); // d_f t_fwd
    auto Hbb = transition_d2bb(t_fwd, b, f_from);
    auto Hbf = transition_d2bf(t_fwd, b, f_from);
    auto Hff = transition_d2ff(t_fwd, b, f_from);

    // Gamma_to(b, f_to) = Tb(b, f_from) + Tf(b, f_from) * G(b, f_from)
    CoeffDeriv out;
    out.db.assign(n, Mat::Zero(m, n));
    out.df.assign(m, Mat::Zero(m, n));

    // total derivative of G with respect to (b, f_to)
    auto total_dG_b = [&](int l) { // d G / d b_l
        Mat s = dG.db[l];
        for (int u = 0; u < m; ++u) s += dG.df[u] * A(u, l);
        return s;
    };
    auto total_dG_f = [&](int l) { // d G / d f_to_l
        Mat s = Mat::Zero(m, n);
        for (int u = 0; u < m; ++u) s += dG.df[u] * D(u, l);
        return s;
    };

    for (int l = 0; l < n; ++l) {
        Mat term = Mat::Zero(m, n);
        for (int r = 0; r < m; ++r) {
            for (int k = 0; k < n; ++k) {
                // d (Tb)_{r,k} / d b_l, chained through f_from
                double v = Hbb[r](k, l);
                for (int s = 0; s < m; ++s) v += Hbf[r](k, s) * A(s, l);
                term(r, k) += v;
                // d (Tf)_{r,s} / d b_l * G_{s,k}
                for (int s = 0; s < m; ++s) {
                    double w = Hbf[r](l, s);
                    for (int u = 0; u < m; ++u) w += Hff[r](s, u) * A(u, l);
                    term(r, k) += w * G(s, k);
                }
            }
        }
        out.db[l] = term + Tf * total_dG_b(l);
    }
    for (int l = 0; l < m; ++l) {
        Mat term = Mat::Zero(m, n);
        for (int r = 0; r < m; ++r) {
            for (int k = 0; k < n; ++k) {
                double v = 0.0;
                for (int s = 0; s < m; ++s) v += Hbf[r](k, s) * D(s, l);
                term(r, k) += v;
                for (int s = 0; s < m; ++s) {
                    double w = 0.0;
                    for (int u = 0; u < m; ++u) w += Hff[r](s, u) * D(u, l);
                    term(r, k) += w * G(s, k);
                }
            }
        }
        out.df[l] = term + Tf * total_dG_f(l);
    }
    return out;
}

} // namespace

Mat coeff_in_chart(const Connection& conn, int chart, const Vec& b, const Vec& f) {
    if (conn.native_on(chart)) return conn.coeff(chart, b, f);
    int a = reachable_native(conn, chart, b);
    if (a < 0)
        throw UndefinedSummand("connection has no native chart covering this point");
    Vec f_a = conn.atlas->transition(chart, a).map(b, f);
    return push_forward_coeff(*conn.atlas, a, chart, b, f_a, conn.coeff(a, b, f_a));
}

CoeffDeriv coeff_deriv_in_chart(const Connection& conn, int chart, const Vec& b,
                                const Vec& f) {
    if (conn.native_on(chart)) {
        if (conn.coeff_deriv) return conn.coeff_deriv(chart, b, f);
        return fd_coeff_deriv([&](const Vec& bb, const Vec& ff) {
            return conn.coeff(chart, bb, ff);
        }, b, f);
    }
    int a = reachable_native(conn, chart, b);
    if (a < 0)
        throw UndefinedSummand("connection has no native chart covering this point");
    return pushforward_deriv(conn, a, chart, b, f);
}

Connection blend(std::vector<Connection> conns, std::vector<ScalarField> weights,
                 const BlendOptions& opt) {
    if (conns.empty() || conns.size() != weights.size())
        throw ValidationError("blend needs matching nonempty connection and weight lists");
    AtlasPtr atlas = conns.front().atlas;

    auto cs = std::make_shared<std::vector<Connection>>(std::move(conns));
    auto ws = std::make_shared<std::vector<ScalarField>>(std::move(weights));

    // sampled weight-sum validation over the covered region
    {
        Rng rng(opt.seed ^ 0xB1E4Du);
        const int n = atlas->base.dim, m = atlas->fiber.dim;
        for (const auto& c : atlas->charts) {
            for (int s = 0; s < opt.validation_samples; ++s) {
                Vec b(n);
                for (int d = 0; d < n; ++d) b[d] = rng.uniform(c.u_lo[d], c.u_hi[d]);
                Vec f(m);
                for (int d = 0; d < m; ++d)
                    f[d] = rng.uniform(-opt.fiber_range, opt.fiber_range);
                double sum = 0.0;
                for (const auto& w : *ws) sum += w.value(c.id, b, f);
                if (std::abs(sum - 1.0) > opt.weight_sum_tol)
                    throw WeightSumViolation("weights sum to " + std::to_string(sum) +
                                             " at a sampled point");
            }
        }
    }

    Connection out;
    out.atlas = atlas;
    out.coeff = [cs, ws](int chart, const Vec& b, const Vec& f) {
        Mat acc;
        bool first = true;
        for (size_t i = 0; i < cs->size(); ++i) {
            double w = (*ws)[i].value(chart, b, f);
            if (w == 0.0) continue;
            Mat g = coeff_in_chart((*cs)[i], chart, b, f);
            if (first) {
                acc = w * g;
                first = false;
            } else {
                acc += w * g;
            }
        }
        if (first) throw UndefinedSummand("all blend weights vanish at this point");
        return acc;
    };
    out.coeff_deriv = [cs, ws, atlas](int chart, const Vec& b, const Vec& f) {
        const int n = atlas->base.dim, m = atlas->fiber.dim;
        CoeffDeriv acc;
        acc.db.assign(n, Mat::Zero(m, n));
        acc.df.assign(m, Mat::Zero(m, n));
        for (size_t i = 0; i < cs->size(); ++i) {
            const auto& wf = (*ws)[i];
            double w = wf.value(chart, b, f);
            Vec gb(n), gf(m);
            if (wf.grad) {
                wf.grad(chart, b, f, gb, gf);
            } else {
                gb.setZero();
                gf.setZero();
                Vec bp = b, bm = b, fp = f, fm = f;
                for (int l = 0; l < n; ++l) {
                    double h = 1e-5 * std::max(1.0, std::abs(b[l]));
                    bp[l] += h;
                    bm[l] -= h;
                    gb[l] = (wf.value(chart, bp, f) - wf.value(chart, bm, f)) / (2 * h);
                    bp[l] = b[l];
                    bm[l] = b[l];
                }
                for (int l = 0; l < m; ++l) {
                    double h = 1e-5 * std::max(1.0, std::abs(f[l]));
                    fp[l] += h;
                    fm[l] -= h;
                    gf[l] = (wf.value(chart, b, fp) - wf.value(chart, b, fm)) / (2 * h);
                    fp[l] = f[l];
                    fm[l] = f[l];
                }
            }
            bool touched = w != 0.0;
            for (int l = 0; l < n && !touched; ++l) touched = gb[l] != 0.0;
            for (int l = 0; l < m && !touched; ++l) touched = gf[l] != 0.0;
            if (!touched) continue;
            Mat g = coeff_in_chart((*cs)[i], chart, b, f);
            CoeffDeriv dg = coeff_deriv_in_chart((*cs)[i], chart, b, f);
            for (int l = 0; l < n; ++l) acc.db[l] += gb[l] * g + w * dg.db[l];
            for (int l = 0; l < m; ++l) acc.df[l] += gf[l] * g + w * dg.df[l];
        }
        return acc;
    };
    return out;
}

double connection_compatibility_residual(const Connection& conn, int samples,
                                         double fiber_range, std::uint64_t seed) {
    const BundleAtlas& atlas = *conn.atlas;
    Rng rng(seed ^ 0xC0117u);
    const int n = atlas.base.dim, m = atlas.fiber.dim;
    double worst = 0.0;
    for (const auto& ci : atlas.charts) {
        for (const auto& cj : atlas.charts) {
            if (ci.id == cj.id || !atlas.has_transition(ci.id, cj.id)) continue;
            Vec lo(n), hi(n);
            bool overlap = true;
            for (int d = 0; d < n; ++d) {
                lo[d] = std::max(ci.v_lo[d], cj.v_lo[d]);
                hi[d] = std::min(ci.v_hi[d], cj.v_hi[d]);
                if (lo[d] >= hi[d]) overlap = false;
            }
            if (!overlap) continue;
            for (int s = 0; s < samples; ++s) {
                Vec b(n);
                for (int d = 0; d < n; ++d) b[d] = rng.uniform(lo[d], hi[d]);
                Vec f(m);
                for (int d = 0; d < m; ++d) f[d] = rng.uniform(-fiber_range, fiber_range);
                Mat pushed = push_forward_connection(conn, ci.id, cj.id, b, f);
                Vec f_j = atlas.transition(ci.id, cj.id).map(b, f);
                Mat direct = conn.coeff(cj.id, b, f_j);
                worst = std::max(worst, (pushed - direct).lpNorm<Eigen::Infinity>());
            }
        }
    }
    return worst;
}

} // namespace ehlab
