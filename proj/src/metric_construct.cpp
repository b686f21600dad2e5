#include "ehlab/metric_construct.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <sstream>
#include <thread>

#include "ehlab/errors.hpp"
#include "ehlab/quadrature.hpp"
#include "ehlab/rng.hpp"

namespace ehlab {

std::vector<HeightBand> ThickTubeFamily::bands_of_chart(int chart) const {
    std::vector<HeightBand> out;
    for (const auto& t : tubes)
        if (t.chart == chart) out.push_back({t.radius, t.radius + t.thickness});
    std::sort(out.begin(), out.end(),
              [](const HeightBand& a, const HeightBand& b) { return a.lo < b.lo; });
    return out;
}

FiberMetricField flat_fiber_metric(int m) {
    FiberMetricField g;
    g.value = [m](const Vec&) { return Mat(Mat::Identity(m, m)); };
    g.deriv = [m](const Vec&) { return std::vector<Mat>(m, Mat::Zero(m, m)); };
    return g;
}

BaseMetricField flat_base_metric(int n) {
    BaseMetricField g;
    g.value = [n](const Vec&) { return Mat(Mat::Identity(n, n)); };
    g.deriv = [n](const Vec&) { return std::vector<Mat>(n, Mat::Zero(n, n)); };
    return g;
}

namespace {

std::vector<Mat> field_deriv(const std::function<Mat(const Vec&)>& value,
                             const std::function<std::vector<Mat>(const Vec&)>& deriv,
                             const Vec& x) {
    if (deriv) return deriv(x);
    const int d = static_cast<int>(x.size());
    std::vector<Mat> out(d);
    Vec xp = x, xm = x;
    for (int k = 0; k < d; ++k) {
        double h = 1e-5 * std::max(1.0, std::abs(x[k]));
        xp[k] = x[k] + h;
        xm[k] = x[k] - h;
        out[k] = (value(xp) - value(xm)) / (2.0 * h);
        xp[k] = x[k];
        xm[k] = x[k];
    }
    return out;
}

} // namespace

double band_crossing_distance(const BundleAtlas& atlas, const FiberMetricField& g_f,
                              double n_lo, double n_hi, double quad_tol) {
    if (atlas.fiber.dim != 1)
        throw ValidationError(
            "band separation verification needs a 1-dimensional fiber");
    if (!atlas.fiber.level_set)
        throw ValidationError("fiber model lacks a level-set handle");
    FiberMetricField g = g_f.value ? g_f : flat_fiber_metric(1);

    struct Pt {
        double f;
        bool hi;
    };
    std::vector<Pt> pts;
    for (const Vec& p : atlas.fiber.level_set(n_lo)) pts.push_back({p[0], false});
    for (const Vec& p : atlas.fiber.level_set(n_hi)) pts.push_back({p[0], true});
    if (pts.empty()) return std::numeric_limits<double>::infinity();
    std::sort(pts.begin(), pts.end(),
              [](const Pt& a, const Pt& b) { return a.f < b.f; });

    auto speed = [&](double f) {
        double v = g.value(vec1(f))(0, 0);
        return std::sqrt(std::max(0.0, v));
    };

    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        if (pts[i].hi == pts[i + 1].hi) continue;
        double a = pts[i].f, b = pts[i + 1].f;
        if (!(b > a)) continue;
        double hm = atlas.fiber.height(vec1(0.5 * (a + b)));
        if (hm < n_lo - 1e-9 || hm > n_hi + 1e-9) continue; // not a band component
        QuadOptions qo;
        qo.tol = quad_tol;
        best = std::min(best, integrate(speed, a, b, {}, qo).value);
    }
    return best;
}

ThickTubeFamily build_thick_tube_family(const BundleAtlas& atlas, int rounds,
                                        const MetricConstructOptions& opt) {
    if (rounds < 1) throw ValidationError("thick tube family needs rounds >= 1");
    if (!atlas.fiber.level_set)
        throw ValidationError("fiber model lacks a level-set handle for tubes");

    ThickTubeFamily fam;
    fam.rounds = rounds;
    TubeFamily shadow; // carries band sample points for the radius sampler
    for (int round = 0; round < rounds; ++round) {
        for (const auto& c : atlas.charts) {
            int nr = pick_tube_radius(atlas, shadow, c.id, opt.sampler);
            auto prior = fam.bands_of_chart(c.id);
            if (!prior.empty() && double(nr) <= prior.back().hi)
                throw SeparationViolation("band bottom failed to clear chart " +
                                          std::to_string(c.id));
            double l = 0.0, dist = 0.0;
            for (double cand : opt.thickness_ladder) {
                double d = band_crossing_distance(atlas, opt.fiber_metric, nr,
                                                  nr + cand, opt.separation_quad_tol);
                if (d >= 1.0) {
                    l = cand;
                    dist = d;
                    break;
                }
            }
            if (l == 0.0) {
                std::ostringstream os;
                os << "no candidate thickness reaches crossing distance 1 for the band"
                      " at height "
                   << nr << " over chart " << c.id;
                throw SeparationViolation(os.str());
            }
            fam.tubes.push_back({c.id, double(nr), l, round, dist});

            Tube sh{c.id, nr, round, {}};
            const int L = std::max(2, opt.band_levels);
            for (int s = 0; s < L; ++s) {
                double h = nr + l * s / double(L - 1);
                for (const Vec& p : atlas.fiber.level_set(h))
                    sh.level_points.push_back(p);
            }
            shadow.tubes.push_back(std::move(sh));
        }
    }
    return fam;
}

namespace {

struct BlendCtx {
    AtlasPtr atlas;
    std::shared_ptr<const PartitionOfUnity> part;
    FiberMetricField gf;
    BaseMetricField gb;
    int n = 0, m = 0;
};

// chart-i product metric g_B x g_F written in chart coordinates
Mat product_in_chart(const BlendCtx& ctx, int i, int chart, const Vec& b,
                     const Vec& f) {
    const int n = ctx.n, m = ctx.m;
    Mat G = Mat::Zero(n + m, n + m);
    int iid = ctx.atlas->charts[i].id;
    if (iid == chart) {
        G.topLeftCorner(n, n) = ctx.gb.value(b);
        G.bottomRightCorner(m, m) = ctx.gf.value(f);
        return G;
    }
    const TransitionMap& t = ctx.atlas->transition(chart, iid);
    Vec fi = t.map(b, f);
    Mat A = transition_db(t, b, f);
    Mat D = transition_df(t, b, f);
    Mat F = ctx.gf.value(fi);
    Mat FA = F * A, FD = F * D;
    G.topLeftCorner(n, n) = ctx.gb.value(b) + A.transpose() * FA;
    G.topRightCorner(n, m) = A.transpose() * FD;
    G.bottomLeftCorner(m, n) = G.topRightCorner(n, m).transpose();
    G.bottomRightCorner(m, m) = D.transpose() * FD;
    return G;
}

void product_with_deriv(const BlendCtx& ctx, int i, int chart, const Vec& b,
                        const Vec& f, Mat& G, std::vector<Mat>& dG) {
    const int n = ctx.n, m = ctx.m, d = n + m;
    dG.assign(d, Mat::Zero(d, d));
    int iid = ctx.atlas->charts[i].id;
    std::vector<Mat> dgb = field_deriv(ctx.gb.value, ctx.gb.deriv, b);

    if (iid == chart) {
        G = product_in_chart(ctx, i, chart, b, f);
        std::vector<Mat> dF = field_deriv(ctx.gf.value, ctx.gf.deriv, f);
        for (int k = 0; k < n; ++k) dG[k].topLeftCorner(n, n) = dgb[k];
        for (int u = 0; u < m; ++u) dG[n + u].bottomRightCorner(m, m) = dF[u];
        return;
    }

    const TransitionMap& t = ctx.atlas->transition(chart, iid);
    Vec fi = t.map(b, f);
    Mat A = transition_db(t, b, f);
    Mat D = transition_df(t, b, f);
    Mat F = ctx.gf.value(fi);
    std::vector<Mat> dF_fi = field_deriv(ctx.gf.value, ctx.gf.deriv, fi);
    auto Hbb = transition_d2bb(t, b, f);
    auto Hbf = transition_d2bf(t, b, f);
    auto Hff = transition_d2ff(t, b, f);

    Mat FA = F * A, FD = F * D;
    G.setZero(d, d);
    G.topLeftCorner(n, n) = ctx.gb.value(b) + A.transpose() * FA;
    G.topRightCorner(n, m) = A.transpose() * FD;
    G.bottomLeftCorner(m, n) = G.topRightCorner(n, m).transpose();
    G.bottomRightCorner(m, m) = D.transpose() * FD;

    for (int k = 0; k < d; ++k) {
        Vec dfi = k < n ? Vec(A.col(k)) : Vec(D.col(k - n));
        Mat dFk = Mat::Zero(m, m);
        for (int u = 0; u < m; ++u) dFk += dF_fi[u] * dfi[u];
        Mat dAk(m, n), dDk(m, m);
        for (int r = 0; r < m; ++r) {
            for (int j = 0; j < n; ++j)
                dAk(r, j) = k < n ? Hbb[r](j, k) : Hbf[r](j, k - n);
            for (int s = 0; s < m; ++s)
                dDk(r, s) = k < n ? Hbf[r](k, s) : Hff[r](s, k - n);
        }
        Mat dTL = dAk.transpose() * FA + A.transpose() * dFk * A +
                  FA.transpose() * dAk;
        if (k < n) dTL += dgb[k];
        Mat dTR = dAk.transpose() * FD + A.transpose() * dFk * D +
                  FA.transpose() * dDk;
        Mat dBR = dDk.transpose() * FD + D.transpose() * dFk * D +
                  FD.transpose() * dDk;
        dG[k].topLeftCorner(n, n) = dTL;
        dG[k].topRightCorner(n, m) = dTR;
        dG[k].bottomLeftCorner(m, n) = dTR.transpose();
        dG[k].bottomRightCorner(m, m) = dBR;
    }
}

Vec fiber_window(const BundleAtlas& atlas, const ThickTubeFamily& fam) {
    double top = 1.0;
    for (const auto& t : fam.tubes) top = std::max(top, t.radius + t.thickness);
    double ext = top + 0.75;
    const int m = atlas.fiber.dim;
    if (atlas.fiber.level_set) {
        double fmax = 0.0;
        for (const Vec& p : atlas.fiber.level_set(ext))
            fmax = std::max(fmax, p.lpNorm<Eigen::Infinity>());
        if (fmax > 0.0) return Vec::Constant(m, fmax);
    }
    return Vec::Constant(m, ext);
}

} // namespace

CompleteFiberedMetric build_complete_fibered_metric(AtlasPtr atlas, int rounds,
                                                    const MetricConstructOptions& opt) {
    const int n = atlas->base.dim, m = atlas->fiber.dim;
    const int nc = static_cast<int>(atlas->charts.size());

    MetricConstructOptions o = opt;
    if (!o.fiber_metric.value) o.fiber_metric = flat_fiber_metric(m);
    if (!o.base_metric.value) o.base_metric = flat_base_metric(n);

    CompleteFiberedMetric out;
    out.atlas = atlas;
    auto fam = std::make_shared<ThickTubeFamily>(
        build_thick_tube_family(*atlas, rounds, o));
    out.tubes = fam;

    std::vector<std::vector<HeightBand>> bands;
    bands.reserve(nc);
    for (const auto& c : atlas->charts) bands.push_back(fam->bands_of_chart(c.id));
    auto part = std::make_shared<PartitionOfUnity>(atlas, bands,
                                                   o.partition.collar_eps);
    out.partition = part;

    for (const auto& t : fam->tubes) {
        out.record.min_crossing_distance =
            std::min(out.record.min_crossing_distance, t.crossing_distance);
    }
    double covered = std::numeric_limits<double>::infinity();
    for (const auto& c : atlas->charts) {
        auto bs = fam->bands_of_chart(c.id);
        covered = std::min(covered, bs.empty() ? 0.0 : bs.back().lo);
    }
    out.record.covered_height = covered;

    BlendCtx ctx{atlas, part, o.fiber_metric, o.base_metric, n, m};
    Metric blended;
    blended.atlas = atlas;
    blended.dim = n + m;
    blended.base_dim = n;
    blended.g = [ctx](int chart, const Vec& x) {
        Vec b = x.head(ctx.n), f = x.tail(ctx.m);
        Mat G = Mat::Zero(ctx.n + ctx.m, ctx.n + ctx.m);
        for (int i = 0; i < ctx.part->count(); ++i) {
            double lam = ctx.part->weight(i, chart, b, f);
            if (lam == 0.0) continue;
            G += lam * product_in_chart(ctx, i, chart, b, f);
        }
        return G;
    };
    blended.dg = [ctx](int chart, const Vec& x) {
        const int d = ctx.n + ctx.m;
        Vec b = x.head(ctx.n), f = x.tail(ctx.m);
        std::vector<Mat> outd(d, Mat::Zero(d, d));
        for (int i = 0; i < ctx.part->count(); ++i) {
            double lam = ctx.part->weight(i, chart, b, f);
            Vec gb, gf;
            ctx.part->weight_grad(i, chart, b, f, gb, gf);
            Vec dlam(d);
            dlam.head(ctx.n) = gb;
            dlam.tail(ctx.m) = gf;
            bool grad_zero = dlam.lpNorm<Eigen::Infinity>() == 0.0;
            if (lam == 0.0 && grad_zero) continue;
            if (lam == 0.0) {
                Mat Gi = product_in_chart(ctx, i, chart, b, f);
                for (int k = 0; k < d; ++k)
                    if (dlam[k] != 0.0) outd[k] += dlam[k] * Gi;
            } else {
                Mat Gi;
                std::vector<Mat> dGi;
                product_with_deriv(ctx, i, chart, b, f, Gi, dGi);
                for (int k = 0; k < d; ++k) outd[k] += dlam[k] * Gi + lam * dGi[k];
            }
        }
        return outd;
    };
    blended.in_domain = [ctx](int chart, const Vec& x) {
        return ctx.atlas->chart(chart).contains_u(x.head(ctx.n));
    };
    out.metric = blended;

    // partition validation over the covered window
    Vec fw = fiber_window(*atlas, *fam);
    Rng rng(o.partition.seed ^ 0x9A27u);
    auto& diag = out.record.partition;
    diag.min_weight_sum = std::numeric_limits<double>::infinity();
    int per_chart = std::max(1, o.partition.validation_samples / std::max(1, nc));
    for (int ci = 0; ci < nc; ++ci) {
        const Chart& c = atlas->charts[ci];
        for (int s = 0; s < per_chart; ++s) {
            Vec b(n), f(m);
            for (int d = 0; d < n; ++d) b[d] = rng.uniform(c.u_lo[d], c.u_hi[d]);
            for (int d = 0; d < m; ++d) f[d] = rng.uniform(-fw[d], fw[d]);
            double sum = part->weight_sum(c.id, b, f);
            diag.min_weight_sum = std::min(diag.min_weight_sum, sum);
            if (sum <= 1e-12) {
                diag.gap_count += 1;
                std::ostringstream os;
                os << "partition gap: sum mu = " << sum << " at b = " << b.transpose()
                   << ", f = " << f.transpose() << " (chart " << c.id << ")";
                throw PartitionGap(os.str());
            }
            double lam_sum = 0.0;
            for (int j = 0; j < nc; ++j) lam_sum += part->weight(j, c.id, b, f);
            diag.max_weight_sum_err =
                std::max(diag.max_weight_sum_err, std::abs(lam_sum - 1.0));
            diag.samples += 1;
        }
    }

    // on-tube checks: other charts get weight 0 and the blend reduces to the
    // plain product metric
    Rng arng(o.partition.seed ^ 0xA6EEu);
    for (const auto& tube : fam->tubes) {
        int ci = -1;
        for (int i = 0; i < nc; ++i)
            if (atlas->charts[i].id == tube.chart) ci = i;
        const Chart& c = atlas->chart(tube.chart);
        for (int s = 0; s < o.agreement_samples; ++s) {
            Vec b(n);
            for (int d = 0; d < n; ++d) b[d] = arng.uniform(c.u_lo[d], c.u_hi[d]);
            double h = arng.uniform(tube.radius + 0.02 * tube.thickness,
                                    tube.radius + 0.98 * tube.thickness);
            auto pts = atlas->fiber.level_set(h);
            if (pts.empty()) continue;
            const Vec& f = pts[s % pts.size()];
            for (int j = 0; j < nc; ++j) {
                if (j == ci) continue;
                diag.max_offtube_weight =
                    std::max(diag.max_offtube_weight,
                             part->weight(j, tube.chart, b, f));
            }
            Vec x(n + m);
            x.head(n) = b;
            x.tail(m) = f;
            Mat G = out.metric.g(tube.chart, x);
            Mat P = product_in_chart(ctx, ci, tube.chart, b, f);
            double r = (G - P).lpNorm<Eigen::Infinity>();
            out.record.max_agreement_residual =
                std::max(out.record.max_agreement_residual, r);
        }
    }
    if (out.record.max_agreement_residual > o.agreement_tol) {
        std::ostringstream os;
        os << "blended metric deviates from the chart product on a tube by "
           << out.record.max_agreement_residual;
        throw AgreementViolation(os.str());
    }

    return out;
}

namespace {

int deepest_chart_in(const BundleAtlas& atlas, const Vec& b) {
    int best = -1;
    double best_margin = 0.0;
    for (const auto& c : atlas.charts) {
        double mg = c.margin_u(b);
        if (mg >= 0.0 && (best < 0 || mg > best_margin)) {
            best = c.id;
            best_margin = mg;
        }
    }
    return best;
}

enum class BandState { Unknown, Below, Above, InsideFromLo, InsideFromHi };

// full band traversals of one chart's band along a trace; heights are NaN
// where the sample is not presentable over U_j
void scan_band(const std::vector<double>& ts, const std::vector<double>& hs,
               int trial, int chart, const HeightBand& band,
               std::vector<CrossingRecord>& out) {
    BandState st = BandState::Unknown;
    double entry = 0.0;

    auto init_state = [&](double h) {
        if (h < band.lo) return BandState::Below;
        if (h > band.hi) return BandState::Above;
        return BandState::Unknown; // starts inside: traversal not creditable
    };

    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
        double h0 = hs[i], h1 = hs[i + 1];
        if (std::isnan(h0)) {
            st = BandState::Unknown;
            continue;
        }
        if (st == BandState::Unknown) st = init_state(h0);
        if (std::isnan(h1)) {
            st = BandState::Unknown;
            continue;
        }
        if (h1 == h0) continue;

        struct Ev {
            double t;
            bool hi_level;
            bool upward;
        };
        Ev evs[2];
        int ne = 0;
        for (int which = 0; which < 2; ++which) {
            double lvl = which == 0 ? band.lo : band.hi;
            if ((h0 < lvl) == (h1 < lvl)) continue;
            double tt = ts[i] + (lvl - h0) / (h1 - h0) * (ts[i + 1] - ts[i]);
            evs[ne++] = {tt, which == 1, h1 > h0};
        }
        if (ne == 2 && evs[0].t > evs[1].t) std::swap(evs[0], evs[1]);

        for (int e = 0; e < ne; ++e) {
            const Ev& ev = evs[e];
            if (!ev.hi_level && ev.upward) {
                // entered through the bottom
                if (st == BandState::Below || st == BandState::Unknown) {
                    st = BandState::InsideFromLo;
                    entry = ev.t;
                }
            } else if (ev.hi_level && ev.upward) {
                if (st == BandState::InsideFromLo)
                    out.push_back({trial, chart, band.lo, band.hi, entry, ev.t,
                                   ev.t - entry});
                st = BandState::Above;
            } else if (ev.hi_level && !ev.upward) {
                if (st == BandState::Above || st == BandState::Unknown) {
                    st = BandState::InsideFromHi;
                    entry = ev.t;
                }
            } else {
                if (st == BandState::InsideFromHi)
                    out.push_back({trial, chart, band.lo, band.hi, entry, ev.t,
                                   ev.t - entry});
                st = BandState::Below;
            }
        }
    }
}

} // namespace

MetricProbeReport metric_completeness_probe(const CompleteFiberedMetric& cfm,
                                            const MetricProbeOptions& opt) {
    if (opt.trials < 1) throw ValidationError("metric probe needs trials >= 1");
    const BundleAtlas& atlas = *cfm.atlas;
    const int n = atlas.base.dim, m = atlas.fiber.dim, d = n + m;

    double cap = cfm.record.covered_height - opt.start_height_margin;
    if (cap <= 1.0)
        throw ValidationError("covered height leaves no room for probe starts");
    double fmax = cap;
    if (atlas.fiber.level_set) {
        double fm = 0.0;
        for (const Vec& p : atlas.fiber.level_set(cap))
            fm = std::max(fm, p.lpNorm<Eigen::Infinity>());
        if (fm > 0.0) fmax = fm;
    }

    GeodesicOptions gopt;
    gopt.ode = opt.ode;
    gopt.ode.h_max = std::min(gopt.ode.h_max, opt.crossing_h_max);
    gopt.normalize = true;

    struct TrialResult {
        GeoStatus status = GeoStatus::Completed;
        double max_h = 0.0;
        double speed_drift = 0.0;
        std::vector<CrossingRecord> crossings;
    };
    std::vector<TrialResult> results(opt.trials);

    auto run_trial = [&](int trial) {
        Rng rng = trial_rng(opt.seed, static_cast<std::uint64_t>(trial));
        Vec b0(n);
        int chart = -1;
        for (int attempts = 0; attempts < 1000 && chart < 0; ++attempts) {
            for (int dd = 0; dd < n; ++dd)
                b0[dd] = rng.uniform(atlas.base.lo[dd], atlas.base.hi[dd]);
            chart = deepest_chart_in(atlas, b0);
        }
        if (chart < 0)
            throw NoChartContains("metric probe could not sample a covered base point");
        Vec f0(m);
        for (int attempts = 0;; ++attempts) {
            for (int dd = 0; dd < m; ++dd) f0[dd] = rng.uniform(-fmax, fmax);
            if (atlas.fiber.height(f0) <= cap) break;
            if (attempts >= 1000)
                throw ValidationError("metric probe could not sample a start fiber "
                                      "point under the height cap");
        }
        Vec v0(d);
        do {
            for (int dd = 0; dd < d; ++dd) v0[dd] = rng.uniform(-1.0, 1.0);
        } while (v0.norm() < 0.1);

        Vec x0(d);
        x0.head(n) = b0;
        x0.tail(m) = f0;
        GeodesicTrace tr = geodesic(cfm.metric, chart, x0, v0, opt.horizon, gopt);

        TrialResult res;
        res.status = tr.status;

        // per-sample heights in every chart that can present the point
        std::vector<double> ts(tr.samples.size());
        std::vector<std::vector<double>> hj(atlas.charts.size(),
                                            std::vector<double>(tr.samples.size()));
        for (std::size_t s = 0; s < tr.samples.size(); ++s) {
            const auto& sm = tr.samples[s];
            ts[s] = sm.t;
            Vec b = sm.x.head(n), f = sm.x.tail(m);
            res.max_h = std::max(res.max_h, atlas.fiber.height(f));
            res.speed_drift = std::max(res.speed_drift, std::abs(sm.speed - 1.0));
            for (std::size_t j = 0; j < atlas.charts.size(); ++j) {
                const Chart& cj = atlas.charts[j];
                double h = std::numeric_limits<double>::quiet_NaN();
                if (cj.contains_u(b)) {
                    if (cj.id == sm.chart) {
                        h = atlas.fiber.height(f);
                    } else if (atlas.has_transition(sm.chart, cj.id) &&
                               atlas.chart(sm.chart).contains_v(b) &&
                               cj.contains_v(b)) {
                        h = atlas.fiber.height(
                            atlas.transition(sm.chart, cj.id).map(b, f));
                    }
                }
                hj[j][s] = h;
            }
        }
        for (std::size_t j = 0; j < atlas.charts.size(); ++j) {
            for (const auto& band : cfm.tubes->bands_of_chart(atlas.charts[j].id))
                scan_band(ts, hj[j], trial, atlas.charts[j].id, band, res.crossings);
        }
        results[trial] = std::move(res);
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

    MetricProbeReport rep;
    rep.seed = opt.seed;
    rep.trials = opt.trials;
    for (const auto& r : results) {
        switch (r.status) {
            case GeoStatus::Completed: rep.completed++; break;
            case GeoStatus::LeftDomain: rep.left_domain++; break;
            case GeoStatus::StepUnderflow: rep.escapes++; break;
        }
        rep.max_height = std::max(rep.max_height, r.max_h);
        for (const auto& c : r.crossings) {
            rep.crossings++;
            rep.min_crossing_arc = std::min(rep.min_crossing_arc, c.arc);
            rep.records.push_back(c);
        }
    }
    return rep;
}

} // namespace ehlab
