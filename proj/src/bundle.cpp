#include "ehlab/bundle.hpp"

#include <cmath>
#include <sstream>

#include "ehlab/errors.hpp"
#include "ehlab/rng.hpp"

namespace ehlab {

FiberModel default_euclidean_fiber(int dim) {
    FiberModel fm;
    fm.dim = dim;
    fm.topology = FiberModel::Topology::Euclidean;
    fm.height = [](const Vec& f) { return std::sqrt(1.0 + f.squaredNorm()); };
    fm.height_grad = [](const Vec& f) {
        return Vec(f / std::sqrt(1.0 + f.squaredNorm()));
    };
    fm.alpha = 1.0;
    fm.beta = 0.0;
    if (dim == 1) {
        fm.level_set = [](double level) {
            std::vector<Vec> pts;
            if (level >= 1.0) {
                double r = std::sqrt(level * level - 1.0);
                pts.push_back(vec1(r));
                if (r > 0.0) pts.push_back(vec1(-r));
            }
            return pts;
        };
    }
    return fm;
}

FiberModel default_circle_fiber() {
    FiberModel fm;
    fm.dim = 1;
    fm.topology = FiberModel::Topology::Circle;
    // present but unused: the fiber is compact
    fm.height = [](const Vec& f) { return 2.0 + std::sin(f[0]); };
    fm.height_grad = [](const Vec& f) { return vec1(std::cos(f[0])); };
    return fm;
}

bool Chart::contains_u(const Vec& b, double margin) const {
    for (int i = 0; i < b.size(); ++i)
        if (b[i] <= u_lo[i] + margin || b[i] >= u_hi[i] - margin) return false;
    return true;
}

bool Chart::contains_v(const Vec& b, double margin) const {
    for (int i = 0; i < b.size(); ++i)
        if (b[i] <= v_lo[i] + margin || b[i] >= v_hi[i] - margin) return false;
    return true;
}

double Chart::margin_u(const Vec& b) const {
    double m = 1e300;
    for (int i = 0; i < b.size(); ++i) {
        double w = u_hi[i] - u_lo[i];
        m = std::min(m, std::min(b[i] - u_lo[i], u_hi[i] - b[i]) / w);
    }
    return m;
}

const Chart& BundleAtlas::chart(int id) const {
    for (const auto& c : charts)
        if (c.id == id) return c;
    throw ValidationError("unknown chart id " + std::to_string(id));
}

bool BundleAtlas::has_transition(int from, int to) const {
    return from == to || transitions.count({from, to}) > 0;
}

const TransitionMap& BundleAtlas::transition(int from, int to) const {
    auto it = transitions.find({from, to});
    if (it == transitions.end())
        throw MissingTransition("no transition registered for charts " +
                                std::to_string(from) + " -> " + std::to_string(to));
    return it->second;
}

std::vector<int> BundleAtlas::charts_containing(const Vec& b) const {
    std::vector<int> out;
    for (const auto& c : charts)
        if (c.contains_u(b)) out.push_back(c.id);
    return out;
}

static double fd_step(double coord) {
    return 1e-5 * std::max(1.0, std::abs(coord));
}

Mat transition_db(const TransitionMap& t, const Vec& b, const Vec& f) {
    if (t.d_b) return t.d_b(b, f);
    const int m = static_cast<int>(f.size()), n = static_cast<int>(b.size());
    Mat J(m, n);
    Vec bp = b, bm = b;
    for (int j = 0; j < n; ++j) {
        double h = fd_step(b[j]);
        bp[j] = b[j] + h;
        bm[j] = b[j] - h;
        J.col(j) = (t.map(bp, f) - t.map(bm, f)) / (2.0 * h);
        bp[j] = b[j];
        bm[j] = b[j];
    }
    return J;
}

Mat transition_df(const TransitionMap& t, const Vec& b, const Vec& f) {
    if (t.d_f) return t.d_f(b, f);
    const int m = static_cast<int>(f.size());
    Mat J(m, m);
    Vec fp = f, fm = f;
    for (int j = 0; j < m; ++j) {
        double h = fd_step(f[j]);
        fp[j] = f[j] + h;
        fm[j] = f[j] - h;
        J.col(j) = (t.map(b, fp) - t.map(b, fm)) / (2.0 * h);
        fp[j] = f[j];
        fm[j] = f[j];
    }
    return J;
}

// second derivatives via differences of the (possibly analytic) Jacobians
std::vector<Mat> transition_d2bb(const TransitionMap& t, const Vec& b, const Vec& f) {
    if (t.d2_bb) return t.d2_bb(b, f);
    const int m = static_cast<int>(f.size()), n = static_cast<int>(b.size());
    std::vector<Mat> out(m, Mat::Zero(n, n));
    Vec bp = b, bm = b;
    for (int j = 0; j < n; ++j) {
        double h = 1e-4 * std::max(1.0, std::abs(b[j]));
        bp[j] = b[j] + h;
        bm[j] = b[j] - h;
        Mat d = (transition_db(t, bp, f) - transition_db(t, bm, f)) / (2.0 * h);
        for (int k = 0; k < m; ++k) out[k].col(j) = d.row(k).transpose();
        bp[j] = b[j];
        bm[j] = b[j];
    }
    return out;
}

std::vector<Mat> transition_d2bf(const TransitionMap& t, const Vec& b, const Vec& f) {
    if (t.d2_bf) return t.d2_bf(b, f);
    const int m = static_cast<int>(f.size()), n = static_cast<int>(b.size());
    std::vector<Mat> out(m, Mat::Zero(n, m));
    Vec fp = f, fm = f;
    for (int j = 0; j < m; ++j) {
        double h = 1e-4 * std::max(1.0, std::abs(f[j]));
        fp[j] = f[j] + h;
        fm[j] = f[j] - h;
        Mat d = (transition_db(t, b, fp) - transition_db(t, b, fm)) / (2.0 * h);
        for (int k = 0; k < m; ++k) out[k].col(j) = d.row(k).transpose();
        fp[j] = f[j];
        fm[j] = f[j];
    }
    return out;
}

std::vector<Mat> transition_d2ff(const TransitionMap& t, const Vec& b, const Vec& f) {
    if (t.d2_ff) return t.d2_ff(b, f);
    const int m = static_cast<int>(f.size());
    std::vector<Mat> out(m, Mat::Zero(m, m));
    Vec fp = f, fm = f;
    for (int j = 0; j < m; ++j) {
        double h = 1e-4 * std::max(1.0, std::abs(f[j]));
        fp[j] = f[j] + h;
        fm[j] = f[j] - h;
        Mat d = (transition_df(t, b, fp) - transition_df(t, b, fm)) / (2.0 * h);
        for (int k = 0; k < m; ++k) out[k].col(j) = d.row(k).transpose();
        fp[j] = f[j];
        fm[j] = f[j];
    }
    return out;
}

BundlePoint change_chart(const BundleAtlas& atlas, const BundlePoint& pt, int target) {
    if (pt.chart == target) return pt;
    const Chart& src = atlas.chart(pt.chart);
    const Chart& dst = atlas.chart(target);
    if (!src.contains_v(pt.b) || !dst.contains_v(pt.b))
        throw OutOfOverlap("base point is not in the chart overlap " +
                           std::to_string(pt.chart) + " & " + std::to_string(target));
    const TransitionMap& t = atlas.transition(pt.chart, target);
    return BundlePoint{target, pt.b, t.map(pt.b, pt.f)};
}

double height_of(const BundleAtlas& atlas, const BundlePoint& pt) {
    return atlas.fiber.height(pt.f);
}

AtlasReport validate_atlas(const BundleAtlas& atlas, int samples, std::uint64_t seed) {
    AtlasReport rep;
    rep.samples = samples;
    rep.min_det_df = 1e300;
    Rng rng(seed ^ 0xA71A5u);
    const int n = atlas.base.dim, m = atlas.fiber.dim;

    auto sample_f = [&](Rng& r) {
        Vec f(m);
        for (int i = 0; i < m; ++i) f[i] = r.uniform(-3.0, 3.0);
        return f;
    };

    // identity residual: every chart against itself, where a self-transition
    // is registered; synthetic identity otherwise (residual 0)
    for (const auto& [key, t] : atlas.transitions) {
        if (key.first != key.second) continue;
        const Chart& c = atlas.chart(key.first);
        for (int s = 0; s < samples; ++s) {
            Vec b(n);
            for (int i = 0; i < n; ++i) b[i] = rng.uniform(c.v_lo[i], c.v_hi[i]);
            Vec f = sample_f(rng);
            rep.max_identity_residual =
                std::max(rep.max_identity_residual, (t.map(b, f) - f).lpNorm<Eigen::Infinity>());
        }
    }

    // pairwise overlaps: invertibility of d_f; triples (including i->j->i
    // round trips) for the cocycle residual
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
            const TransitionMap& tji = atlas.transition(ci.id, cj.id);
            for (int s = 0; s < samples; ++s) {
                Vec b(n);
                for (int d = 0; d < n; ++d) b[d] = rng.uniform(lo[d], hi[d]);
                Vec f = sample_f(rng);
                rep.min_det_df = std::min(rep.min_det_df,
                                          std::abs(transition_df(tji, b, f).determinant()));
                // chains i -> j -> k against the direct i -> k
                for (const auto& ck : atlas.charts) {
                    if (ck.id == cj.id) continue;
                    if (!atlas.has_transition(cj.id, ck.id)) continue;
                    if (ck.id != ci.id && !atlas.has_transition(ci.id, ck.id)) continue;
                    bool in_k = ck.contains_v(b);
                    if (!in_k) continue;
                    Vec via = atlas.transition(cj.id, ck.id).map(b, tji.map(b, f));
                    Vec direct = (ck.id == ci.id) ? f : atlas.transition(ci.id, ck.id).map(b, f);
                    rep.max_cocycle_residual = std::max(
                        rep.max_cocycle_residual, (via - direct).lpNorm<Eigen::Infinity>());
                }
            }
        }
    }
    if (rep.min_det_df == 1e300) rep.min_det_df = 1.0; // no overlaps at all

    // cover gaps: grid over the region of interest
    int per_axis = std::max(2, static_cast<int>(std::round(std::pow(
                                    static_cast<double>(samples), 1.0 / n))));
    std::vector<int> idx(n, 0);
    while (true) {
        Vec b(n);
        for (int d = 0; d < n; ++d) {
            double s = (idx[d] + 0.5) / per_axis;
            b[d] = atlas.base.lo[d] + s * (atlas.base.hi[d] - atlas.base.lo[d]);
        }
        if (atlas.charts_containing(b).empty()) {
            ++rep.cover_gap_count;
            if (rep.cover_gap_examples.size() < 8) rep.cover_gap_examples.push_back(b);
        }
        int d = 0;
        while (d < n && ++idx[d] == per_axis) idx[d++] = 0;
        if (d == n) break;
    }
    return rep;
}

} // namespace ehlab
