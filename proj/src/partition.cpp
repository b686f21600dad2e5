#include "ehlab/partition.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ehlab/errors.hpp"
#include "ehlab/rng.hpp"
#include "ehlab/smooth.hpp"

namespace ehlab {

PartitionOfUnity::PartitionOfUnity(AtlasPtr atlas,
                                   std::shared_ptr<const TubeFamily> tubes,
                                   double collar_eps)
    : atlas_(std::move(atlas)), eps_(collar_eps) {
    chart_bands_.reserve(atlas_->charts.size());
    for (const auto& c : atlas_->charts) {
        auto radii = tubes->radii_of_chart(c.id);
        std::sort(radii.begin(), radii.end());
        std::vector<HeightBand> bands;
        bands.reserve(radii.size());
        for (int r : radii) bands.push_back({double(r), double(r)});
        chart_bands_.push_back(std::move(bands));
    }
}

PartitionOfUnity::PartitionOfUnity(AtlasPtr atlas,
                                   std::vector<std::vector<HeightBand>> bands,
                                   double collar_eps)
    : atlas_(std::move(atlas)), eps_(collar_eps), chart_bands_(std::move(bands)) {
    if (chart_bands_.size() != atlas_->charts.size())
        throw ValidationError("band list count does not match chart count");
}

double PartitionOfUnity::base_bump(int i, const Vec& b) const {
    const Chart& c = atlas_->charts[i];
    double v = 1.0;
    for (int d = 0; d < b.size() && v > 0.0; ++d)
        v *= plateau_bump(b[d], c.v_lo[d], c.u_lo[d], c.u_hi[d], c.v_hi[d]);
    return v;
}

double PartitionOfUnity::base_bump_d(int i, const Vec& b, int axis) const {
    const Chart& c = atlas_->charts[i];
    double v = 1.0;
    for (int d = 0; d < b.size(); ++d) {
        double piece = d == axis
                           ? plateau_bump_d(b[d], c.v_lo[d], c.u_lo[d], c.u_hi[d],
                                            c.v_hi[d])
                           : plateau_bump(b[d], c.v_lo[d], c.u_lo[d], c.u_hi[d],
                                          c.v_hi[d]);
        v *= piece;
        if (v == 0.0) return 0.0;
    }
    return v;
}

double PartitionOfUnity::chi(int j, int chart, const Vec& b, const Vec& f) const {
    double bb = base_bump(j, b);
    if (bb == 0.0 || chart_bands_[j].empty()) return 0.0;
    int jid = atlas_->charts[j].id;
    Vec fj = jid == chart ? f : atlas_->transition(chart, jid).map(b, f);
    double h = atlas_->fiber.height(fj);
    double c = 0.0; // collar supports are disjoint (bands >= 1 apart > 2 eps)
    for (const auto& bd : chart_bands_[j]) c += collar_cutoff(h, bd.lo, bd.hi, eps_);
    return bb * c;
}

void PartitionOfUnity::chi_grad(int j, int chart, const Vec& b, const Vec& f,
                                double& val, Vec& gb, Vec& gf) const {
    const int n = static_cast<int>(b.size()), m = static_cast<int>(f.size());
    gb.setZero(n);
    gf.setZero(m);
    double bb = base_bump(j, b);
    if (bb == 0.0 || chart_bands_[j].empty()) {
        val = 0.0;
        return;
    }
    int jid = atlas_->charts[j].id;
    Vec fj = f;
    Mat A = Mat::Zero(m, n), D = Mat::Identity(m, m);
    if (jid != chart) {
        const TransitionMap& t = atlas_->transition(chart, jid);
        fj = t.map(b, f);
        A = transition_db(t, b, f);
        D = transition_df(t, b, f);
    }
    double h = atlas_->fiber.height(fj);
    double c = 0.0, cd = 0.0;
    for (const auto& bd : chart_bands_[j]) {
        c += collar_cutoff(h, bd.lo, bd.hi, eps_);
        cd += collar_cutoff_d(h, bd.lo, bd.hi, eps_);
    }
    val = bb * c;
    Vec hg = atlas_->fiber.height_grad(fj); // m
    Vec hg_b = A.transpose() * hg;          // d h(f_j) / d b
    Vec hg_f = D.transpose() * hg;          // d h(f_j) / d f
    for (int d = 0; d < n; ++d) gb[d] = base_bump_d(j, b, d) * c + bb * cd * hg_b[d];
    for (int d = 0; d < m; ++d) gf[d] = bb * cd * hg_f[d];
}

double PartitionOfUnity::mu(int i, int chart, const Vec& b, const Vec& f) const {
    double v = base_bump(i, b);
    if (v == 0.0) return 0.0;
    for (int j = 0; j < count() && v != 0.0; ++j) {
        if (j == i) continue;
        v *= 1.0 - chi(j, chart, b, f);
    }
    return v;
}

void PartitionOfUnity::mu_grad(int i, int chart, const Vec& b, const Vec& f,
                               double& val, Vec& gb, Vec& gf) const {
    const int n = static_cast<int>(b.size()), m = static_cast<int>(f.size());
    std::vector<double> factors;
    std::vector<Vec> fgb, fgf;
    factors.reserve(count());

    double bb = base_bump(i, b);
    factors.push_back(bb);
    Vec g0(n);
    for (int d = 0; d < n; ++d) g0[d] = base_bump_d(i, b, d);
    fgb.push_back(g0);
    fgf.push_back(Vec::Zero(m));

    if (bb != 0.0) {
        for (int j = 0; j < count(); ++j) {
            if (j == i) continue;
            double cv;
            Vec cgb, cgf;
            chi_grad(j, chart, b, f, cv, cgb, cgf);
            factors.push_back(1.0 - cv);
            fgb.push_back(-cgb);
            fgf.push_back(-cgf);
        }
    }

    val = 1.0;
    for (double fac : factors) val *= fac;
    gb.setZero(n);
    gf.setZero(m);
    for (size_t j = 0; j < factors.size(); ++j) {
        double rest = 1.0;
        for (size_t k = 0; k < factors.size(); ++k)
            if (k != j) rest *= factors[k];
        gb += fgb[j] * rest;
        gf += fgf[j] * rest;
    }
}

double PartitionOfUnity::weight(int i, int chart, const Vec& b, const Vec& f) const {
    double mi = mu(i, chart, b, f);
    double s = 0.0;
    for (int j = 0; j < count(); ++j) s += j == i ? mi : mu(j, chart, b, f);
    if (s <= 1e-12) {
        std::ostringstream os;
        os << "partition gap: sum mu = " << s << " at b = " << b.transpose()
           << ", f = " << f.transpose() << " (chart " << chart << ")";
        throw PartitionGap(os.str());
    }
    return mi / s;
}

double PartitionOfUnity::weight_sum(int chart, const Vec& b, const Vec& f) const {
    double s = 0.0;
    for (int j = 0; j < count(); ++j) s += mu(j, chart, b, f);
    return s;
}

void PartitionOfUnity::weight_grad(int i, int chart, const Vec& b, const Vec& f,
                                   Vec& gb, Vec& gf) const {
    const int n = static_cast<int>(b.size()), m = static_cast<int>(f.size());
    double s = 0.0, mi = 0.0;
    Vec sgb = Vec::Zero(n), sgf = Vec::Zero(m), migb(n), migf(m);
    for (int j = 0; j < count(); ++j) {
        double v;
        Vec jgb, jgf;
        mu_grad(j, chart, b, f, v, jgb, jgf);
        s += v;
        sgb += jgb;
        sgf += jgf;
        if (j == i) {
            mi = v;
            migb = jgb;
            migf = jgf;
        }
    }
    if (s <= 1e-12) throw PartitionGap("partition gap hit during gradient evaluation");
    double lam = mi / s;
    gb = (migb - lam * sgb) / s;
    gf = (migf - lam * sgf) / s;
}

ScalarField PartitionOfUnity::field(int i) const {
    PartitionOfUnity copy = *this;
    ScalarField sf;
    sf.value = [copy, i](int chart, const Vec& b, const Vec& f) {
        return copy.weight(i, chart, b, f);
    };
    sf.grad = [copy, i](int chart, const Vec& b, const Vec& f, Vec& gb, Vec& gf) {
        copy.weight_grad(i, chart, b, f, gb, gf);
    };
    return sf;
}

std::vector<ScalarField> PartitionOfUnity::fields() const {
    std::vector<ScalarField> out;
    out.reserve(count());
    for (int i = 0; i < count(); ++i) out.push_back(field(i));
    return out;
}

std::pair<PartitionOfUnity, PartitionDiagnostics> build_partition(
    AtlasPtr atlas, std::shared_ptr<const TubeFamily> tubes,
    const PartitionOptions& opt) {
    PartitionOfUnity part(atlas, tubes, opt.collar_eps);
    PartitionDiagnostics diag;
    const int n = atlas->base.dim, m = atlas->fiber.dim;
    const int nc = static_cast<int>(atlas->charts.size());

    Vec flo = opt.fiber_lo, fhi = opt.fiber_hi;
    if (flo.size() != m || fhi.size() != m) {
        // sampling window out to just above the largest built level
        int n_max = 1;
        for (const auto& t : tubes->tubes) n_max = std::max(n_max, t.radius);
        double ext = double(n_max) + 0.75;
        if (atlas->fiber.level_set) {
            double fmax = 0.0;
            for (const Vec& p : atlas->fiber.level_set(ext))
                fmax = std::max(fmax, p.lpNorm<Eigen::Infinity>());
            ext = fmax > 0.0 ? fmax : ext;
        }
        flo = Vec::Constant(m, -ext);
        fhi = Vec::Constant(m, ext);
    }

    Rng rng(opt.seed ^ 0x9A27u);
    diag.min_weight_sum = std::numeric_limits<double>::infinity();
    int per_chart = std::max(1, opt.validation_samples / std::max(1, nc));
    for (int ci = 0; ci < nc; ++ci) {
        const Chart& c = atlas->charts[ci];
        for (int sidx = 0; sidx < per_chart; ++sidx) {
            Vec b(n), f(m);
            for (int d = 0; d < n; ++d) b[d] = rng.uniform(c.u_lo[d], c.u_hi[d]);
            for (int d = 0; d < m; ++d) f[d] = rng.uniform(flo[d], fhi[d]);
            double s = part.weight_sum(c.id, b, f);
            diag.min_weight_sum = std::min(diag.min_weight_sum, s);
            if (s <= 1e-12) {
                diag.gap_count += 1;
                std::ostringstream os;
                os << "partition gap: sum mu = " << s << " at b = " << b.transpose()
                   << ", f = " << f.transpose() << " (chart " << c.id << ")";
                throw PartitionGap(os.str());
            }
            double lam_sum = 0.0;
            for (int j = 0; j < nc; ++j) lam_sum += part.weight(j, c.id, b, f);
            diag.max_weight_sum_err =
                std::max(diag.max_weight_sum_err, std::abs(lam_sum - 1.0));
            diag.samples += 1;
        }
    }

    // subordination: lambda_i vanishes on every other chart's tubes
    for (const auto& tube : tubes->tubes) {
        const Chart& c = atlas->chart(tube.chart);
        int grid = std::max(2, static_cast<int>(std::round(
                                   std::pow(double(opt.tube_samples) /
                                                std::max<size_t>(1, tube.level_points.size()),
                                            1.0 / n))));
        std::vector<int> idx(n, 0);
        Vec b(n);
        while (true) {
            for (int d = 0; d < n; ++d)
                b[d] = c.u_lo[d] + (c.u_hi[d] - c.u_lo[d]) * idx[d] / double(grid - 1);
            for (const Vec& f : tube.level_points) {
                for (int i = 0; i < nc; ++i) {
                    if (atlas->charts[i].id == tube.chart) continue;
                    double w = part.weight(i, tube.chart, b, f);
                    diag.max_offtube_weight = std::max(diag.max_offtube_weight, w);
                }
            }
            int d = 0;
            while (d < n && ++idx[d] == grid) idx[d++] = 0;
            if (d == n) break;
        }
    }

    return {std::move(part), diag};
}

} // namespace ehlab
