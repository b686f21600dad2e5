#include "ehlab/metric.hpp"

#include <cmath>

#include "ehlab/errors.hpp"

namespace ehlab {

std::vector<Mat> Metric::deriv(int chart, const Vec& x) const {
    if (dg) return dg(chart, x);
    std::vector<Mat> out;
    out.reserve(dim);
    Vec xp = x, xm = x;
    for (int k = 0; k < dim; ++k) {
        double h = 1e-5 * std::max(1.0, std::abs(x[k]));
        xp[k] = x[k] + h;
        xm[k] = x[k] - h;
        out.push_back((g(chart, xp) - g(chart, xm)) / (2.0 * h));
        xp[k] = x[k];
        xm[k] = x[k];
    }
    return out;
}

double metric_eval(const Metric& m, int chart, const Vec& x, const Vec& v,
                   const Vec& w) {
    if (!m.contains(chart, x)) throw OutOfDomain("metric evaluated outside its domain");
    return v.dot(m.g(chart, x) * w);
}

double metric_norm(const Metric& m, int chart, const Vec& x, const Vec& v) {
    return std::sqrt(metric_eval(m, chart, x, v, v));
}

FiberedMetric flat_fibered_metric(AtlasPtr atlas, Connection conn) {
    FiberedMetric fm;
    fm.atlas = atlas;
    fm.conn = std::move(conn);
    const int n = atlas->base.dim, m = atlas->fiber.dim;
    fm.g_v = [m](int, const Vec&, const Vec&) { return Mat::Identity(m, m); };
    fm.g_b = [n](int, const Vec&) { return Mat::Identity(n, n); };
    fm.g_v_deriv = [n, m](int, const Vec&, const Vec&, std::vector<Mat>& db,
                          std::vector<Mat>& df) {
        db.assign(n, Mat::Zero(m, m));
        df.assign(m, Mat::Zero(m, m));
    };
    fm.g_b_deriv = [n](int, const Vec&) {
        return std::vector<Mat>(n, Mat::Zero(n, n));
    };
    return fm;
}

Metric total_metric(const FiberedMetric& fm) {
    const int n = fm.atlas->base.dim, m = fm.atlas->fiber.dim;
    Metric out;
    out.atlas = fm.atlas;
    out.dim = n + m;
    out.base_dim = n;
    FiberedMetric f = fm;
    out.g = [f, n, m](int chart, const Vec& x) {
        Vec b = x.head(n), fc = x.tail(m);
        Mat G = coeff_in_chart(f.conn, chart, b, fc);
        Mat gv = f.g_v(chart, b, fc);
        Mat gb = f.g_b(chart, b);
        Mat GtV = G.transpose() * gv;
        Mat total(n + m, n + m);
        total.topLeftCorner(n, n) = gb + GtV * G;
        total.topRightCorner(n, m) = -GtV;
        total.bottomLeftCorner(m, n) = -gv * G;
        total.bottomRightCorner(m, m) = gv;
        return total;
    };
    out.dg = [f, n, m](int chart, const Vec& x) {
        Vec b = x.head(n), fc = x.tail(m);
        Mat G = coeff_in_chart(f.conn, chart, b, fc);
        CoeffDeriv dG = coeff_deriv_in_chart(f.conn, chart, b, fc);
        Mat gv = f.g_v(chart, b, fc);

        std::vector<Mat> dgv_b, dgv_f, dgb;
        if (f.g_v_deriv) {
            f.g_v_deriv(chart, b, fc, dgv_b, dgv_f);
        } else {
            Vec bp = b, bm = b, fp = fc, fmv = fc;
            for (int k = 0; k < n; ++k) {
                double h = 1e-5 * std::max(1.0, std::abs(b[k]));
                bp[k] += h;
                bm[k] -= h;
                dgv_b.push_back((f.g_v(chart, bp, fc) - f.g_v(chart, bm, fc)) /
                                (2.0 * h));
                bp[k] = b[k];
                bm[k] = b[k];
            }
            for (int k = 0; k < m; ++k) {
                double h = 1e-5 * std::max(1.0, std::abs(fc[k]));
                fp[k] += h;
                fmv[k] -= h;
                dgv_f.push_back((f.g_v(chart, b, fp) - f.g_v(chart, b, fmv)) /
                                (2.0 * h));
                fp[k] = fc[k];
                fmv[k] = fc[k];
            }
        }
        if (f.g_b_deriv) {
            dgb = f.g_b_deriv(chart, b);
        } else {
            Vec bp = b, bm = b;
            for (int k = 0; k < n; ++k) {
                double h = 1e-5 * std::max(1.0, std::abs(b[k]));
                bp[k] += h;
                bm[k] -= h;
                dgb.push_back((f.g_b(chart, bp) - f.g_b(chart, bm)) / (2.0 * h));
                bp[k] = b[k];
                bm[k] = b[k];
            }
        }

        std::vector<Mat> out_d;
        out_d.reserve(n + m);
        for (int k = 0; k < n + m; ++k) {
            Mat dGk = k < n ? dG.db[k] : dG.df[k - n];
            Mat dgvk = k < n ? dgv_b[k] : dgv_f[k - n];
            Mat dgbk = k < n ? dgb[k] : Mat::Zero(n, n);
            Mat dGtV = dGk.transpose() * gv + G.transpose() * dgvk;
            Mat d(n + m, n + m);
            d.topLeftCorner(n, n) =
                dgbk + dGtV * G + (G.transpose() * gv) * dGk;
            d.topRightCorner(n, m) = -dGtV;
            d.bottomLeftCorner(m, n) = -(dgvk * G + gv * dGk);
            d.bottomRightCorner(m, m) = dgvk;
            out_d.push_back(d);
        }
        return out_d;
    };
    return out;
}

Mat induced_connection_coeff(const Metric& m, int chart, const Vec& x) {
    const int n = m.base_dim, k = m.dim - n;
    Mat G = m.g(chart, x);
    Mat gff = G.bottomRightCorner(k, k);
    Mat gfb = G.bottomLeftCorner(k, n);
    return -gff.llt().solve(gfb);
}

Mat SurfaceMetric::value(double x, double y) const {
    Mat g(2, 2);
    g(0, 0) = g11.v(x, y);
    g(0, 1) = g(1, 0) = g12.v(x, y);
    g(1, 1) = g22.v(x, y);
    return g;
}

double SurfaceMetric::slope(double x, double y) const {
    return -g12.v(x, y) / g22.v(x, y);
}

Metric surface_to_metric(const SurfaceMetric& sm) {
    Metric out;
    out.dim = 2;
    out.base_dim = 1;
    SurfaceMetric s = sm;
    out.g = [s](int, const Vec& x) { return s.value(x[0], x[1]); };
    out.dg = [s](int, const Vec& x) {
        std::vector<Mat> d(2, Mat(2, 2));
        d[0](0, 0) = s.g11.dx(x[0], x[1]);
        d[0](0, 1) = d[0](1, 0) = s.g12.dx(x[0], x[1]);
        d[0](1, 1) = s.g22.dx(x[0], x[1]);
        d[1](0, 0) = s.g11.dy(x[0], x[1]);
        d[1](0, 1) = d[1](1, 0) = s.g12.dy(x[0], x[1]);
        d[1](1, 1) = s.g22.dy(x[0], x[1]);
        return d;
    };
    if (sm.dom_lo.size() == 2) {
        Vec lo = sm.dom_lo, hi = sm.dom_hi;
        out.in_domain = [lo, hi](int, const Vec& x) {
            for (int d = 0; d < 2; ++d)
                if (x[d] <= lo[d] || x[d] >= hi[d]) return false;
            return true;
        };
    }
    return out;
}

SurfaceMetric w_recipe(const SurfaceMetric& sm) {
    SurfaceMetric out = sm; // keeps g12, g22 and the domain
    SurfaceComponent g12 = sm.g12, g22 = sm.g22;
    out.g11.v = [g12, g22](double x, double y) {
        double a = g12.v(x, y);
        return 1.0 + a * a / g22.v(x, y);
    };
    out.g11.dx = [g12, g22](double x, double y) {
        double a = g12.v(x, y), c = g22.v(x, y);
        return (2.0 * a * c * g12.dx(x, y) - a * a * g22.dx(x, y)) / (c * c);
    };
    out.g11.dy = [g12, g22](double x, double y) {
        double a = g12.v(x, y), c = g22.v(x, y);
        return (2.0 * a * c * g12.dy(x, y) - a * a * g22.dy(x, y)) / (c * c);
    };
    return out;
}

} // namespace ehlab
