#include "ehlab/construct.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ehlab/errors.hpp"

namespace ehlab {

CompleteConnection build_complete_connection(AtlasPtr atlas, int rounds,
                                             const ConstructOptions& opt) {
    auto tubes = std::make_shared<TubeFamily>(
        build_tube_family(*atlas, rounds, opt.sampler));

    ConstructRecord rec;
    rec.tubes = tubes;
    rec.separation = tube_separation(*atlas, *tubes);
    if (!(rec.separation.min_distance > 0.0))
        throw SeparationViolation("tube closures are not separated");
    rec.covered_height = covered_height(*atlas, *tubes);

    auto [part, pdiag] = build_partition(atlas, tubes, opt.partition);
    rec.partition = pdiag;
    auto part_ptr = std::make_shared<const PartitionOfUnity>(std::move(part));

    std::vector<Connection> summands;
    summands.reserve(atlas->charts.size());
    for (const auto& c : atlas->charts)
        summands.push_back(chart_induced_connection(atlas, c.id));

    BlendOptions bopt;
    bopt.seed = opt.partition.seed;
    // weight-sum sampling happens inside build_partition against the covered
    // window; the blend revalidates on a small fiber box
    bopt.validation_samples = 50;
    bopt.fiber_range = 1.0;
    Connection blended = blend(summands, part_ptr->fields(), bopt);

    // agreement on tubes: where lambda_i = 1 the blend must return the chart
    // connection's coefficient (identically zero in its own chart)
    const int n = atlas->base.dim;
    for (const auto& tube : tubes->tubes) {
        const Chart& c = atlas->chart(tube.chart);
        int grid = std::max(2, static_cast<int>(std::round(std::pow(
                                   double(opt.agreement_samples) /
                                       std::max<size_t>(1, tube.level_points.size()),
                                   1.0 / n))));
        std::vector<int> idx(n, 0);
        Vec b(n);
        while (true) {
            for (int d = 0; d < n; ++d)
                b[d] = c.u_lo[d] + (c.u_hi[d] - c.u_lo[d]) * idx[d] / double(grid - 1);
            for (const Vec& f : tube.level_points) {
                double res = blended.coeff(tube.chart, b, f).lpNorm<Eigen::Infinity>();
                rec.max_agreement_residual = std::max(rec.max_agreement_residual, res);
                if (res > opt.agreement_tol) {
                    std::ostringstream os;
                    os << "blend disagrees with the chart connection on tube (chart "
                       << tube.chart << ", radius " << tube.radius
                       << "): residual " << res;
                    throw AgreementViolation(os.str());
                }
            }
            int d = 0;
            while (d < n && ++idx[d] == grid) idx[d++] = 0;
            if (d == n) break;
        }
    }

    return {std::move(blended), part_ptr, std::move(rec)};
}

DisconnectVerdict check_disconnecting(const Connection& conn, const SectionFamily& fam,
                                      double tol_h, double window_lo, double window_hi,
                                      int grid) {
    if (conn.atlas->fiber.dim != 1)
        throw ValidationError("disconnecting check supports fiber dimension 1 only");
    DisconnectVerdict v;
    v.window_lo = window_lo;
    v.window_hi = window_hi;
    if (fam.sections.empty()) return v;

    const int n = static_cast<int>(fam.b_lo.size());
    v.min_level = std::numeric_limits<double>::infinity();
    v.max_level = -std::numeric_limits<double>::infinity();
    for (const auto& sec : fam.sections) {
        v.min_level = std::min(v.min_level, sec.level);
        v.max_level = std::max(v.max_level, sec.level);
        std::vector<int> idx(n, 0);
        Vec b(n);
        while (true) {
            for (int d = 0; d < n; ++d)
                b[d] = fam.b_lo[d] +
                       (fam.b_hi[d] - fam.b_lo[d]) * idx[d] / double(grid - 1);
            Vec f = sec.fiber(b);
            Mat df = sec.fiber_d(b);
            Mat g = coeff_in_chart(conn, fam.chart, b, f);
            v.max_horizontal_residual = std::max(
                v.max_horizontal_residual, (df - g).lpNorm<Eigen::Infinity>());
            int d = 0;
            while (d < n && ++idx[d] == grid) idx[d++] = 0;
            if (d == n) break;
        }
    }
    v.horizontal = v.max_horizontal_residual <= tol_h;
    v.disconnecting = v.min_level <= window_lo && v.max_level >= window_hi;
    return v;
}

} // namespace ehlab
