#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "ehlab/connection.hpp"
#include "ehlab/tubes.hpp"

namespace ehlab {

struct PartitionOptions {
    double collar_eps = 0.25; // height-collar width around each tube level
    int validation_samples = 10000;
    int tube_samples = 1000; // subordination samples per tube
    std::uint64_t seed = 0;
    // fiber sampling window for the validators; derived from the tube family
    // when empty
    Vec fiber_lo, fiber_hi;
};

// closed height interval [lo, hi]; thin barriers use lo == hi
struct HeightBand {
    double lo = 0.0, hi = 0.0;
};

// lambda_i = mu_i / sum_j mu_j with
//   mu_i(e) = beta_i(p(e)) * prod_{j != i} (1 - chi_j(e)),
// beta_i a base plateau bump (1 on closure U_i, 0 outside V_i) and chi_j the
// collar cutoff of chart j's height bands scoped by beta_j.
class PartitionOfUnity {
  public:
    PartitionOfUnity(AtlasPtr atlas, std::shared_ptr<const TubeFamily> tubes,
                     double collar_eps);
    // bands indexed by chart position in the atlas list
    PartitionOfUnity(AtlasPtr atlas, std::vector<std::vector<HeightBand>> bands,
                     double collar_eps);

    int count() const { return static_cast<int>(atlas_->charts.size()); }
    double collar_eps() const { return eps_; }
    const std::vector<std::vector<HeightBand>>& bands() const { return chart_bands_; }

    // weight of chart index i (position in atlas chart list) at a point
    // presented in `chart` coordinates
    double weight(int i, int chart, const Vec& b, const Vec& f) const;
    void weight_grad(int i, int chart, const Vec& b, const Vec& f, Vec& gb,
                     Vec& gf) const;

    // sum of the un-normalized mu_i; the PartitionGap guard checks this > 0
    double weight_sum(int chart, const Vec& b, const Vec& f) const;

    // base plateau bump of chart index i
    double base_bump(int i, const Vec& b) const;
    double base_bump_d(int i, const Vec& b, int axis) const;

    ScalarField field(int i) const;
    std::vector<ScalarField> fields() const;

  private:
    double mu(int i, int chart, const Vec& b, const Vec& f) const;
    void mu_grad(int i, int chart, const Vec& b, const Vec& f, double& val, Vec& gb,
                 Vec& gf) const;
    double chi(int j, int chart, const Vec& b, const Vec& f) const;
    void chi_grad(int j, int chart, const Vec& b, const Vec& f, double& val, Vec& gb,
                  Vec& gf) const;

    AtlasPtr atlas_;
    double eps_;
    std::vector<std::vector<HeightBand>> chart_bands_; // per chart index
};

struct PartitionDiagnostics {
    int samples = 0;
    double min_weight_sum = 0.0;      // min over samples of sum mu (pre-division)
    double max_weight_sum_err = 0.0;  // max |sum lambda - 1|
    double max_offtube_weight = 0.0;  // max lambda_i on tubes of other charts
    int gap_count = 0;
};

// Builds the partition and validates it: PartitionGap (with a witness in the
// message) if sum mu <= 1e-12 at any sampled point of the covered region.
std::pair<PartitionOfUnity, PartitionDiagnostics> build_partition(
    AtlasPtr atlas, std::shared_ptr<const TubeFamily> tubes,
    const PartitionOptions& opt = {});

} // namespace ehlab
