#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ehlab/linalg.hpp"

namespace ehlab {

struct BaseSpace {
    enum class Topology { Box, Circle };
    int dim = 1;
    Topology topology = Topology::Box;
    Vec lo, hi; // bounded region of interest
};

struct FiberModel {
    enum class Topology { Euclidean, Circle };
    int dim = 1;
    Topology topology = Topology::Euclidean;
    std::function<double(const Vec&)> height;
    std::function<Vec(const Vec&)> height_grad;
    // properness certificate for euclidean fibers: height(f) >= alpha|f| - beta
    double alpha = 0.0, beta = 0.0;
    // points of h^{-1}(level), when closed-form (used by the tube sampler)
    std::function<std::vector<Vec>(double)> level_set;
};

// default height sqrt(1 + |f|^2): smooth, proper, positive, exact gradient
FiberModel default_euclidean_fiber(int dim);
FiberModel default_circle_fiber();

struct Chart {
    int id = 0;
    Vec u_lo, u_hi; // inner domain U, compact closure
    Vec v_lo, v_hi; // outer domain V, closure(U) strictly inside

    bool contains_u(const Vec& b, double margin = 1e-9) const;
    bool contains_v(const Vec& b, double margin = 1e-9) const;
    // smallest distance to the U-boundary, normalized by the box width per
    // axis; negative outside U
    double margin_u(const Vec& b) const;
};

struct TransitionMap {
    int from = 0, to = 0;
    std::function<Vec(const Vec& b, const Vec& f)> map;
    // optional analytic Jacobians; central differences otherwise
    std::function<Mat(const Vec&, const Vec&)> d_b; // m x n
    std::function<Mat(const Vec&, const Vec&)> d_f; // m x m
    // optional analytic second derivatives of the map components:
    // d2_bb[k](r, c) = d^2 map_k / db_r db_c, and analogously for bf / ff.
    std::function<std::vector<Mat>(const Vec&, const Vec&)> d2_bb;
    std::function<std::vector<Mat>(const Vec&, const Vec&)> d2_bf; // rows b, cols f
    std::function<std::vector<Mat>(const Vec&, const Vec&)> d2_ff;
};

struct BundlePoint {
    int chart = 0;
    Vec b;
    Vec f;
};

struct BundleAtlas {
    BaseSpace base;
    FiberModel fiber;
    std::vector<Chart> charts;
    std::map<std::pair<int, int>, TransitionMap> transitions; // key (from, to)

    const Chart& chart(int id) const;
    bool has_transition(int from, int to) const;
    const TransitionMap& transition(int from, int to) const;
    // charts whose U contains b
    std::vector<int> charts_containing(const Vec& b) const;
};

using AtlasPtr = std::shared_ptr<const BundleAtlas>;

// Jacobians of a transition, analytic when supplied, else central
// differences with step 1e-5 * max(1, |coord|).
Mat transition_db(const TransitionMap& t, const Vec& b, const Vec& f);
Mat transition_df(const TransitionMap& t, const Vec& b, const Vec& f);
// second derivatives (finite differences of the Jacobians when absent)
std::vector<Mat> transition_d2bb(const TransitionMap& t, const Vec& b, const Vec& f);
std::vector<Mat> transition_d2bf(const TransitionMap& t, const Vec& b, const Vec& f);
std::vector<Mat> transition_d2ff(const TransitionMap& t, const Vec& b, const Vec& f);

BundlePoint change_chart(const BundleAtlas& atlas, const BundlePoint& pt, int target);
double height_of(const BundleAtlas& atlas, const BundlePoint& pt);

struct AtlasReport {
    double max_cocycle_residual = 0.0;
    double max_identity_residual = 0.0;
    double min_det_df = 0.0;
    int cover_gap_count = 0;
    std::vector<Vec> cover_gap_examples;
    int samples = 0;
    bool ok(double tol = 1e-9) const {
        return max_cocycle_residual <= tol && max_identity_residual <= tol &&
               min_det_df > 0.0 && cover_gap_count == 0;
    }
};

AtlasReport validate_atlas(const BundleAtlas& atlas, int samples, std::uint64_t seed = 0);

} // namespace ehlab
