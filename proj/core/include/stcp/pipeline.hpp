#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "stcp/config.hpp"
#include "stcp/criterion.hpp"
#include "stcp/inference.hpp"
#include "stcp/search.hpp"

namespace stcp {

// Assembled detection run: the graph, the pooled likelihood context, and the
// cost model, ready for the segmentation search and for downstream inference.
struct DetectionContext {
    SpatialDomain domain;
    std::shared_ptr<CompositeLikelihood> likelihood;
    std::vector<ModelOrder> models;
    double c_kn = 0.0;
    double pruning_k = 0.0;
    std::shared_ptr<SegmentCostModel> cost_model;
    SearchConfig search;
};

DetectionContext make_context(Eigen::MatrixXd data, const SpatialDomain& domain,
                              const RunConfig& cfg, std::uint64_t seed, int threads,
                              Objective objective = Objective::Clmdl);

struct DetectionOutcome {
    Segmentation segmentation;
    bool exact_requested = false;
    bool fell_back_to_pelt = false; // exact refused by budget
};

// Runs the configured search ("pelt" or "exact"); an exact run over budget
// falls back to the pruned search and flags it.
DetectionOutcome run_search(const DetectionContext& ctx, const RunConfig& cfg);

struct CiReport {
    std::vector<ChangePointInterval> intervals;
    bool refit_at_lag1 = false;   // detection lag was not 1; segments refitted
    bool spatial_dominates = false; // S >= T, walk approximation degrades
};

// Confidence intervals for every change-point of a fitted segmentation.
// Requires lag-1 fits; when the context lag differs, segments are refitted at
// lag 1 with the same model orders.
CiReport run_ci(const Eigen::MatrixXd& data, const SpatialDomain& domain, const RunConfig& cfg,
                const Segmentation& seg, std::uint64_t seed, int threads);

} // namespace stcp
