#pragma once

#include <optional>
#include <vector>

#include "stcp/criterion.hpp"

namespace stcp {

struct SearchConfig {
    double epsilon_lambda = 0.1; // minimum segment fraction, in (0, 0.5]
    bool pruning = true;
    std::optional<double> k_override; // pruning constant override
    int max_penalty_iterations = 10;
    long long exact_budget = 50000; // admissible (t1, t2) segment pairs
    int n_threads = 1;              // candidate cost evaluations per endpoint

    int max_change_points() const { return static_cast<int>(1.0 / epsilon_lambda) + 1; }
    int min_segment_length(int t_total) const;
    void validate(int t_total, int lag_k) const;
};

// Pruning record: candidate t was discarded while processing endpoint s.
struct PeltDiagnostics {
    std::vector<std::pair<int, int>> pruned;
    int cost_evaluations = 0;
};

// Lemma-style pruning constant across the candidate model orders:
//   K = C * [ (d_min/2 - d_max) log(S T) + (2 + d_max) log 2
//             + xi*_min - 2 xi*_max - log T ],
// where xi*_j is the description length of order j's integer components.
double compute_pruning_K(const std::vector<ModelOrder>& models, int n_stations, int t_total,
                         double c_kn);

// Penalized segmentation by pruned dynamic programming. The log-m change
// count term is handled by re-running the linear-penalty recursion with an
// adaptively updated per-change penalty until the estimated change count
// repeats; the reported segmentation minimizes the exact criterion among all
// iterations visited.
Segmentation pelt_detect(const SegmentCostModel& model, const SearchConfig& cfg,
                         PeltDiagnostics* diagnostics = nullptr);

// Exact minimizer by full dynamic programming over (segment count, endpoint);
// cost O(S T^2) fits. Refuses with budget_error when the number of admissible
// segments exceeds cfg.exact_budget.
Segmentation exact_detect(const SegmentCostModel& model, const SearchConfig& cfg);

} // namespace stcp
