#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <unordered_map>
#include <vector>

#include "stcp/likelihood.hpp"

namespace stcp {

// Which objective the per-segment cost and the total realize: the full
// description-length criterion, or the bare negative composite likelihood
// (used as a contrast in experiments).
enum class Objective {
    Clmdl,
    CompositeOnly,
};

struct SegmentCost {
    int t1 = 0;
    int t2 = 0;
    std::size_t model_index = 0; // winner among the candidate orders
    FitResult fit;
    double cost = 0.0;
};

struct SegmentSummary {
    int t1 = 0;
    int t2 = 0;
    ModelOrder order;
    Eigen::VectorXd theta;
    double loglik = 0.0;
    double cost = 0.0;
    bool converged = false;
};

struct Segmentation {
    int m = 0;
    std::vector<int> change_points; // boundary row indices, 0 < tau < T
    std::vector<double> lambdas;    // tau / T
    std::vector<SegmentSummary> segments;
    double total = 0.0; // criterion value of the whole segmentation
    bool penalty_iteration_converged = true;
    int penalty_iterations = 0;
};

// Memoizes the expensive per-segment model fits, keyed by segment bounds.
// Reads are concurrent; insertion is exclusive and first-writer-wins (fits
// are deterministic, so duplicates are identical).
class FitCache {
public:
    std::optional<std::vector<FitResult>> find(int t1, int t2) const;
    const std::vector<FitResult>& insert(int t1, int t2, std::vector<FitResult> fits);
    std::size_t size() const;

private:
    static std::uint64_t key(int t1, int t2) {
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(t1)) << 32) |
               static_cast<std::uint32_t>(t2);
    }
    mutable std::mutex mutex_;
    std::unordered_map<std::uint64_t, std::vector<FitResult>> map_;
};

// Per-segment cost of the criterion: fits every candidate model order on the
// segment and keeps the best penalized value,
//   cost = C * [sum log xi + (d/2 + 1) log(t2 - t1) + (d/2) log S] - loglik
// (penalty omitted under Objective::CompositeOnly).
class SegmentCostModel {
public:
    SegmentCostModel(const CompositeLikelihood& lik, std::vector<ModelOrder> models,
                     OptimizerConfig opt, double c_kn, std::uint64_t seed,
                     Objective objective = Objective::Clmdl,
                     std::shared_ptr<FitCache> cache = nullptr);

    SegmentCost cost(int t1, int t2) const;
    double model_penalty(std::size_t model_index, int seg_len) const;
    // Per-change-point penalty term of the total: C log m, 0 at m = 0.
    double change_penalty(int m) const;

    const CompositeLikelihood& likelihood() const { return *lik_; }
    const std::vector<ModelOrder>& models() const { return models_; }
    const OptimizerConfig& optimizer() const { return opt_; }
    double c_kn() const { return c_kn_; }
    Objective objective() const { return objective_; }
    std::uint64_t seed() const { return seed_; }
    std::shared_ptr<FitCache> cache() const { return cache_; }

    // Criterion value of a full segmentation given its boundary rows.
    double total_for(const std::vector<int>& change_points) const;

private:
    const CompositeLikelihood* lik_;
    std::vector<ModelOrder> models_;
    OptimizerConfig opt_;
    double c_kn_;
    std::uint64_t seed_;
    Objective objective_;
    std::shared_ptr<FitCache> cache_;
};

// Criterion value of an assembled segmentation: sum of segment costs plus the
// change-count term.
double clmdl_total(const Segmentation& seg, double c_kn,
                   Objective objective = Objective::Clmdl);

} // namespace stcp
