#include "stcp/criterion.hpp"

#include <cmath>

#include "stcp/errors.hpp"
#include "stcp/rng.hpp"

namespace stcp {

std::optional<std::vector<FitResult>> FitCache::find(int t1, int t2) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = map_.find(key(t1, t2));
    if (it == map_.end()) return std::nullopt;
    return it->second;
}

const std::vector<FitResult>& FitCache::insert(int t1, int t2, std::vector<FitResult> fits) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto [it, inserted] = map_.try_emplace(key(t1, t2), std::move(fits));
    return it->second;
}

std::size_t FitCache::size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return map_.size();
}

SegmentCostModel::SegmentCostModel(const CompositeLikelihood& lik, std::vector<ModelOrder> models,
                                   OptimizerConfig opt, double c_kn, std::uint64_t seed,
                                   Objective objective, std::shared_ptr<FitCache> cache)
    : lik_(&lik), models_(std::move(models)), opt_(opt), c_kn_(c_kn), seed_(seed),
      objective_(objective), cache_(std::move(cache)) {
    if (models_.empty()) throw config_error("candidate model list is empty");
    if (!cache_) cache_ = std::make_shared<FitCache>();
}

double SegmentCostModel::model_penalty(std::size_t model_index, int seg_len) const {
    if (objective_ == Objective::CompositeOnly) return 0.0;
    const ModelOrder& order = models_[model_index];
    const double d = static_cast<double>(order.param_dim());
    return c_kn_ * (order.code_length() + (d / 2.0 + 1.0) * std::log(static_cast<double>(seg_len)) +
                    d / 2.0 * std::log(static_cast<double>(lik_->n_stations())));
}

double SegmentCostModel::change_penalty(int m) const {
    if (objective_ == Objective::CompositeOnly || m <= 0) return 0.0;
    return c_kn_ * std::log(static_cast<double>(m));
}

SegmentCost SegmentCostModel::cost(int t1, int t2) const {
    std::vector<FitResult> fits;
    if (auto cached = cache_->find(t1, t2)) {
        fits = std::move(*cached);
    } else {
        fits.reserve(models_.size());
        for (std::size_t mi = 0; mi < models_.size(); ++mi) {
            const std::uint64_t fit_seed =
                mix_seed(seed_, static_cast<std::uint64_t>(t1),
                         static_cast<std::uint64_t>(t2), static_cast<std::uint64_t>(mi));
            fits.push_back(lik_->fit(t1, t2, models_[mi], opt_, fit_seed));
        }
        fits = cache_->insert(t1, t2, std::move(fits));
    }

    SegmentCost best;
    best.t1 = t1;
    best.t2 = t2;
    double best_cost = std::numeric_limits<double>::infinity();
    for (std::size_t mi = 0; mi < models_.size(); ++mi) {
        const double c = model_penalty(mi, t2 - t1) - fits[mi].loglik;
        if (c < best_cost) {
            best_cost = c;
            best.model_index = mi;
            best.fit = fits[mi];
        }
    }
    if (!std::isfinite(best_cost)) {
        throw fit_error("no candidate model produced a finite cost on segment [" +
                        std::to_string(t1) + ", " + std::to_string(t2) + ")");
    }
    best.cost = best_cost;
    return best;
}

double SegmentCostModel::total_for(const std::vector<int>& change_points) const {
    double total = change_penalty(static_cast<int>(change_points.size()));
    int prev = 0;
    for (int tau : change_points) {
        total += cost(prev, tau).cost;
        prev = tau;
    }
    total += cost(prev, lik_->t_total()).cost;
    return total;
}

double clmdl_total(const Segmentation& seg, double c_kn, Objective objective) {
    double total = 0.0;
    if (objective == Objective::Clmdl && seg.m > 0) {
        total += c_kn * std::log(static_cast<double>(seg.m));
    }
    for (const auto& s : seg.segments) total += s.cost;
    return total;
}

} // namespace stcp
