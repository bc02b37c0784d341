#include "stcp/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "stcp/errors.hpp"
#include "stcp/threading.hpp"

namespace stcp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// Preference among equal-total segmentations: earlier change-points first,
// which also ranks a prefix (fewer change-points) ahead of its extensions.
bool lex_before(const std::vector<int>& a, const std::vector<int>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

Segmentation assemble(const SegmentCostModel& model, const std::vector<int>& cps) {
    Segmentation seg;
    seg.m = static_cast<int>(cps.size());
    seg.change_points = cps;
    const int T = model.likelihood().t_total();
    for (int tau : cps) {
        seg.lambdas.push_back(static_cast<double>(tau) / static_cast<double>(T));
    }
    int prev = 0;
    for (std::size_t j = 0; j <= cps.size(); ++j) {
        const int end = (j < cps.size()) ? cps[j] : T;
        const SegmentCost sc = model.cost(prev, end);
        SegmentSummary summary;
        summary.t1 = prev;
        summary.t2 = end;
        summary.order = model.models()[sc.model_index];
        summary.theta = sc.fit.theta;
        summary.loglik = sc.fit.loglik;
        summary.cost = sc.cost;
        summary.converged = sc.fit.converged;
        seg.segments.push_back(std::move(summary));
        prev = end;
    }
    seg.total = model.change_penalty(seg.m);
    for (const auto& s : seg.segments) seg.total += s.cost;
    return seg;
}

// One optimal-partitioning sweep with a constant per-change penalty beta.
std::vector<int> pelt_pass(const SegmentCostModel& model, const SearchConfig& cfg, double beta,
                           double pruning_k, PeltDiagnostics* diagnostics) {
    const int T = model.likelihood().t_total();
    const int L = cfg.min_segment_length(T);

    std::vector<double> F(static_cast<std::size_t>(T) + 1, kInf);
    std::vector<int> prev(static_cast<std::size_t>(T) + 1, -1);
    F[0] = -beta;
    std::vector<int> candidates{0};

    std::vector<double> seg_costs;
    for (int s = L; s <= T; ++s) {
        std::vector<int> usable;
        for (int t : candidates) {
            if (t <= s - L) usable.push_back(t);
        }
        seg_costs.assign(usable.size(), 0.0);
        parallel_for(usable.size(), cfg.n_threads, [&](std::size_t i) {
            seg_costs[i] = model.cost(usable[i], s).cost;
        });
        if (diagnostics) diagnostics->cost_evaluations += static_cast<int>(usable.size());

        double best = kInf;
        int best_t = -1;
        for (std::size_t i = 0; i < usable.size(); ++i) {
            const double total = F[static_cast<std::size_t>(usable[i])] + seg_costs[i] + beta;
            if (total < best) { // strict: ties keep the earliest change-point
                best = total;
                best_t = usable[i];
            }
        }
        F[static_cast<std::size_t>(s)] = best;
        prev[static_cast<std::size_t>(s)] = best_t;

        if (cfg.pruning && std::isfinite(best)) {
            std::vector<int> kept;
            kept.reserve(candidates.size());
            for (int t : candidates) {
                const auto it = std::find(usable.begin(), usable.end(), t);
                if (it == usable.end()) {
                    kept.push_back(t); // not evaluable yet, cannot be pruned here
                    continue;
                }
                const double lhs = F[static_cast<std::size_t>(t)] +
                                   seg_costs[static_cast<std::size_t>(it - usable.begin())] +
                                   pruning_k;
                if (lhs < best) {
                    kept.push_back(t);
                } else if (diagnostics) {
                    diagnostics->pruned.emplace_back(t, s);
                }
            }
            candidates = std::move(kept);
        }
        if (s >= L && s <= T - L) candidates.push_back(s);
    }

    std::vector<int> cps;
    int at = T;
    while (at > 0) {
        const int p = prev[static_cast<std::size_t>(at)];
        if (p < 0) throw numeric_error("segmentation backtrack failed: no finite path");
        if (p > 0) cps.push_back(p);
        at = p;
    }
    std::reverse(cps.begin(), cps.end());
    return cps;
}

} // namespace

int SearchConfig::min_segment_length(int t_total) const {
    return static_cast<int>(std::ceil(static_cast<double>(t_total) * epsilon_lambda));
}

void SearchConfig::validate(int t_total, int lag_k) const {
    if (!(epsilon_lambda > 0.0 && epsilon_lambda <= 0.5)) {
        throw config_error("epsilon_lambda must lie in (0, 0.5]");
    }
    const int L = min_segment_length(t_total);
    if (L < lag_k + 1) {
        throw config_error("minimum segment length " + std::to_string(L) +
                           " is below k + 1 = " + std::to_string(lag_k + 1));
    }
    if (2 * L > t_total) {
        throw config_error("series of length " + std::to_string(t_total) +
                           " cannot hold two segments of minimum length " + std::to_string(L));
    }
}

double compute_pruning_K(const std::vector<ModelOrder>& models, int n_stations, int t_total,
                         double c_kn) {
    if (models.empty()) throw config_error("pruning constant requires a non-empty model list");
    double d_min = kInf, d_max = -kInf, xs_min = kInf, xs_max = -kInf;
    for (const auto& m : models) {
        const double d = static_cast<double>(m.param_dim());
        const double xs = m.code_length();
        d_min = std::min(d_min, d);
        d_max = std::max(d_max, d);
        xs_min = std::min(xs_min, xs);
        xs_max = std::max(xs_max, xs);
    }
    const double log_st =
        std::log(static_cast<double>(n_stations) * static_cast<double>(t_total));
    return c_kn * ((d_min / 2.0 - d_max) * log_st + (2.0 + d_max) * std::log(2.0) + xs_min -
                   2.0 * xs_max - std::log(static_cast<double>(t_total)));
}

Segmentation pelt_detect(const SegmentCostModel& model, const SearchConfig& cfg,
                         PeltDiagnostics* diagnostics) {
    const int T = model.likelihood().t_total();
    cfg.validate(T, model.likelihood().pair_config().lag_k);

    if (model.objective() == Objective::CompositeOnly) {
        // f(m) = 0: a single sweep with zero per-change penalty. The lemma
        // constant is not valid for the bare likelihood, so pruning needs an
        // explicit override.
        const double k = cfg.k_override.value_or(0.0);
        SearchConfig pass_cfg = cfg;
        pass_cfg.pruning = cfg.pruning && cfg.k_override.has_value();
        auto cps = pelt_pass(model, pass_cfg, 0.0, k, diagnostics);
        Segmentation seg = assemble(model, cps);
        seg.penalty_iterations = 1;
        seg.penalty_iteration_converged = true;
        return seg;
    }

    const double c = model.c_kn();
    const double pruning_k = cfg.k_override.value_or(compute_pruning_K(
        model.models(), model.likelihood().n_stations(), T, c));

    double beta = c * std::log(2.0);
    std::vector<std::vector<int>> visited;
    std::set<int> seen_m;
    bool converged = false;
    int iterations = 0;
    for (int r = 0; r < std::max(1, cfg.max_penalty_iterations); ++r) {
        ++iterations;
        auto cps = pelt_pass(model, cfg, beta, pruning_k, diagnostics);
        if (std::find(visited.begin(), visited.end(), cps) == visited.end()) {
            visited.push_back(cps);
        }
        const int m = static_cast<int>(cps.size());
        if (seen_m.count(m)) {
            converged = true;
            break;
        }
        seen_m.insert(m);
        // Marginal description-length increment of one more change-point.
        beta = c * (std::log(static_cast<double>(m + 1)) -
                    std::log(static_cast<double>(std::max(m, 1))));
    }

    const std::vector<int>* best = nullptr;
    double best_total = kInf;
    for (const auto& cps : visited) {
        const double total = model.total_for(cps);
        if (total < best_total || (total == best_total && best && lex_before(cps, *best))) {
            best_total = total;
            best = &cps;
        }
    }
    Segmentation seg = assemble(model, *best);
    seg.penalty_iterations = iterations;
    seg.penalty_iteration_converged = converged;
    return seg;
}

Segmentation exact_detect(const SegmentCostModel& model, const SearchConfig& cfg) {
    const int T = model.likelihood().t_total();
    cfg.validate(T, model.likelihood().pair_config().lag_k);
    const int L = cfg.min_segment_length(T);

    // Admissible segments (t, s]: t in {0} or [L, T-L], s in [L, T-L] or T,
    // s - t >= L.
    auto valid_start = [&](int t) { return t == 0 || (t >= L && t <= T - L); };
    auto valid_end = [&](int s) { return s == T || (s >= L && s <= T - L); };
    long long admissible = 0;
    for (int t = 0; t <= T - L; ++t) {
        if (!valid_start(t)) continue;
        for (int s = t + L; s <= T; ++s) {
            if (valid_end(s)) ++admissible;
        }
    }
    if (admissible > cfg.exact_budget) {
        throw budget_error("exact search needs " + std::to_string(admissible) +
                           " admissible segments, over the budget of " +
                           std::to_string(cfg.exact_budget));
    }

    const int max_segments =
        std::min(cfg.max_change_points() + 1, T / std::max(L, 1));
    // G[j][s]: best cost of covering [0, s) with exactly j segments.
    std::vector<std::vector<double>> G(
        static_cast<std::size_t>(max_segments) + 1,
        std::vector<double>(static_cast<std::size_t>(T) + 1, kInf));
    std::vector<std::vector<int>> back(
        static_cast<std::size_t>(max_segments) + 1,
        std::vector<int>(static_cast<std::size_t>(T) + 1, -1));

    for (int s = L; s <= T; ++s) {
        if (!valid_end(s)) continue;
        G[1][static_cast<std::size_t>(s)] = model.cost(0, s).cost;
        back[1][static_cast<std::size_t>(s)] = 0;
    }
    for (int j = 2; j <= max_segments; ++j) {
        for (int s = j * L; s <= T; ++s) {
            if (!valid_end(s)) continue;
            double best = kInf;
            int best_t = -1;
            for (int t = (j - 1) * L; t + L <= s; ++t) {
                if (!valid_start(t) || t > T - L) continue;
                const double g = G[static_cast<std::size_t>(j) - 1][static_cast<std::size_t>(t)];
                if (!std::isfinite(g)) continue;
                const double total = g + model.cost(t, s).cost;
                if (total < best) {
                    best = total;
                    best_t = t;
                }
            }
            G[static_cast<std::size_t>(j)][static_cast<std::size_t>(s)] = best;
            back[static_cast<std::size_t>(j)][static_cast<std::size_t>(s)] = best_t;
        }
    }

    double best_total = kInf;
    std::vector<int> best_cps;
    bool have = false;
    for (int j = 1; j <= max_segments; ++j) {
        const double g = G[static_cast<std::size_t>(j)][static_cast<std::size_t>(T)];
        if (!std::isfinite(g)) continue;
        const double total = g + model.change_penalty(j - 1);
        if (total < best_total ||
            (have && total == best_total &&
             [&] {
                 std::vector<int> cps;
                 int at = T;
                 for (int jj = j; jj >= 1; --jj) {
                     const int p = back[static_cast<std::size_t>(jj)][static_cast<std::size_t>(at)];
                     if (p > 0) cps.push_back(p);
                     at = p;
                 }
                 std::reverse(cps.begin(), cps.end());
                 return lex_before(cps, best_cps);
             }())) {
            best_total = total;
            best_cps.clear();
            int at = T;
            for (int jj = j; jj >= 1; --jj) {
                const int p = back[static_cast<std::size_t>(jj)][static_cast<std::size_t>(at)];
                if (p > 0) best_cps.push_back(p);
                at = p;
            }
            std::reverse(best_cps.begin(), best_cps.end());
            have = true;
        }
    }
    if (!have) throw numeric_error("exact search found no feasible segmentation");
    Segmentation seg = assemble(model, best_cps);
    seg.penalty_iterations = 1;
    seg.penalty_iteration_converged = true;
    return seg;
}

} // namespace stcp
