#include "stcp/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "stcp/errors.hpp"
#include "stcp/rng.hpp"

namespace stcp {

DetectionContext make_context(Eigen::MatrixXd data, const SpatialDomain& domain,
                              const RunConfig& cfg, std::uint64_t seed, int threads,
                              Objective objective) {
    const int lag_k = cfg.get_int("pairs.k");
    if (lag_k < 1) throw config_error("pairs.k must be >= 1 for change-point detection");
    const double cutoff = cfg.get_double("pairs.cutoff");

    DetectionContext ctx{domain, nullptr, {}, 0.0, 0.0, nullptr, {}};
    PairConfig pair_cfg{lag_k, build_neighbors(domain, cutoff)};
    const int t_total = static_cast<int>(data.rows());
    ctx.c_kn = normalizing_constant(t_total, pair_cfg);
    ctx.models = cfg.models();
    ctx.likelihood =
        std::make_shared<CompositeLikelihood>(std::move(data), std::move(pair_cfg));
    ctx.search = cfg.search(threads);
    ctx.pruning_k = ctx.search.k_override.value_or(
        compute_pruning_K(ctx.models, domain.size(), t_total, ctx.c_kn));
    ctx.cost_model = std::make_shared<SegmentCostModel>(*ctx.likelihood, ctx.models,
                                                        cfg.optimizer(), ctx.c_kn, seed,
                                                        objective);
    return ctx;
}

DetectionOutcome run_search(const DetectionContext& ctx, const RunConfig& cfg) {
    DetectionOutcome out;
    const std::string algo = cfg.get("search.algorithm");
    if (algo == "exact") {
        out.exact_requested = true;
        try {
            out.segmentation = exact_detect(*ctx.cost_model, ctx.search);
            return out;
        } catch (const budget_error&) {
            out.fell_back_to_pelt = true;
        }
    } else if (algo != "pelt") {
        throw config_error("search.algorithm must be 'pelt' or 'exact'");
    }
    out.segmentation = pelt_detect(*ctx.cost_model, ctx.search);
    return out;
}

CiReport run_ci(const Eigen::MatrixXd& data, const SpatialDomain& domain, const RunConfig& cfg,
                const Segmentation& seg, std::uint64_t seed, int threads) {
    CiReport report;
    const int t_total = static_cast<int>(data.rows());
    const int n_stations = static_cast<int>(data.cols());
    report.spatial_dominates = n_stations >= t_total;
    if (seg.m == 0) return report;

    const int detect_k = cfg.get_int("pairs.k");
    report.refit_at_lag1 = detect_k != 1;

    // The walk is a lag-1 construction; refit each segment at lag 1 when the
    // detection lag differs, keeping the selected model orders.
    std::vector<FittedModel> fitted;
    NeighborGraph graph = build_neighbors(domain, cfg.get_double("pairs.cutoff"));
    if (report.refit_at_lag1) {
        PairConfig cfg1{1, graph};
        CompositeLikelihood lik1(data, cfg1);
        const OptimizerConfig opt = cfg.optimizer();
        for (const auto& s : seg.segments) {
            const std::uint64_t fit_seed = mix_seed(seed, 0x5EF1u,
                                                    static_cast<std::uint64_t>(s.t1),
                                                    static_cast<std::uint64_t>(s.t2));
            const FitResult fr = lik1.fit(s.t1, s.t2, s.order, opt, fit_seed);
            fitted.push_back({s.order, fr.theta});
        }
    } else {
        for (const auto& s : seg.segments) fitted.push_back({s.order, s.theta});
    }

    const double level = cfg.get_double("ci.level");
    const int n_rep = cfg.get_int("ci.replicates");
    const long long dense_budget = cfg.get_int64("sim.dense_budget");
    const int q_cfg = cfg.get_int("ci.q_radius");
    const double eps = cfg.get_double("search.epsilon_lambda");
    const int default_q =
        2 * static_cast<int>(std::ceil(eps * static_cast<double>(t_total)));

    for (int j = 0; j < seg.m; ++j) {
        const int tau = seg.change_points[static_cast<std::size_t>(j)];
        const int gap_left = tau - (j > 0 ? seg.change_points[static_cast<std::size_t>(j) - 1] : 0);
        const int gap_right =
            (j + 1 < seg.m ? seg.change_points[static_cast<std::size_t>(j) + 1] : t_total) - tau;
        int q_radius = q_cfg > 0 ? q_cfg : default_q;
        q_radius = std::max(1, std::min({q_radius, gap_left - 1, gap_right - 1}));
        const std::uint64_t ci_seed = mix_seed(seed, 0xC1D0u, static_cast<std::uint64_t>(j));
        report.intervals.push_back(changepoint_ci(
            domain, graph, fitted[static_cast<std::size_t>(j)],
            fitted[static_cast<std::size_t>(j) + 1], tau, t_total, level, n_rep, q_radius,
            ci_seed, dense_budget, threads));
    }
    return report;
}

} // namespace stcp
