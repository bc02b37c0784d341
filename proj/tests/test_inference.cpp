#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "stcp/errors.hpp"
#include "stcp/inference.hpp"
#include "stcp/simulate.hpp"
#include "test_support.hpp"

using namespace stcp;
using test_support::vec3;

namespace {

ModelOrder m_zero() { return make_order(Family::SepExpAr, MeanKind::Zero); }

struct WalkSetup {
    SpatialDomain domain;
    NeighborGraph graph;
    FittedModel left;
    FittedModel right;
};

WalkSetup make_setup(int side, double dphi) {
    SpatialDomain domain = make_grid_domain(side, side);
    NeighborGraph graph = build_neighbors(domain, 2.0);
    FittedModel left{m_zero(), vec3(-0.5, 0.6, 1.0)};
    FittedModel right{m_zero(), vec3(-0.5 + dphi, 0.6, 1.0)};
    return {std::move(domain), std::move(graph), left, right};
}

// Walk recomputation from the factor definitions, independent of the
// incremental implementation. Shares only the simulated blocks.
double recompute_walk(const WalkSetup& su, const Eigen::MatrixXd& bl, const Eigen::MatrixXd& br,
                      int q, int q_radius) {
    const auto& g = su.graph;
    auto marg = [&](const FittedModel& m, double x) {
        const double v = cov_value(m.order, m.theta, 0.0, 0);
        return -0.5 * std::log(2.0 * 3.14159265358979323846 * v) - 0.5 * x * x / v;
    };
    auto pairld = [&](const FittedModel& m, double h, int lag, double x1, double x2) {
        const double v = cov_value(m.order, m.theta, 0.0, 0);
        const double c = cov_value(m.order, m.theta, h, lag);
        return test_support::dense_pair_logpdf(0, 0, v, v, c, x1, x2);
    };
    auto seam = [&](const FittedModel& m, const Eigen::MatrixXd& a, int ra,
                    const Eigen::MatrixXd& b, int rb) {
        double total = 0.0;
        for (int s1 = 0; s1 < g.size(); ++s1) {
            total += pairld(m, 0.0, 1, a(ra, s1), b(rb, s1));
            for (std::size_t j = 0; j < g.neighbors[s1].size(); ++j) {
                total += pairld(m, g.neighbor_dist[s1][j], 1, a(ra, s1),
                                b(rb, g.neighbors[s1][j]));
            }
        }
        return total;
    };
    auto wmarg = [&](const FittedModel& m, const Eigen::MatrixXd& blk, int row) {
        double total = 0.0;
        for (int s = 0; s < g.size(); ++s) {
            total += (1.0 + g.degree(s)) * marg(m, blk(row, s));
        }
        return total;
    };
    auto lag0 = [&](const FittedModel& m, const Eigen::MatrixXd& blk, int row) {
        double total = 0.0;
        for (int s1 = 0; s1 < g.size(); ++s1) {
            for (std::size_t j = 0; j < g.neighbors[s1].size(); ++j) {
                total += pairld(m, g.neighbor_dist[s1][j], 0, blk(row, s1),
                                blk(row, g.neighbors[s1][j]));
            }
        }
        return total;
    };

    const int Q = q_radius;
    const double seam_marg = wmarg(su.left, bl, Q) + wmarg(su.right, br, 0);
    if (q == 0) return 0.0;
    if (q > 0) {
        const double a1 = wmarg(su.left, br, q - 1) + wmarg(su.right, br, q) -
                          seam(su.right, br, q - 1, br, q);
        const double a2 = seam(su.left, bl, Q, br, 0) - seam_marg;
        double a3 = 0.0;
        for (int t = 1; t <= q; ++t) {
            a3 += lag0(su.left, br, t - 1) - lag0(su.right, br, t - 1);
            if (t + 1 <= q) {
                a3 += seam(su.left, br, t - 1, br, t) - seam(su.right, br, t - 1, br, t);
            }
        }
        return a1 + a2 + a3;
    }
    const int row = Q + q;
    const double b1 = wmarg(su.left, bl, row) + wmarg(su.right, bl, row + 1) -
                      seam(su.left, bl, row, bl, row + 1);
    const double b2 = seam(su.right, bl, Q, br, 0) - seam_marg;
    double b3 = 0.0;
    for (int t = row; t <= Q; ++t) { // times T_j + q .. T_j
        b3 += lag0(su.right, bl, t) - lag0(su.left, bl, t);
        if (t + 1 <= Q) {
            b3 += seam(su.right, bl, t, bl, t + 1) - seam(su.left, bl, t, bl, t + 1);
        }
    }
    return b1 + b2 + b3;
}

} // namespace

TEST_CASE("walk anchor and identical-model cancellation") {
    WalkSetup su = make_setup(4, 0.2);
    const RandomWalkSample w = random_walk_path(su.domain, su.graph, su.left, su.right, 10, 42);
    CHECK(w.at(0) == 0.0);
    CHECK(static_cast<int>(w.values.size()) == 21);

    // Identical neighbor models: the density-ratio term vanishes, so the walk
    // reduces to the seam bookkeeping alone. Verified against recomputation
    // with the A3/B3 sums dropped entirely.
    WalkSetup same = make_setup(3, 0.0);
    const RandomWalkSample ws =
        random_walk_path(same.domain, same.graph, same.left, same.right, 6, 43);
    // Rebuild the blocks with the same derived streams as the implementation.
    SegmentSpec ls{7, same.left.order, same.left.theta};
    SegmentSpec rs{7, same.right.order, same.right.theta};
    Rng rl(mix_seed(43, 0xA001u)), rr(mix_seed(43, 0xB002u));
    const Eigen::MatrixXd bl = gen_segment(same.domain, ls, rl);
    const Eigen::MatrixXd br = gen_segment(same.domain, rs, rr);
    for (int q = -6; q <= 6; ++q) {
        const double direct = recompute_walk(same, bl, br, q, 6);
        CHECK(ws.at(q) == doctest::Approx(direct).epsilon(1e-10));
    }
}

TEST_CASE("walk increments match direct recomputation") {
    WalkSetup su = make_setup(4, 0.25);
    const int Q = 8;
    const std::uint64_t seed = 99;
    const RandomWalkSample w = random_walk_path(su.domain, su.graph, su.left, su.right, Q, seed);

    SegmentSpec ls{Q + 1, su.left.order, su.left.theta};
    SegmentSpec rs{Q + 1, su.right.order, su.right.theta};
    Rng rl(mix_seed(seed, 0xA001u)), rr(mix_seed(seed, 0xB002u));
    const Eigen::MatrixXd bl = gen_segment(su.domain, ls, rl);
    const Eigen::MatrixXd br = gen_segment(su.domain, rs, rr);
    for (int q = -Q; q <= Q; ++q) {
        const double direct = recompute_walk(su, bl, br, q, Q);
        CHECK(w.at(q) == doctest::Approx(direct).epsilon(1e-9));
    }
}

TEST_CASE("walk determinism and negative drift") {
    WalkSetup su = make_setup(5, 0.3);
    const RandomWalkSample a = random_walk_path(su.domain, su.graph, su.left, su.right, 12, 7);
    const RandomWalkSample b = random_walk_path(su.domain, su.graph, su.left, su.right, 12, 7);
    CHECK(a.values == b.values);
    CHECK(a.argmax == b.argmax);

    // The misassignment term pushes the walk down, on average, away from 0.
    double sum_far = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
        const RandomWalkSample w =
            random_walk_path(su.domain, su.graph, su.left, su.right, 12, 100 + rep);
        sum_far += w.at(12) + w.at(-12);
    }
    CHECK(sum_far < 0.0);
}

TEST_CASE("argmax concentrates at zero for distinct fitted models") {
    WalkSetup su = make_setup(10, 0.2);
    std::map<int, int> freq;
    const int reps = 60;
    for (int rep = 0; rep < reps; ++rep) {
        const RandomWalkSample w =
            random_walk_path(su.domain, su.graph, su.left, su.right, 15, 2024 + rep);
        freq[w.argmax] += 1;
    }
    int mode_q = 0, mode_n = 0;
    for (const auto& [q, n] : freq) {
        if (n > mode_n) {
            mode_q = q;
            mode_n = n;
        }
    }
    CHECK(mode_q == 0);
}

TEST_CASE("interval construction and degenerate flag") {
    WalkSetup su = make_setup(5, 0.25);
    const ChangePointInterval ci = changepoint_ci(su.domain, su.graph, su.left, su.right, 50, 100,
                                                  0.9, 40, 10, 61);
    CHECK(ci.q_lo <= 0);
    CHECK(ci.q_hi >= 0);
    CHECK(ci.tau_lo == 50 + ci.q_lo);
    CHECK(ci.tau_hi == 50 + ci.q_hi);
    CHECK(ci.lambda_lo == doctest::Approx(ci.tau_lo / 100.0));
    CHECK(!ci.degenerate);
    CHECK(static_cast<int>(ci.argmax_samples.size()) == 40);

    // Wider level nests the narrower one on the same replicates.
    const ChangePointInterval narrow = changepoint_ci(su.domain, su.graph, su.left, su.right, 50,
                                                      100, 0.5, 40, 10, 61);
    CHECK(narrow.q_lo >= ci.q_lo);
    CHECK(narrow.q_hi <= ci.q_hi);

    // Identical models are flagged non-informative.
    WalkSetup same = make_setup(4, 0.0);
    const ChangePointInterval flat = changepoint_ci(same.domain, same.graph, same.left,
                                                    same.right, 50, 100, 0.9, 20, 8, 62);
    CHECK(flat.degenerate);

    const ChangePointInterval a = changepoint_ci(su.domain, su.graph, su.left, su.right, 50, 100,
                                                 0.9, 30, 10, 63);
    const ChangePointInterval b = changepoint_ci(su.domain, su.graph, su.left, su.right, 50, 100,
                                                 0.9, 30, 10, 63);
    CHECK(a.argmax_samples == b.argmax_samples);

    CHECK_THROWS_AS(changepoint_ci(su.domain, su.graph, su.left, su.right, 50, 100, 1.5, 10, 10,
                                   64),
                    config_error);
}

TEST_CASE("interval width shrinks with the spatial dimension") {
    // Statistical check over replicates on nested grids.
    double width_small = 0.0, width_large = 0.0;
    for (int rep = 0; rep < 5; ++rep) {
        WalkSetup small = make_setup(5, 0.25);
        WalkSetup large = make_setup(9, 0.25);
        const ChangePointInterval ci_s = changepoint_ci(
            small.domain, small.graph, small.left, small.right, 50, 100, 0.9, 60, 12, 70 + rep);
        const ChangePointInterval ci_l = changepoint_ci(
            large.domain, large.graph, large.left, large.right, 50, 100, 0.9, 60, 12, 70 + rep);
        width_small += ci_s.q_hi - ci_s.q_lo;
        width_large += ci_l.q_hi - ci_l.q_lo;
    }
    CHECK(width_large <= width_small);
}

TEST_CASE("sandwich variance on the iid location toy") {
    // Empty neighborhoods and phi ~ 0 make the free-mean model an iid
    // location problem, where the asymptotic variance has a closed form and
    // the replicate variance of the estimator is a direct oracle.
    SpatialDomain domain = make_grid_domain(2, 2);
    NeighborGraph empty = build_neighbors(domain, 0.4);
    PairConfig cfg{1, empty};
    const ModelOrder order = make_order(Family::SepExpAr, MeanKind::Constant);
    Eigen::VectorXd truth(4);
    truth << 1.5, 0.0, 1.0, 1.0;
    const int seg_len = 60;

    // Monte Carlo oracle: distribution of the fitted mean over replicates.
    OptimizerConfig opt;
    std::vector<double> mu_hats;
    for (int rep = 0; rep < 200; ++rep) {
        Rng rng(4000 + static_cast<std::uint64_t>(rep));
        SegmentSpec spec{seg_len, order, truth};
        const Eigen::MatrixXd sim = gen_ar_spatial(domain, spec, rng);
        CompositeLikelihood lik(sim, cfg);
        mu_hats.push_back(lik.fit(0, seg_len, order, opt, 300 + rep).theta[0]);
    }
    double mean = 0.0;
    for (double m : mu_hats) mean += m;
    mean /= mu_hats.size();
    double var_mc = 0.0;
    for (double m : mu_hats) var_mc += (m - mean) * (m - mean);
    var_mc /= (mu_hats.size() - 1.0);

    Rng rng(4999);
    SegmentSpec spec{seg_len, order, truth};
    const Eigen::MatrixXd data = gen_ar_spatial(domain, spec, rng);
    CompositeLikelihood lik(data, cfg);
    const FitResult fit = lik.fit(0, seg_len, order, opt, 999);
    const SandwichVariance sv = param_variance(lik, domain, 0, seg_len, order, fit.theta, 200,
                                               777);
    CHECK(sv.sigma2.rows() == 4);
    CHECK((sv.sigma2 - sv.sigma2.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((sv.avar - sv.avar.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
    // Within 20% of the replicate variance of the location estimate.
    CHECK(sv.avar(0, 0) == doctest::Approx(var_mc).epsilon(0.20));
}

TEST_CASE("sandwich variance matches the empirical spread of the AR fit") {
    SpatialDomain domain = make_grid_domain(6, 6);
    NeighborGraph graph = build_neighbors(domain, 2.0);
    PairConfig cfg{1, graph};
    const ModelOrder order = m_zero();
    const Eigen::VectorXd truth = vec3(-0.5, 0.6, 1.0);
    const int seg_len = 100;
    OptimizerConfig opt;

    std::vector<double> phi_hats;
    for (int rep = 0; rep < 50; ++rep) {
        Rng rng(6000 + static_cast<std::uint64_t>(rep));
        SegmentSpec spec{seg_len, order, truth};
        const Eigen::MatrixXd sim = gen_ar_spatial(domain, spec, rng);
        CompositeLikelihood lik(sim, cfg);
        phi_hats.push_back(lik.fit(0, seg_len, order, opt, 400 + rep).theta[0]);
    }
    double mean = 0.0;
    for (double p : phi_hats) mean += p;
    mean /= phi_hats.size();
    double esd = 0.0;
    for (double p : phi_hats) esd += (p - mean) * (p - mean);
    esd = std::sqrt(esd / (phi_hats.size() - 1.0));

    Rng rng(6999);
    SegmentSpec spec{seg_len, order, truth};
    const Eigen::MatrixXd data = gen_ar_spatial(domain, spec, rng);
    CompositeLikelihood lik(data, cfg);
    const FitResult fit = lik.fit(0, seg_len, order, opt, 888);
    const SandwichVariance sv =
        param_variance(lik, domain, 0, seg_len, order, fit.theta, 100, 555);
    const double se = std::sqrt(sv.avar(0, 0));
    CHECK(se <= 1.5 * esd);
    CHECK(se >= esd / 1.5);
}
