#include "stcp/inference.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "stcp/errors.hpp"
#include "stcp/rng.hpp"
#include "stcp/simulate.hpp"
#include "stcp/threading.hpp"

namespace stcp {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

// Precomputed Gaussian factor coefficients for one model: the bivariate
// log-density at lag i and pair distance d is
//   c0 - 0.5 (a r1^2 - 2 b r1 r2 + a r2^2),  r = x - mu.
struct FactorTable {
    double mu = 0.0;
    double var = 1.0;
    double marg_const = 0.0; // -(log 2 pi + log var) / 2
    // keyed by (lag, distance)
    std::map<std::pair<int, double>, std::array<double, 3>> pair_coef; // {c0, a, b}

    const std::array<double, 3>& coef(int lag, double dist) const {
        return pair_coef.at({lag, dist});
    }
    double marg(double x) const {
        const double r = x - mu;
        return marg_const - 0.5 * r * r / var;
    }
    double pair(const std::array<double, 3>& c, double x1, double x2) const {
        const double r1 = x1 - mu;
        const double r2 = x2 - mu;
        return c[0] - 0.5 * (c[1] * r1 * r1 - 2.0 * c[2] * r1 * r2 + c[1] * r2 * r2);
    }
};

FactorTable build_table(const NeighborGraph& graph, const FittedModel& model) {
    if (model.order.mean == MeanKind::Covariates) {
        throw input_error("change-point inference supports zero or constant means only");
    }
    FactorTable tab;
    tab.mu = model.order.mean == MeanKind::Constant ? model.theta[0] : 0.0;
    tab.var = cov_value(model.order, model.theta, 0.0, 0);
    tab.marg_const = -0.5 * (kLog2Pi + std::log(tab.var));
    std::map<std::pair<int, double>, std::array<double, 3>> coefs;
    auto add = [&](int lag, double dist) {
        const auto key = std::make_pair(lag, dist);
        if (coefs.count(key)) return;
        const double c12 = cov_value(model.order, model.theta, dist, lag);
        const double det = tab.var * tab.var - c12 * c12;
        if (!(det > 0.0)) {
            throw numeric_error("walk factor not positive definite at lag " +
                                std::to_string(lag));
        }
        coefs[key] = {-kLog2Pi - 0.5 * std::log(det), tab.var / det, c12 / det};
    };
    add(1, 0.0); // lag-1 self pair
    for (int s = 0; s < graph.size(); ++s) {
        for (double d : graph.neighbor_dist[static_cast<std::size_t>(s)]) {
            add(0, d);
            add(1, d);
        }
    }
    tab.pair_coef = std::move(coefs);
    return tab;
}

// Sum over the ordered seam pair set (s1, s2 in {s1} union N(s1)) of the
// lag-1 pair density with x1 from row_a and x2 from row_b.
double seam_pairs(const NeighborGraph& graph, const FactorTable& tab,
                  const Eigen::MatrixXd& block_a, int row_a, const Eigen::MatrixXd& block_b,
                  int row_b) {
    double total = 0.0;
    const auto& self = tab.coef(1, 0.0);
    for (int s1 = 0; s1 < graph.size(); ++s1) {
        total += tab.pair(self, block_a(row_a, s1), block_b(row_b, s1));
        const auto& nb = graph.neighbors[static_cast<std::size_t>(s1)];
        const auto& nd = graph.neighbor_dist[static_cast<std::size_t>(s1)];
        for (std::size_t j = 0; j < nb.size(); ++j) {
            total += tab.pair(tab.coef(1, nd[j]), block_a(row_a, s1), block_b(row_b, nb[j]));
        }
    }
    return total;
}

// Degree-weighted marginal sum over stations at one row.
double weighted_marginals(const NeighborGraph& graph, const FactorTable& tab,
                          const Eigen::MatrixXd& block, int row) {
    double total = 0.0;
    for (int s = 0; s < graph.size(); ++s) {
        total += (1.0 + graph.degree(s)) * tab.marg(block(row, s));
    }
    return total;
}

// Contemporaneous ordered-pair density sum at one row (both orderings).
double lag0_pairs(const NeighborGraph& graph, const FactorTable& tab,
                  const Eigen::MatrixXd& block, int row) {
    double total = 0.0;
    for (int s1 = 0; s1 < graph.size(); ++s1) {
        const auto& nb = graph.neighbors[static_cast<std::size_t>(s1)];
        const auto& nd = graph.neighbor_dist[static_cast<std::size_t>(s1)];
        for (std::size_t j = 0; j < nb.size(); ++j) {
            total += tab.pair(tab.coef(0, nd[j]), block(row, s1), block(row, nb[j]));
        }
    }
    return total;
}

} // namespace

RandomWalkSample random_walk_path(const SpatialDomain& domain, const NeighborGraph& graph,
                                  const FittedModel& left, const FittedModel& right, int q_radius,
                                  std::uint64_t seed, long long dense_budget) {
    if (q_radius < 1) throw input_error("walk radius must be >= 1");
    const FactorTable tab_l = build_table(graph, left);
    const FactorTable tab_r = build_table(graph, right);

    // Independent draws from the two fitted segment models. The left block
    // rows map to times T_j - Q .. T_j, the right block rows to times 1 .. Q+1.
    SegmentSpec left_spec{q_radius + 1, left.order, left.theta};
    SegmentSpec right_spec{q_radius + 1, right.order, right.theta};
    Rng rng_l(mix_seed(seed, 0xA001u));
    Rng rng_r(mix_seed(seed, 0xB002u));
    const Eigen::MatrixXd bl = gen_segment(domain, left_spec, rng_l, dense_budget);
    const Eigen::MatrixXd br = gen_segment(domain, right_spec, rng_r, dense_budget);
    const int Q = q_radius;

    RandomWalkSample sample;
    sample.q_radius = Q;
    sample.values.assign(2 * static_cast<std::size_t>(Q) + 1, 0.0);

    // Constant seam-swap terms: pairs across the former boundary appear,
    // its compensating marginals leave.
    const double marg_at_seam =
        weighted_marginals(graph, tab_l, bl, Q) + weighted_marginals(graph, tab_r, br, 0);
    const double a2 = seam_pairs(graph, tab_l, bl, Q, br, 0) - marg_at_seam;
    const double b2 = seam_pairs(graph, tab_r, bl, Q, br, 0) - marg_at_seam;

    // q > 0: right-segment realizations, window [1, q] misassigned leftward.
    double a3 = 0.0;
    for (int q = 1; q <= Q; ++q) {
        // A1: the seam moves to (q, q+1); rows q-1, q of the right block.
        const double a1 = weighted_marginals(graph, tab_l, br, q - 1) +
                          weighted_marginals(graph, tab_r, br, q) -
                          seam_pairs(graph, tab_r, br, q - 1, br, q);
        // A3 gains the window increment: contemporaneous pairs at time q and
        // the lag-1 pairs (q-1, q) evaluated under both models.
        a3 += lag0_pairs(graph, tab_l, br, q - 1) - lag0_pairs(graph, tab_r, br, q - 1);
        if (q >= 2) {
            a3 += seam_pairs(graph, tab_l, br, q - 2, br, q - 1) -
                  seam_pairs(graph, tab_r, br, q - 2, br, q - 1);
        }
        sample.values[static_cast<std::size_t>(Q + q)] = a1 + a2 + a3;
    }

    // q < 0: left-segment realizations, window [T_j + q + 1, T_j] misassigned
    // rightward; D2 runs over times T_j + q .. T_j.
    double b3 = 0.0;
    for (int q = -1; q >= -Q; --q) {
        const int row = Q + q; // time T_j + q
        const double b1 = weighted_marginals(graph, tab_l, bl, row) +
                          weighted_marginals(graph, tab_r, bl, row + 1) -
                          seam_pairs(graph, tab_l, bl, row, bl, row + 1);
        if (q == -1) {
            b3 += lag0_pairs(graph, tab_r, bl, Q) - lag0_pairs(graph, tab_l, bl, Q);
        }
        b3 += lag0_pairs(graph, tab_r, bl, row) - lag0_pairs(graph, tab_l, bl, row);
        b3 += seam_pairs(graph, tab_r, bl, row, bl, row + 1) -
              seam_pairs(graph, tab_l, bl, row, bl, row + 1);
        sample.values[static_cast<std::size_t>(Q + q)] = b1 + b2 + b3;
    }

    // Argmax with ties toward 0 (and toward negative q at equal |q|).
    int best_q = 0;
    double best = sample.at(0);
    for (int a = 1; a <= Q; ++a) {
        for (int q : {-a, a}) {
            if (sample.at(q) > best) {
                best = sample.at(q);
                best_q = q;
            }
        }
    }
    sample.argmax = best_q;
    return sample;
}

ChangePointInterval changepoint_ci(const SpatialDomain& domain, const NeighborGraph& graph,
                                   const FittedModel& left, const FittedModel& right, int tau_hat,
                                   int t_total, double level, int n_rep, int q_radius,
                                   std::uint64_t seed, long long dense_budget, int n_threads) {
    if (!(level > 0.0 && level < 1.0)) throw config_error("confidence level must lie in (0, 1)");
    if (n_rep < 2) throw config_error("confidence interval needs at least 2 replicates");

    ChangePointInterval ci;
    ci.tau_hat = tau_hat;
    ci.level = level;
    ci.n_rep = n_rep;
    ci.q_radius = q_radius;
    ci.degenerate = left.order == right.order && left.theta.size() == right.theta.size() &&
                    (left.theta - right.theta).cwiseAbs().maxCoeff() < 1e-12;

    std::vector<int> argmaxes(static_cast<std::size_t>(n_rep), 0);
    parallel_for(static_cast<std::size_t>(n_rep), n_threads, [&](std::size_t r) {
        const std::uint64_t rep_seed = mix_seed(seed, 0xC1u, static_cast<std::uint64_t>(r));
        RandomWalkSample w = random_walk_path(domain, graph, left, right, q_radius, rep_seed,
                                              dense_budget);
        if (std::abs(w.argmax) == q_radius) {
            // The maximum may lie outside the grid; widen once.
            w = random_walk_path(domain, graph, left, right, 2 * q_radius, rep_seed, dense_budget);
        }
        argmaxes[r] = w.argmax;
    });

    std::vector<int> sorted = argmaxes;
    std::sort(sorted.begin(), sorted.end());
    const double alpha = 1.0 - level;
    const auto lo_idx = static_cast<std::size_t>(
        std::floor(alpha / 2.0 * static_cast<double>(n_rep - 1)));
    const auto hi_idx = static_cast<std::size_t>(
        std::ceil((1.0 - alpha / 2.0) * static_cast<double>(n_rep - 1)));
    ci.q_lo = sorted[lo_idx];
    ci.q_hi = sorted[hi_idx];
    ci.tau_lo = tau_hat + ci.q_lo;
    ci.tau_hi = tau_hat + ci.q_hi;
    ci.lambda_lo = static_cast<double>(ci.tau_lo) / static_cast<double>(t_total);
    ci.lambda_hi = static_cast<double>(ci.tau_hi) / static_cast<double>(t_total);
    ci.argmax_samples = std::move(argmaxes);
    return ci;
}

namespace {

// Central-difference gradient of the composite log-likelihood at theta.
Eigen::VectorXd numeric_score(const CompositeLikelihood& lik, int t1, int t2,
                              const ModelOrder& order, const Eigen::VectorXd& theta) {
    const int d = static_cast<int>(theta.size());
    Eigen::VectorXd g(d);
    for (int i = 0; i < d; ++i) {
        double h = 1e-5 * (1.0 + std::abs(theta[i]));
        for (int attempt = 0;; ++attempt) {
            Eigen::VectorXd up = theta, dn = theta;
            up[i] += h;
            dn[i] -= h;
            try {
                g[i] = (lik.value(t1, t2, order, up) - lik.value(t1, t2, order, dn)) / (2.0 * h);
                break;
            } catch (const error&) {
                if (attempt >= 4) throw;
                h *= 0.1; // step crossed a domain boundary; shrink
            }
        }
    }
    return g;
}

} // namespace

SandwichVariance param_variance(const CompositeLikelihood& lik, const SpatialDomain& domain,
                                int t1, int t2, const ModelOrder& order,
                                const Eigen::VectorXd& theta_hat, int n_rep, std::uint64_t seed,
                                long long dense_budget, int n_threads) {
    if (n_rep < 2) throw config_error("sandwich variance needs at least 2 score replicates");
    const int d = static_cast<int>(theta_hat.size());
    const int seg_len = t2 - t1;
    const double n_obs = static_cast<double>(lik.n_stations()) * static_cast<double>(seg_len);

    // Symmetrized central-difference Hessian at theta_hat.
    Eigen::VectorXd steps(d);
    for (int i = 0; i < d; ++i) steps[i] = 1e-4 * (1.0 + std::abs(theta_hat[i]));
    auto value_at = [&](const Eigen::VectorXd& th) { return lik.value(t1, t2, order, th); };
    Eigen::MatrixXd hess(d, d);
    const double f0 = value_at(theta_hat);
    for (int i = 0; i < d; ++i) {
        for (int j = i; j < d; ++j) {
            double hi = steps[i], hj = steps[j];
            for (int attempt = 0;; ++attempt) {
                try {
                    double hij;
                    if (i == j) {
                        Eigen::VectorXd up = theta_hat, dn = theta_hat;
                        up[i] += hi;
                        dn[i] -= hi;
                        hij = (value_at(up) - 2.0 * f0 + value_at(dn)) / (hi * hi);
                    } else {
                        Eigen::VectorXd pp = theta_hat, pm = theta_hat, mp = theta_hat,
                                        mm = theta_hat;
                        pp[i] += hi;
                        pp[j] += hj;
                        pm[i] += hi;
                        pm[j] -= hj;
                        mp[i] -= hi;
                        mp[j] += hj;
                        mm[i] -= hi;
                        mm[j] -= hj;
                        hij = (value_at(pp) - value_at(pm) - value_at(mp) + value_at(mm)) /
                              (4.0 * hi * hj);
                    }
                    hess(i, j) = hij;
                    hess(j, i) = hij;
                    break;
                } catch (const error&) {
                    if (attempt >= 4) throw;
                    hi *= 0.1;
                    hj *= 0.1;
                }
            }
        }
    }

    SandwichVariance out;
    out.sigma2 = -hess / n_obs;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.sigma2);
    const double max_abs = es.eigenvalues().cwiseAbs().maxCoeff();
    if (!(max_abs > 0.0) || es.eigenvalues().minCoeff() <= 1e-10 * max_abs) {
        std::string eigs;
        for (int i = 0; i < d; ++i) eigs += (i ? ", " : "") + std::to_string(es.eigenvalues()[i]);
        throw conditioning_error("curvature matrix is singular or indefinite (eigenvalues " +
                                 eigs + ")");
    }

    // Empirical covariance of the score over parametric replicates.
    const PairConfig& cfg = lik.pair_config();
    Eigen::MatrixXd scores(n_rep, d);
    parallel_for(static_cast<std::size_t>(n_rep), n_threads, [&](std::size_t r) {
        Rng rng(mix_seed(seed, 0x54Du, static_cast<std::uint64_t>(r)));
        SegmentSpec spec{seg_len, order, theta_hat};
        const Eigen::MatrixXd sim = gen_segment(domain, spec, rng, dense_budget);
        CompositeLikelihood rep_lik(sim, cfg);
        scores.row(static_cast<Eigen::Index>(r)) =
            numeric_score(rep_lik, 0, seg_len, order, theta_hat).transpose();
    });
    const Eigen::RowVectorXd mean_score = scores.colwise().mean();
    Eigen::MatrixXd centered = scores.rowwise() - mean_score;
    out.sigma1 = centered.transpose() * centered / (static_cast<double>(n_rep - 1) * n_obs);

    const Eigen::MatrixXd s2_inv_s1 = out.sigma2.ldlt().solve(out.sigma1);
    Eigen::MatrixXd avar = out.sigma2.ldlt().solve(s2_inv_s1.transpose()).transpose() / n_obs;
    out.avar = 0.5 * (avar + avar.transpose());
    return out;
}

} // namespace stcp
