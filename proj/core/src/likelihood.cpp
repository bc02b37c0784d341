#include "stcp/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <utility>

#include "stcp/errors.hpp"
#include "stcp/neldermead.hpp"
#include "stcp/rng.hpp"

namespace stcp {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kInf = std::numeric_limits<double>::infinity();
} // namespace

CompositeLikelihood::CompositeLikelihood(Eigen::MatrixXd data, PairConfig cfg,
                                         std::vector<Eigen::MatrixXd> covariates)
    : data_(std::move(data)), cfg_(std::move(cfg)), covariates_(std::move(covariates)) {
    const int T = t_total();
    const int S = n_stations();
    if (S != cfg_.graph.size()) {
        throw input_error("data has " + std::to_string(S) + " stations but the graph has " +
                          std::to_string(cfg_.graph.size()));
    }
    if (cfg_.lag_k < 1) throw input_error("composite likelihood requires lag k >= 1");
    if (T < cfg_.lag_k + 1) throw input_error("series shorter than k + 1");
    if (!data_.allFinite()) throw input_error("data contains non-finite values");
    for (const auto& z : covariates_) {
        if (z.rows() != T || z.cols() != S) {
            throw input_error("covariate matrix shape does not match the data panel");
        }
        if (!z.allFinite()) throw input_error("covariates contain non-finite values");
    }

    // Group ordered pairs by (lag, distance). Lag 0 holds both orderings of
    // each neighbor pair; lags >= 1 add the self pair at distance 0.
    std::map<std::pair<int, double>, std::vector<std::pair<int, int>>> buckets;
    for (int s1 = 0; s1 < S; ++s1) {
        const auto& nb = cfg_.graph.neighbors[static_cast<std::size_t>(s1)];
        const auto& nd = cfg_.graph.neighbor_dist[static_cast<std::size_t>(s1)];
        for (int i = 0; i <= cfg_.lag_k; ++i) {
            if (i >= 1) buckets[{i, 0.0}].push_back({s1, s1});
            for (std::size_t j = 0; j < nb.size(); ++j) {
                buckets[{i, nd[j]}].push_back({s1, nb[j]});
            }
        }
    }
    groups_.reserve(buckets.size());
    for (auto& [key, pairs] : buckets) {
        PairGroup g;
        g.lag = key.first;
        g.dist = key.second;
        g.pairs_per_t = static_cast<long long>(pairs.size());
        const int nt = T - g.lag; // valid t range [0, T - lag)
        g.sxy.assign(static_cast<std::size_t>(nt) + 1, 0.0);
        g.sx1.assign(static_cast<std::size_t>(nt) + 1, 0.0);
        g.sx2.assign(static_cast<std::size_t>(nt) + 1, 0.0);
        g.sxx1.assign(static_cast<std::size_t>(nt) + 1, 0.0);
        g.sxx2.assign(static_cast<std::size_t>(nt) + 1, 0.0);
        for (int t = 0; t < nt; ++t) {
            double sxy = 0, sx1 = 0, sx2 = 0, sxx1 = 0, sxx2 = 0;
            for (const auto& [s1, s2] : pairs) {
                const double x1 = data_(t, s1);
                const double x2 = data_(t + g.lag, s2);
                sxy += x1 * x2;
                sx1 += x1;
                sx2 += x2;
                sxx1 += x1 * x1;
                sxx2 += x2 * x2;
            }
            const auto r = static_cast<std::size_t>(t);
            g.sxy[r + 1] = g.sxy[r] + sxy;
            g.sx1[r + 1] = g.sx1[r] + sx1;
            g.sx2[r + 1] = g.sx2[r] + sx2;
            g.sxx1[r + 1] = g.sxx1[r] + sxx1;
            g.sxx2[r + 1] = g.sxx2[r] + sxx2;
        }
        groups_.push_back(std::move(g));
    }

    edge_wx_.assign(static_cast<std::size_t>(T), 0.0);
    edge_wxx_.assign(static_cast<std::size_t>(T), 0.0);
    for (int s = 0; s < S; ++s) {
        const double w = 1.0 + cfg_.graph.degree(s);
        edge_weight_sum_ += w;
        for (int t = 0; t < T; ++t) {
            const double x = data_(t, s);
            edge_wx_[static_cast<std::size_t>(t)] += w * x;
            edge_wxx_[static_cast<std::size_t>(t)] += w * x * x;
        }
    }

    double arg_sq = 0.0, arg = 0.0;
    long long n_nb = 0;
    for (int s = 0; s < S; ++s) {
        for (double d : cfg_.graph.neighbor_dist[static_cast<std::size_t>(s)]) {
            arg_sq += d * d;
            arg += d;
            ++n_nb;
        }
    }
    mean_neighbor_arg_sq_ = n_nb > 0 ? arg_sq / static_cast<double>(n_nb) : 1.0;
    mean_neighbor_arg_ = n_nb > 0 ? arg / static_cast<double>(n_nb) : 1.0;
}

void CompositeLikelihood::check_segment(int t1, int t2) const {
    if (t1 < 0 || t2 > t_total() || t2 - t1 < cfg_.lag_k + 1) {
        throw input_error("segment [" + std::to_string(t1) + ", " + std::to_string(t2) +
                          ") is out of range or shorter than k + 1");
    }
}

double CompositeLikelihood::mean_at(const ModelOrder& order, const Eigen::VectorXd& theta, int t,
                                    int s) const {
    switch (order.mean) {
    case MeanKind::Zero:
        return 0.0;
    case MeanKind::Constant:
        return theta[0];
    case MeanKind::Covariates: {
        double m = 0.0;
        int b = 0;
        for (std::size_t j = 0; j < order.covariate_codes.size(); ++j) {
            if (order.covariate_codes[j] != 2) continue;
            if (j >= covariates_.size()) {
                throw input_error("model selects covariate " + std::to_string(j) +
                                  " but only " + std::to_string(covariates_.size()) +
                                  " covariates are available");
            }
            m += theta[b++] * covariates_[j](t, s);
        }
        return m;
    }
    }
    return 0.0;
}

double CompositeLikelihood::value(int t1, int t2, const ModelOrder& order,
                                  const Eigen::VectorXd& theta) const {
    if (order.mean == MeanKind::Covariates) return value_direct(t1, t2, order, theta);
    return value_pooled(t1, t2, order, theta);
}

double CompositeLikelihood::value_pooled(int t1, int t2, const ModelOrder& order,
                                         const Eigen::VectorXd& theta) const {
    check_segment(t1, t2);
    if (!in_domain(order, theta)) {
        throw param_domain_error("composite likelihood: parameters outside the domain");
    }
    const double mu = (order.mean == MeanKind::Constant) ? theta[0] : 0.0;
    const double v = cov_value(order, theta, 0.0, 0);
    if (!(v > 0.0)) throw numeric_error("marginal variance is not positive");

    double total = 0.0;
    for (const auto& g : groups_) {
        const int lo = t1;
        const int hi = t2 - g.lag; // valid t in [lo, hi)
        const long long nt = hi - lo;
        const double c12 = cov_value(order, theta, g.dist, g.lag);
        const double det = v * v - c12 * c12;
        if (!(det > 0.0)) {
            throw numeric_error("bivariate factor is not positive definite (lag " +
                                std::to_string(g.lag) + ", dist " + std::to_string(g.dist) + ")");
        }
        const double n = static_cast<double>(nt) * static_cast<double>(g.pairs_per_t);
        const auto l = static_cast<std::size_t>(lo);
        const auto h = static_cast<std::size_t>(hi);
        const double sxy = g.sxy[h] - g.sxy[l];
        const double sx1 = g.sx1[h] - g.sx1[l];
        const double sx2 = g.sx2[h] - g.sx2[l];
        const double sxx1 = g.sxx1[h] - g.sxx1[l];
        const double sxx2 = g.sxx2[h] - g.sxx2[l];
        const double q1 = sxx1 - 2.0 * mu * sx1 + n * mu * mu;
        const double q2 = sxx2 - 2.0 * mu * sx2 + n * mu * mu;
        const double q12 = sxy - mu * (sx1 + sx2) + n * mu * mu;
        const double quad = (v * q1 - 2.0 * c12 * q12 + v * q2) / det;
        total += n * (-kLog2Pi - 0.5 * std::log(det)) - 0.5 * quad;
    }

    // Compensating marginals at both edges: offset i carries weight k - i + 1.
    const double log_marg_const = -0.5 * (kLog2Pi + std::log(v));
    for (int i = 1; i <= cfg_.lag_k; ++i) {
        const double w = static_cast<double>(cfg_.lag_k - i + 1);
        for (const int row : {t1 + i - 1, t2 - i}) {
            const auto r = static_cast<std::size_t>(row);
            const double quad =
                edge_wxx_[r] - 2.0 * mu * edge_wx_[r] + mu * mu * edge_weight_sum_;
            total += w * (log_marg_const * edge_weight_sum_ - 0.5 * quad / v);
        }
    }
    return total;
}

double CompositeLikelihood::value_direct(int t1, int t2, const ModelOrder& order,
                                         const Eigen::VectorXd& theta) const {
    check_segment(t1, t2);
    if (!in_domain(order, theta)) {
        throw param_domain_error("composite likelihood: parameters outside the domain");
    }
    const double v = cov_value(order, theta, 0.0, 0);

    // Distinct (lag, dist) covariances are few; evaluate them once.
    std::map<std::pair<int, double>, double> cov_cache;
    auto cov_at = [&](int lag, double dist) {
        const auto key = std::make_pair(lag, dist);
        auto it = cov_cache.find(key);
        if (it != cov_cache.end()) return it->second;
        const double c = cov_value(order, theta, dist, lag);
        cov_cache.emplace(key, c);
        return c;
    };
    auto dist_of = [&](int s1, int s2) -> double {
        if (s1 == s2) return 0.0;
        const auto& nb = cfg_.graph.neighbors[static_cast<std::size_t>(s1)];
        const auto it = std::lower_bound(nb.begin(), nb.end(), s2);
        return cfg_.graph.neighbor_dist[static_cast<std::size_t>(s1)]
                                       [static_cast<std::size_t>(it - nb.begin())];
    };

    double total = 0.0;
    const int seg_len = t2 - t1;
    for_each_pair(seg_len, cfg_, [&](const PairKey& key) {
        const int ta = t1 + key.t;
        const int tb = ta + key.i;
        BivariatePair p;
        p.m1 = mean_at(order, theta, ta, key.s1);
        p.m2 = mean_at(order, theta, tb, key.s2);
        p.v1 = v;
        p.v2 = v;
        p.c12 = cov_at(key.i, dist_of(key.s1, key.s2));
        total += pair_logdensity(p, data_(ta, key.s1), data_(tb, key.s2));
    });

    const EdgeMultiset em = edge_multiset(cfg_);
    for (const auto& e : em.entries) {
        const int left = t1 + e.time_offset - 1;
        const int right = t2 - e.time_offset;
        const double mult = static_cast<double>(e.multiplicity);
        total += mult * marg_logdensity(mean_at(order, theta, left, e.station), v,
                                        data_(left, e.station));
        total += mult * marg_logdensity(mean_at(order, theta, right, e.station), v,
                                        data_(right, e.station));
    }
    return total;
}

Eigen::VectorXd CompositeLikelihood::moment_seed(int t1, int t2, const ModelOrder& order) const {
    check_segment(t1, t2);
    const auto block = data_.middleRows(t1, t2 - t1);
    const double n = static_cast<double>(block.size());
    const double mean = block.mean();
    const double var = std::max((block.array() - mean).square().sum() / n, 1e-8);

    double num = 0.0, den = 0.0;
    for (int t = 0; t + 1 < block.rows(); ++t) {
        num += ((block.row(t).array() - mean) * (block.row(t + 1).array() - mean)).sum();
    }
    den = (block.array() - mean).square().sum();
    const double acf1 = den > 0.0 ? std::clamp(num / den, -0.9, 0.9) : 0.0;

    Eigen::VectorXd theta(order.param_dim());
    int idx = 0;
    if (order.mean == MeanKind::Constant) {
        theta[idx++] = mean;
    } else if (order.mean == MeanKind::Covariates) {
        for (int j = 0; j < order.mean_param_count(); ++j) theta[idx++] = 0.0;
    }
    const double rho_seed = std::max(
        order.kernel == SpatialKernel::SquaredDistance ? mean_neighbor_arg_sq_ : mean_neighbor_arg_,
        1e-3);
    switch (order.family) {
    case Family::SepExpAr:
        theta[idx++] = acf1;
        theta[idx++] = rho_seed;
        theta[idx++] = std::max(var * (1.0 - acf1 * acf1), 1e-8);
        break;
    case Family::MaternAr:
        theta[idx++] = acf1;
        theta[idx++] = rho_seed;
        theta[idx++] = std::max(var * (1.0 - acf1 * acf1), 1e-8);
        theta[idx++] = 0.5;
        break;
    case Family::CressieHuang:
        theta[idx++] = 1.0;
        theta[idx++] = 1.0;
        theta[idx++] = 2.0;
        theta[idx++] = 0.5;
        theta[idx++] = var;
        break;
    }
    return theta;
}

namespace {

// Cyclic coordinate refinement by parabolic steps. Tightens the optimum the
// simplex search ends near: each coordinate is moved to the vertex of the
// local quadratic, which drives the gradient far below what the simplex
// stopping rule guarantees. Deterministic and derivative-free.
void refine_coordinates(const std::function<double(const Eigen::VectorXd&)>& objective,
                        Eigen::VectorXd& z, double& fz) {
    for (const double h : {1e-3, 1e-4, 1e-5}) {
        for (int cycle = 0; cycle < 2; ++cycle) {
            for (Eigen::Index i = 0; i < z.size(); ++i) {
                Eigen::VectorXd up = z, dn = z;
                up[i] += h;
                dn[i] -= h;
                const double fu = objective(up);
                const double fd = objective(dn);
                if (!std::isfinite(fu) || !std::isfinite(fd)) continue;
                const double curv = fu - 2.0 * fz + fd;
                double step;
                if (curv > 0.0) {
                    step = std::clamp(0.5 * h * (fd - fu) / curv, -8.0 * h, 8.0 * h);
                } else {
                    step = fu < fd ? h : -h; // walk downhill when locally flat
                }
                Eigen::VectorXd cand = z;
                cand[i] += step;
                const double fc = objective(cand);
                if (fc < fz) {
                    z = cand;
                    fz = fc;
                } else if (fu < fz) {
                    z = up;
                    fz = fu;
                } else if (fd < fz) {
                    z = dn;
                    fz = fd;
                }
            }
        }
    }
}

} // namespace

FitResult CompositeLikelihood::fit(int t1, int t2, const ModelOrder& order,
                                   const OptimizerConfig& opt, std::uint64_t seed) const {
    check_segment(t1, t2);
    const Eigen::VectorXd seed_theta = moment_seed(t1, t2, order);
    const Eigen::VectorXd z0 = to_unconstrained(order, seed_theta);

    auto objective = [&](const Eigen::VectorXd& z) -> double {
        for (Eigen::Index i = 0; i < z.size(); ++i) {
            if (!std::isfinite(z[i])) return kInf;
        }
        try {
            const Eigen::VectorXd theta = from_unconstrained(order, z);
            if (!in_domain(order, theta)) return kInf;
            const double ll = value(t1, t2, order, theta);
            return std::isfinite(ll) ? -ll : kInf;
        } catch (const error&) {
            return kInf;
        }
    };

    SimplexOptions main_opts;
    main_opts.tolerance = opt.tolerance;
    main_opts.max_iterations = opt.max_iterations;
    main_opts.initial_step = 0.25;
    SimplexOptions polish_opts = main_opts;
    polish_opts.initial_step = 1e-3;

    double best_f = kInf;
    Eigen::VectorXd best_z;
    bool best_converged = false;
    const int n_restarts = std::max(1, opt.n_restarts);
    for (int r = 0; r < n_restarts; ++r) {
        Eigen::VectorXd start = z0;
        if (r > 0) {
            Rng rng(mix_seed(seed, static_cast<std::uint64_t>(r)));
            for (Eigen::Index i = 0; i < start.size(); ++i) {
                start[i] += opt.jitter * rng.normal();
            }
        }
        SimplexResult run = minimize_simplex(objective, start, main_opts);
        if (!std::isfinite(run.fx)) continue;
        SimplexResult polished = minimize_simplex(objective, run.x, polish_opts);
        const SimplexResult& chosen =
            std::isfinite(polished.fx) && polished.fx <= run.fx ? polished : run;
        if (chosen.fx < best_f) {
            best_f = chosen.fx;
            best_z = chosen.x;
            best_converged = chosen.converged;
        }
    }
    if (!std::isfinite(best_f)) {
        throw fit_error("all " + std::to_string(n_restarts) + " restarts failed for " +
                        order.label() + " on segment [" + std::to_string(t1) + ", " +
                        std::to_string(t2) + ")");
    }
    refine_coordinates(objective, best_z, best_f);
    FitResult result;
    result.theta = from_unconstrained(order, best_z);
    result.loglik = -best_f;
    result.converged = best_converged;
    result.n_restarts_used = n_restarts;
    return result;
}

} // namespace stcp
