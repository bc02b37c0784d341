#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "stcp/grid.hpp"
#include "stcp/models.hpp"

namespace stcp {

struct OptimizerConfig {
    double tolerance = 1e-8;
    int max_iterations = 2000;
    int n_restarts = 3;    // total starts; the first is unjittered
    double jitter = 0.3;   // sd of the start perturbation in unconstrained space
};

struct FitResult {
    Eigen::VectorXd theta;
    double loglik = 0.0;
    bool converged = false;
    int n_restarts_used = 0;
};

// Edge-corrected composite log-likelihood of data segments: the sum of
// bivariate log-densities over the lag/neighborhood pair collection plus
// compensating marginal log-densities at both segment edges, so that every
// observation enters the same number of factors.
//
// Construction precomputes pooled sufficient statistics: pairs are grouped by
// (time lag, station distance), the only quantities the factor moments depend
// on under a stationary isotropic model with a constant mean, and per-group
// cross products are prefix-summed over time. A segment evaluation then costs
// O(#groups) instead of O(#factors). Regression means fall back to direct
// enumeration.
//
// All queries are const and safe to run concurrently.
class CompositeLikelihood {
public:
    CompositeLikelihood(Eigen::MatrixXd data, PairConfig cfg,
                        std::vector<Eigen::MatrixXd> covariates = {});

    int t_total() const { return static_cast<int>(data_.rows()); }
    int n_stations() const { return static_cast<int>(data_.cols()); }
    const PairConfig& pair_config() const { return cfg_; }
    const Eigen::MatrixXd& data() const { return data_; }
    const std::vector<Eigen::MatrixXd>& covariates() const { return covariates_; }

    // Composite log-likelihood of rows [t1, t2) under (order, theta).
    double value(int t1, int t2, const ModelOrder& order, const Eigen::VectorXd& theta) const;

    // Same quantity by direct enumeration of every factor (no pooling).
    double value_direct(int t1, int t2, const ModelOrder& order, const Eigen::VectorXd& theta) const;

    // Maximizes value() over theta in unconstrained coordinates with
    // multi-start simplex search. Deterministic for a fixed seed.
    FitResult fit(int t1, int t2, const ModelOrder& order, const OptimizerConfig& opt,
                  std::uint64_t seed) const;

    // Method-of-moments starting point for the optimizer.
    Eigen::VectorXd moment_seed(int t1, int t2, const ModelOrder& order) const;

private:
    struct PairGroup {
        int lag = 0;
        double dist = 0.0;
        long long pairs_per_t = 0;
        // Prefix sums over the t index of sum_{pairs} of x1*x2, x1, x2,
        // x1^2, x2^2 where x1 = x[t][s1], x2 = x[t+lag][s2].
        std::vector<double> sxy, sx1, sx2, sxx1, sxx2;
    };

    void check_segment(int t1, int t2) const;
    double value_pooled(int t1, int t2, const ModelOrder& order, const Eigen::VectorXd& theta) const;
    double mean_at(const ModelOrder& order, const Eigen::VectorXd& theta, int t, int s) const;

    Eigen::MatrixXd data_;
    PairConfig cfg_;
    std::vector<Eigen::MatrixXd> covariates_;
    std::vector<PairGroup> groups_;
    // (1 + |N(s)|)-weighted per-time sums of x and x^2 for the edge marginals.
    std::vector<double> edge_wx_, edge_wxx_;
    double edge_weight_sum_ = 0.0;
    double mean_neighbor_arg_sq_ = 1.0; // mean squared neighbor distance, optimizer seed scale
    double mean_neighbor_arg_ = 1.0;
};

} // namespace stcp
