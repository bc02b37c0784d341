#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "stcp/grid.hpp"
#include "stcp/likelihood.hpp"
#include "stcp/models.hpp"

namespace stcp {

struct FittedModel {
    ModelOrder order;
    Eigen::VectorXd theta;
};

// One realization of the double-sided criterion-increment walk around an
// estimated change-point, on the integer grid q in [-Q, Q]. W(0) = 0 exactly;
// for q > 0 the walk is evaluated on fresh draws from the right-segment model
// (marginal-versus-pair seam terms at q, the constant seam swap at the old
// boundary, and the cumulative density-ratio term over the misassigned
// window), and symmetrically on left-segment draws for q < 0.
struct RandomWalkSample {
    int q_radius = 0;
    std::vector<double> values; // index q + q_radius
    int argmax = 0;             // ties resolved toward 0

    double at(int q) const { return values[static_cast<std::size_t>(q + q_radius)]; }
};

// Requires lag-1 fitted models (the walk uses lags 0 and 1 only) with zero or
// constant means. Segment draws are simulated independently from the two
// fitted models.
RandomWalkSample random_walk_path(const SpatialDomain& domain, const NeighborGraph& graph,
                                  const FittedModel& left, const FittedModel& right, int q_radius,
                                  std::uint64_t seed, long long dense_budget = 5000);

struct ChangePointInterval {
    int tau_hat = 0;
    double level = 0.9;
    int n_rep = 0;
    int q_lo = 0, q_hi = 0;       // argmax quantiles
    int tau_lo = 0, tau_hi = 0;   // tau_hat + quantile
    double lambda_lo = 0.0, lambda_hi = 0.0;
    bool degenerate = false; // identical neighbor models; interval is non-informative
    int q_radius = 0;
    std::vector<int> argmax_samples;
};

// Empirical-quantile interval for one change-point from n_rep independent
// walk replicates. A replicate whose argmax lands on the grid edge is retried
// once on a doubled grid.
ChangePointInterval changepoint_ci(const SpatialDomain& domain, const NeighborGraph& graph,
                                   const FittedModel& left, const FittedModel& right, int tau_hat,
                                   int t_total, double level, int n_rep, int q_radius,
                                   std::uint64_t seed, long long dense_budget = 5000,
                                   int n_threads = 1);

// Sandwich variance of the segment parameter estimate:
//   sigma2 = -(1/N) d^2 logLik / dtheta^2   (numerical, symmetrized),
//   sigma1 = (1/N) Cov of the numerical score over parametric replicates,
//   avar   = sigma2^-1 sigma1 sigma2^-1 / N,  N = S * segment length.
struct SandwichVariance {
    Eigen::MatrixXd sigma1;
    Eigen::MatrixXd sigma2;
    Eigen::MatrixXd avar;
};

SandwichVariance param_variance(const CompositeLikelihood& lik, const SpatialDomain& domain,
                                int t1, int t2, const ModelOrder& order,
                                const Eigen::VectorXd& theta_hat, int n_rep, std::uint64_t seed,
                                long long dense_budget = 5000, int n_threads = 1);

} // namespace stcp
