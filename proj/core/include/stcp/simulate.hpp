#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "stcp/grid.hpp"
#include "stcp/models.hpp"
#include "stcp/rng.hpp"

namespace stcp {

struct SegmentSpec {
    int length = 0;
    ModelOrder order;
    Eigen::VectorXd theta;
};

struct PiecewiseSpec {
    SpatialDomain domain;
    std::vector<SegmentSpec> segments; // independent across boundaries
    std::uint64_t seed = 0;
};

// Draw from an AR(1)-in-time model with spatially correlated innovations
// (families SepExpAr / MaternAr). The first row comes from the exact
// stationary law; later rows follow the recursion with one reused Cholesky
// factor of the innovation covariance.
Eigen::MatrixXd gen_ar_spatial(const SpatialDomain& domain, const SegmentSpec& spec, Rng& rng);

// Exact draw from the non-separable family via Cholesky of the dense
// (T*S) x (T*S) covariance. Refuses with budget_error when T*S exceeds
// dense_budget.
Eigen::MatrixXd gen_cressie_huang(const SpatialDomain& domain, const SegmentSpec& spec, Rng& rng,
                                  long long dense_budget = 5000);

// Dispatch on the segment's family.
Eigen::MatrixXd gen_segment(const SpatialDomain& domain, const SegmentSpec& spec, Rng& rng,
                            long long dense_budget = 5000);

struct PiecewiseData {
    Eigen::MatrixXd data;           // T x S with T = sum of segment lengths
    std::vector<int> change_points; // ground truth boundaries
};

PiecewiseData gen_piecewise(const PiecewiseSpec& spec, long long dense_budget = 5000);

} // namespace stcp
