#pragma once

#include <functional>

#include <Eigen/Core>

namespace stcp {

struct SimplexOptions {
    double tolerance = 1e-8;  // relative objective-spread stopping rule
    int max_iterations = 2000;
    double initial_step = 0.25;
};

struct SimplexResult {
    Eigen::VectorXd x;
    double fx = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Derivative-free Nelder-Mead minimization. The objective may return +inf to
// reject a point; the search never evaluates derivatives. Deterministic for a
// fixed starting point.
SimplexResult minimize_simplex(const std::function<double(const Eigen::VectorXd&)>& objective,
                               const Eigen::VectorXd& start, const SimplexOptions& options);

} // namespace stcp
