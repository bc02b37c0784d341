#include "stcp/neldermead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace stcp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

SimplexResult minimize_simplex(const std::function<double(const Eigen::VectorXd&)>& objective,
                               const Eigen::VectorXd& start, const SimplexOptions& options) {
    const int n = static_cast<int>(start.size());
    const double alpha = 1.0, gamma = 2.0, beta = 0.5, delta = 0.5;

    std::vector<Eigen::VectorXd> x(static_cast<std::size_t>(n) + 1, start);
    std::vector<double> f(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i < n; ++i) {
        x[static_cast<std::size_t>(i) + 1][i] += options.initial_step;
    }
    for (std::size_t i = 0; i < x.size(); ++i) f[i] = objective(x[i]);

    std::vector<int> idx(x.size());
    std::iota(idx.begin(), idx.end(), 0);
    auto order = [&] {
        std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
            return f[static_cast<std::size_t>(a)] < f[static_cast<std::size_t>(b)];
        });
    };

    SimplexResult result;
    int iter = 0;
    for (; iter < options.max_iterations; ++iter) {
        order();
        const int best = idx.front(), worst = idx.back();
        const double f_best = f[static_cast<std::size_t>(best)];
        const double f_worst = f[static_cast<std::size_t>(worst)];
        if (std::isfinite(f_best) &&
            (f_worst - f_best) <= options.tolerance * (std::abs(f_best) + options.tolerance)) {
            result.converged = true;
            break;
        }

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
        for (std::size_t i = 0; i + 1 < idx.size(); ++i) {
            centroid += x[static_cast<std::size_t>(idx[i])];
        }
        centroid /= static_cast<double>(n);
        const Eigen::VectorXd& xw = x[static_cast<std::size_t>(worst)];

        const Eigen::VectorXd xr = centroid + alpha * (centroid - xw);
        const double fr = objective(xr);
        const double f_second = f[static_cast<std::size_t>(idx[idx.size() - 2])];

        if (fr < f_best) {
            const Eigen::VectorXd xe = centroid + gamma * (xr - centroid);
            const double fe = objective(xe);
            if (fe < fr) {
                x[static_cast<std::size_t>(worst)] = xe;
                f[static_cast<std::size_t>(worst)] = fe;
            } else {
                x[static_cast<std::size_t>(worst)] = xr;
                f[static_cast<std::size_t>(worst)] = fr;
            }
            continue;
        }
        if (fr < f_second) {
            x[static_cast<std::size_t>(worst)] = xr;
            f[static_cast<std::size_t>(worst)] = fr;
            continue;
        }
        // Contraction, outside if the reflection improved on the worst point.
        Eigen::VectorXd xc;
        if (fr < f_worst) {
            xc = centroid + beta * (xr - centroid);
        } else {
            xc = centroid + beta * (xw - centroid);
        }
        const double fc = objective(xc);
        if (fc < std::min(fr, f_worst)) {
            x[static_cast<std::size_t>(worst)] = xc;
            f[static_cast<std::size_t>(worst)] = fc;
            continue;
        }
        // Shrink toward the best vertex.
        const Eigen::VectorXd xb = x[static_cast<std::size_t>(best)];
        for (std::size_t i = 1; i < idx.size(); ++i) {
            auto& xi = x[static_cast<std::size_t>(idx[i])];
            xi = xb + delta * (xi - xb);
            f[static_cast<std::size_t>(idx[i])] = objective(xi);
        }
    }

    order();
    result.x = x[static_cast<std::size_t>(idx.front())];
    result.fx = f[static_cast<std::size_t>(idx.front())];
    result.iterations = iter;
    if (!std::isfinite(result.fx)) result.fx = kInf;
    return result;
}

} // namespace stcp
