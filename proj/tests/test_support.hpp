#pragma once

// Shared helpers for the unit and acceptance suites. The likelihood oracle
// here enumerates every factor from the set definitions with its own loops
// and evaluates densities through dense 2x2 linear algebra, independent of
// the library's pooled evaluation path.

#include <cmath>
#include <map>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/LU>

#include "stcp/grid.hpp"
#include "stcp/likelihood.hpp"
#include "stcp/models.hpp"
#include "stcp/rng.hpp"

namespace test_support {

struct OracleTuple {
    int t, i, s1, s2;
};

// Direct enumeration of the pair collection for a segment of t_len rows
// (0-based t), straight from the set definition.
inline std::vector<OracleTuple> enumerate_pairs_oracle(int t_len, int lag_k,
                                                       const stcp::NeighborGraph& g) {
    std::vector<OracleTuple> out;
    for (int t = 0; t < t_len; ++t) {
        for (int i = 0; i <= lag_k; ++i) {
            if (t + i >= t_len) continue;
            for (int s1 = 0; s1 < g.size(); ++s1) {
                for (int s2 = 0; s2 < g.size(); ++s2) {
                    const bool neighbor =
                        std::find(g.neighbors[static_cast<std::size_t>(s1)].begin(),
                                  g.neighbors[static_cast<std::size_t>(s1)].end(),
                                  s2) != g.neighbors[static_cast<std::size_t>(s1)].end();
                    const bool in_set = (s2 == s1) || neighbor;
                    if (!in_set) continue;
                    if (i == 0 && s1 == s2) continue;
                    out.push_back({t, i, s1, s2});
                }
            }
        }
    }
    return out;
}

// Bivariate normal log-density via an explicit 2x2 solve.
inline double dense_pair_logpdf(double m1, double m2, double v1, double v2, double c12, double x1,
                                double x2) {
    Eigen::Matrix2d cov;
    cov << v1, c12, c12, v2;
    Eigen::Vector2d r(x1 - m1, x2 - m2);
    const Eigen::Matrix2d inv = cov.inverse();
    const double det = cov.determinant();
    return -std::log(2.0 * 3.14159265358979323846) - 0.5 * std::log(det) -
           0.5 * r.dot(inv * r);
}

// Edge-corrected composite log-likelihood by brute-force summation over the
// factor definitions; supports zero and constant means.
inline double composite_loglik_oracle(const Eigen::MatrixXd& data, int t1, int t2,
                                      const stcp::SpatialDomain& domain,
                                      const stcp::NeighborGraph& graph, int lag_k,
                                      const stcp::ModelOrder& order,
                                      const Eigen::VectorXd& theta) {
    const double mu = order.mean == stcp::MeanKind::Constant ? theta[0] : 0.0;
    const double v = stcp::cov_value(order, theta, 0.0, 0);
    double total = 0.0;
    for (const auto& p : enumerate_pairs_oracle(t2 - t1, lag_k, graph)) {
        const double h = p.s1 == p.s2 ? 0.0 : domain.distance(p.s1, p.s2);
        const double c12 = stcp::cov_value(order, theta, h, p.i);
        total += dense_pair_logpdf(mu, mu, v, v, c12, data(t1 + p.t, p.s1),
                                   data(t1 + p.t + p.i, p.s2));
    }
    for (int i = 1; i <= lag_k; ++i) {
        for (int s = 0; s < graph.size(); ++s) {
            const double mult = static_cast<double>(lag_k - i + 1) * (1 + graph.degree(s));
            for (const int row : {t1 + i - 1, t2 - i}) {
                const double x = data(row, s);
                total += mult * (-0.5 * std::log(2.0 * 3.14159265358979323846 * v) -
                                 0.5 * (x - mu) * (x - mu) / v);
            }
        }
    }
    return total;
}

// Per-observation count of likelihood factors containing (t, s), by brute
// force over the same definitions.
inline Eigen::MatrixXi factor_counts_oracle(int t_len, int lag_k,
                                            const stcp::NeighborGraph& graph) {
    Eigen::MatrixXi counts = Eigen::MatrixXi::Zero(t_len, graph.size());
    for (const auto& p : enumerate_pairs_oracle(t_len, lag_k, graph)) {
        counts(p.t, p.s1) += 1;
        counts(p.t + p.i, p.s2) += 1;
    }
    for (int i = 1; i <= lag_k; ++i) {
        for (int s = 0; s < graph.size(); ++s) {
            const int mult = (lag_k - i + 1) * (1 + graph.degree(s));
            counts(i - 1, s) += mult;       // left edge, time offset i
            counts(t_len - i, s) += mult;   // right edge
        }
    }
    return counts;
}

// Random irregular station set with a minimum separation.
inline stcp::SpatialDomain random_domain(int n_stations, stcp::Rng& rng) {
    std::vector<stcp::Station> stations;
    while (static_cast<int>(stations.size()) < n_stations) {
        const double x = rng.uniform() * 6.0;
        const double y = rng.uniform() * 6.0;
        bool ok = true;
        for (const auto& st : stations) {
            const double dx = st.c1 - x, dy = st.c2 - y;
            if (dx * dx + dy * dy < 0.01) ok = false;
        }
        if (ok) {
            stations.push_back({"s" + std::to_string(stations.size()), x, y});
        }
    }
    return stcp::SpatialDomain(std::move(stations), stcp::Metric::PlanarEuclidean);
}

inline Eigen::VectorXd vec3(double a, double b, double c) {
    Eigen::VectorXd v(3);
    v << a, b, c;
    return v;
}

inline Eigen::VectorXd vec4(double a, double b, double c, double d) {
    Eigen::VectorXd v(4);
    v << a, b, c, d;
    return v;
}

inline Eigen::VectorXd vec5(double a, double b, double c, double d, double e) {
    Eigen::VectorXd v(5);
    v << a, b, c, d, e;
    return v;
}

} // namespace test_support
