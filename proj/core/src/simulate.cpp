#include "stcp/simulate.hpp"

#include <cmath>
#include <string>

#include <Eigen/Cholesky>

#include "stcp/errors.hpp"

namespace stcp {

namespace {

constexpr double kJitter = 1e-10;

double constant_mean(const SegmentSpec& spec) {
    if (spec.order.mean == MeanKind::Covariates) {
        throw input_error("simulation supports zero or constant means only");
    }
    return spec.order.mean == MeanKind::Constant ? spec.theta[0] : 0.0;
}

// Innovation covariance of the AR families: sigma2 * r(kernel arg of dist).
Eigen::MatrixXd innovation_covariance(const SpatialDomain& domain, const SegmentSpec& spec) {
    const int S = domain.size();
    const int mp = spec.order.mean_param_count();
    const double rho = spec.theta[mp + 1];
    const double sigma2 = spec.theta[mp + 2];
    const double nu = (spec.order.family == Family::MaternAr) ? spec.theta[mp + 3] : 0.0;
    Eigen::MatrixXd cov(S, S);
    for (int i = 0; i < S; ++i) {
        cov(i, i) = sigma2;
        for (int j = i + 1; j < S; ++j) {
            const double h = domain.distance(i, j);
            const double arg =
                (spec.order.kernel == SpatialKernel::SquaredDistance) ? h * h : h;
            const double r = (spec.order.family == Family::SepExpAr)
                                 ? exponential_correlation(arg, rho)
                                 : matern_correlation(arg, rho, nu);
            cov(i, j) = sigma2 * r;
            cov(j, i) = cov(i, j);
        }
    }
    return cov;
}

Eigen::LLT<Eigen::MatrixXd> factor_with_jitter(Eigen::MatrixXd cov, const std::string& what) {
    cov.diagonal().array() += kJitter;
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
        throw numeric_error(what + " covariance is not positive definite after 1e-10 jitter");
    }
    return llt;
}

Eigen::VectorXd standard_normal(int n, Rng& rng) {
    Eigen::VectorXd z(n);
    for (int i = 0; i < n; ++i) z[i] = rng.normal();
    return z;
}

} // namespace

Eigen::MatrixXd gen_ar_spatial(const SpatialDomain& domain, const SegmentSpec& spec, Rng& rng) {
    if (spec.order.family != Family::SepExpAr && spec.order.family != Family::MaternAr) {
        throw input_error("gen_ar_spatial requires an AR-family segment");
    }
    if (!in_domain(spec.order, spec.theta)) {
        throw param_domain_error("gen_ar_spatial: parameters outside the domain of " +
                                 spec.order.label());
    }
    if (spec.length < 1) throw input_error("segment length must be >= 1");
    const int S = domain.size();
    const int mp = spec.order.mean_param_count();
    const double mu = constant_mean(spec);
    const double phi = spec.theta[mp];

    Eigen::LLT<Eigen::MatrixXd> llt = factor_with_jitter(
        innovation_covariance(domain, spec),
        "innovation (rho=" + std::to_string(spec.theta[mp + 1]) + ")");
    const Eigen::MatrixXd chol = llt.matrixL();

    Eigen::MatrixXd out(spec.length, S);
    // Stationary start: Var(y_0) = Sigma_innov / (1 - phi^2).
    const double stationary_scale = 1.0 / std::sqrt(1.0 - phi * phi);
    Eigen::VectorXd state = stationary_scale * (chol * standard_normal(S, rng));
    out.row(0) = state.transpose();
    for (int t = 1; t < spec.length; ++t) {
        state = phi * state + chol * standard_normal(S, rng);
        out.row(t) = state.transpose();
    }
    out.array() += mu;
    return out;
}

Eigen::MatrixXd gen_cressie_huang(const SpatialDomain& domain, const SegmentSpec& spec, Rng& rng,
                                  long long dense_budget) {
    if (spec.order.family != Family::CressieHuang) {
        throw input_error("gen_cressie_huang requires a CressieHuang segment");
    }
    if (!in_domain(spec.order, spec.theta)) {
        throw param_domain_error("gen_cressie_huang: parameters outside the domain");
    }
    if (spec.length < 1) throw input_error("segment length must be >= 1");
    const int S = domain.size();
    const long long n_points = static_cast<long long>(spec.length) * S;
    if (n_points > dense_budget) {
        throw budget_error("dense simulation of " + std::to_string(n_points) +
                           " points exceeds the budget of " + std::to_string(dense_budget));
    }
    const double mu = constant_mean(spec);

    // Point order is time-major: index = t * S + s.
    const int n = static_cast<int>(n_points);
    Eigen::MatrixXd cov(n, n);
    // Distinct (lag, distance) values are few; cache the kernel evaluations.
    Eigen::MatrixXd dist(S, S);
    for (int i = 0; i < S; ++i) {
        dist(i, i) = 0.0;
        for (int j = i + 1; j < S; ++j) {
            dist(i, j) = domain.distance(i, j);
            dist(j, i) = dist(i, j);
        }
    }
    for (int a = 0; a < n; ++a) {
        const int ta = a / S, sa = a % S;
        for (int b = a; b < n; ++b) {
            const int tb = b / S, sb = b % S;
            const double c = cov_value(spec.order, spec.theta, dist(sa, sb), tb - ta);
            cov(a, b) = c;
            cov(b, a) = c;
        }
    }
    Eigen::LLT<Eigen::MatrixXd> llt = factor_with_jitter(std::move(cov), "space-time");
    Eigen::VectorXd draw = llt.matrixL() * standard_normal(n, rng);

    Eigen::MatrixXd out(spec.length, S);
    for (int t = 0; t < spec.length; ++t) {
        for (int s = 0; s < S; ++s) out(t, s) = mu + draw[t * S + s];
    }
    return out;
}

Eigen::MatrixXd gen_segment(const SpatialDomain& domain, const SegmentSpec& spec, Rng& rng,
                            long long dense_budget) {
    if (spec.order.family == Family::CressieHuang) {
        return gen_cressie_huang(domain, spec, rng, dense_budget);
    }
    return gen_ar_spatial(domain, spec, rng);
}

PiecewiseData gen_piecewise(const PiecewiseSpec& spec, long long dense_budget) {
    if (spec.segments.empty()) throw input_error("piecewise spec has no segments");
    int total_len = 0;
    for (const auto& seg : spec.segments) {
        if (seg.length < 1) throw input_error("piecewise segment length must be >= 1");
        total_len += seg.length;
    }
    PiecewiseData out;
    out.data.resize(total_len, spec.domain.size());
    int at = 0;
    for (std::size_t j = 0; j < spec.segments.size(); ++j) {
        // Independent segments: one derived stream per segment.
        Rng rng(mix_seed(spec.seed, 0x5e67u, static_cast<std::uint64_t>(j)));
        out.data.middleRows(at, spec.segments[j].length) =
            gen_segment(spec.domain, spec.segments[j], rng, dense_budget);
        at += spec.segments[j].length;
        if (j + 1 < spec.segments.size()) out.change_points.push_back(at);
    }
    return out;
}

} // namespace stcp
