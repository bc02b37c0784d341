#include "stcp/models.hpp"

#include <cmath>
#include <stdexcept>

#include "stcp/bessel.hpp"
#include "stcp/errors.hpp"

namespace stcp {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;

enum class Transform { Identity, Atanh, Log };

// Per-component transforms following the parameter layout.
std::vector<Transform> transforms_for(const ModelOrder& order) {
    std::vector<Transform> ts(static_cast<std::size_t>(order.mean_param_count()),
                              Transform::Identity);
    switch (order.family) {
    case Family::SepExpAr:
        ts.insert(ts.end(), {Transform::Atanh, Transform::Log, Transform::Log});
        break;
    case Family::MaternAr:
        ts.insert(ts.end(), {Transform::Atanh, Transform::Log, Transform::Log, Transform::Log});
        break;
    case Family::CressieHuang:
        ts.insert(ts.end(),
                  {Transform::Log, Transform::Log, Transform::Log, Transform::Log, Transform::Log});
        break;
    }
    return ts;
}
} // namespace

int ModelOrder::mean_param_count() const {
    switch (mean) {
    case MeanKind::Zero:
        return 0;
    case MeanKind::Constant:
        return 1;
    case MeanKind::Covariates: {
        int n = 0;
        for (int code : covariate_codes) n += (code == 2);
        return n;
    }
    }
    return 0;
}

int ModelOrder::family_param_count() const {
    switch (family) {
    case Family::SepExpAr:
        return 3;
    case Family::MaternAr:
        return 4;
    case Family::CressieHuang:
        return 5;
    }
    return 0;
}

std::vector<int> ModelOrder::integer_components() const {
    std::vector<int> xi;
    xi.push_back(static_cast<int>(mean));
    if (mean == MeanKind::Covariates) {
        xi.insert(xi.end(), covariate_codes.begin(), covariate_codes.end());
    }
    xi.push_back(static_cast<int>(family));
    return xi;
}

double ModelOrder::code_length() const {
    double total = 0.0;
    for (int c : integer_components()) {
        if (c < 1) throw input_error("model order components must be >= 1");
        total += std::log(static_cast<double>(c));
    }
    return total;
}

std::vector<std::string> ModelOrder::param_names() const {
    std::vector<std::string> names;
    if (mean == MeanKind::Constant) {
        names.push_back("mu");
    } else if (mean == MeanKind::Covariates) {
        for (std::size_t i = 0; i < covariate_codes.size(); ++i) {
            if (covariate_codes[i] == 2) names.push_back("beta" + std::to_string(i));
        }
    }
    switch (family) {
    case Family::SepExpAr:
        names.insert(names.end(), {"phi", "rho", "sigma2"});
        break;
    case Family::MaternAr:
        names.insert(names.end(), {"phi", "rho", "sigma2", "nu"});
        break;
    case Family::CressieHuang:
        names.insert(names.end(), {"a", "b", "c", "nu", "sigma2"});
        break;
    }
    return names;
}

std::string ModelOrder::label() const {
    std::string s;
    switch (family) {
    case Family::SepExpAr:
        s = "sepexp_ar";
        break;
    case Family::MaternAr:
        s = "matern_ar";
        break;
    case Family::CressieHuang:
        s = "cressie_huang";
        break;
    }
    if (mean == MeanKind::Constant) s += "+mu";
    if (mean == MeanKind::Covariates) s += "+z";
    return s;
}

bool ModelOrder::operator==(const ModelOrder& other) const {
    return mean == other.mean && family == other.family &&
           covariate_codes == other.covariate_codes && kernel == other.kernel;
}

ModelOrder make_order(Family family, MeanKind mean, SpatialKernel kernel) {
    ModelOrder order;
    order.family = family;
    order.mean = mean;
    order.kernel = kernel;
    return order;
}

bool in_domain(const ModelOrder& order, const Eigen::VectorXd& theta) {
    if (theta.size() != order.param_dim()) return false;
    const auto ts = transforms_for(order);
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        const double v = theta[i];
        if (!std::isfinite(v)) return false;
        switch (ts[static_cast<std::size_t>(i)]) {
        case Transform::Identity:
            break;
        case Transform::Atanh:
            if (!(v > -1.0 && v < 1.0)) return false;
            break;
        case Transform::Log:
            if (!(v > 0.0)) return false;
            break;
        }
    }
    return true;
}

Eigen::VectorXd to_unconstrained(const ModelOrder& order, const Eigen::VectorXd& theta) {
    if (!in_domain(order, theta)) {
        throw param_domain_error("parameter vector outside the domain of " + order.label());
    }
    const auto ts = transforms_for(order);
    Eigen::VectorXd z(theta.size());
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        switch (ts[static_cast<std::size_t>(i)]) {
        case Transform::Identity:
            z[i] = theta[i];
            break;
        case Transform::Atanh:
            z[i] = std::atanh(theta[i]);
            break;
        case Transform::Log:
            z[i] = std::log(theta[i]);
            break;
        }
    }
    return z;
}

Eigen::VectorXd from_unconstrained(const ModelOrder& order, const Eigen::VectorXd& z) {
    if (z.size() != order.param_dim()) {
        throw param_domain_error("unconstrained vector has wrong dimension for " + order.label());
    }
    const auto ts = transforms_for(order);
    Eigen::VectorXd theta(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        switch (ts[static_cast<std::size_t>(i)]) {
        case Transform::Identity:
            theta[i] = z[i];
            break;
        case Transform::Atanh:
            theta[i] = std::tanh(z[i]);
            break;
        case Transform::Log:
            theta[i] = std::exp(z[i]);
            break;
        }
    }
    return theta;
}

double exponential_correlation(double arg, double rho) {
    return std::exp(-arg / rho);
}

double matern_correlation(double arg, double rho, double nu) {
    if (arg <= 0.0) return 1.0;
    const double z = std::sqrt(2.0 * nu) * arg / rho;
    // 2^{1-nu}/Gamma(nu) z^nu K_nu(z); underflows to 0 for large z.
    const double log_pre = (1.0 - nu) * std::log(2.0) - std::lgamma(nu) + nu * std::log(z);
    const double k = bessel_k(nu, z);
    if (k <= 0.0) return 0.0;
    const double r = std::exp(log_pre + std::log(k));
    if (!std::isfinite(r)) {
        throw numeric_error("matern correlation overflow at arg=" + std::to_string(arg) +
                            ", rho=" + std::to_string(rho) + ", nu=" + std::to_string(nu));
    }
    return r;
}

namespace {

double cressie_huang_cov(const Eigen::VectorXd& fam, double h, double u) {
    const double a = fam[0], b = fam[1], c = fam[2], nu = fam[3], sigma2 = fam[4];
    const double d_half = 1.0; // spatial dimension 2
    const double au = a * a * u * u;
    if (h <= 0.0) {
        return sigma2 * std::pow(c, d_half) / (std::pow(au + 1.0, nu) * std::pow(au + c, d_half));
    }
    const double ratio = std::sqrt((au + 1.0) / (au + c));
    const double z = b * ratio * h;
    const double k = bessel_k(nu, z);
    const double pre = sigma2 * 2.0 * std::pow(c, d_half) /
                       (std::pow(au + 1.0, nu) * std::pow(au + c, d_half) * std::tgamma(nu));
    const double value = pre * std::pow(0.5 * z, nu) * k;
    if (!std::isfinite(value)) {
        throw numeric_error("cressie-huang covariance is not finite at h=" + std::to_string(h) +
                            ", u=" + std::to_string(u));
    }
    return value;
}

} // namespace

double cov_value(const ModelOrder& order, const Eigen::VectorXd& theta, double h, int u) {
    if (!in_domain(order, theta)) {
        throw param_domain_error("cov_value: parameters outside the domain of " + order.label());
    }
    if (h < 0.0) throw input_error("cov_value: spatial distance must be >= 0");
    const int mp = order.mean_param_count();
    const Eigen::VectorXd fam = theta.tail(theta.size() - mp);
    const double lag = std::abs(static_cast<double>(u));
    switch (order.family) {
    case Family::SepExpAr:
    case Family::MaternAr: {
        const double phi = fam[0], rho = fam[1], sigma2 = fam[2];
        const double marg = sigma2 / (1.0 - phi * phi);
        const double arg = (order.kernel == SpatialKernel::SquaredDistance) ? h * h : h;
        const double r = (order.family == Family::SepExpAr)
                             ? exponential_correlation(arg, rho)
                             : matern_correlation(arg, rho, fam[3]);
        const double value = std::pow(phi, lag) * marg * r;
        if (!std::isfinite(value)) {
            throw numeric_error("ar-family covariance is not finite at h=" + std::to_string(h));
        }
        return value;
    }
    case Family::CressieHuang:
        return cressie_huang_cov(fam, h, lag);
    }
    throw input_error("unknown covariance family");
}

double separability_defect(const ModelOrder& order, const Eigen::VectorXd& theta, double h, int u) {
    return cov_value(order, theta, h, u) * cov_value(order, theta, 0.0, 0) -
           cov_value(order, theta, h, 0) * cov_value(order, theta, 0.0, u);
}

double pair_logdensity(const BivariatePair& p, double x1, double x2) {
    const double det = p.v1 * p.v2 - p.c12 * p.c12;
    if (!(p.v1 > 0.0) || !(p.v2 > 0.0) || !(det > 0.0)) {
        throw numeric_error("bivariate factor is not positive definite (det = " +
                            std::to_string(det) + ")");
    }
    const double r1 = x1 - p.m1;
    const double r2 = x2 - p.m2;
    const double quad = (p.v2 * r1 * r1 - 2.0 * p.c12 * r1 * r2 + p.v1 * r2 * r2) / det;
    return -kLog2Pi - 0.5 * std::log(det) - 0.5 * quad;
}

double marg_logdensity(double mean, double var, double x) {
    if (!(var > 0.0)) {
        throw param_domain_error("marginal density requires variance > 0");
    }
    const double r = x - mean;
    return -0.5 * (kLog2Pi + std::log(var)) - 0.5 * r * r / var;
}

} // namespace stcp
