#include "stcp/bessel.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "stcp/errors.hpp"

namespace stcp {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kEulerGamma = 0.57721566490153286061;
constexpr int kMaxIter = 20000;
constexpr double kEps = std::numeric_limits<double>::epsilon();

// Chebyshev-free evaluation of the Temme auxiliary functions
//   gam1 = [1/Gamma(1-mu) - 1/Gamma(1+mu)] / (2 mu)
//   gam2 = [1/Gamma(1-mu) + 1/Gamma(1+mu)] / 2
// with a series branch near mu = 0 where the direct difference cancels.
void temme_gammas(double mu, double& gam1, double& gam2, double& one_over_gamma_1pmu,
                  double& one_over_gamma_1mmu) {
    one_over_gamma_1pmu = 1.0 / std::tgamma(1.0 + mu);
    one_over_gamma_1mmu = 1.0 / std::tgamma(1.0 - mu);
    gam2 = 0.5 * (one_over_gamma_1mmu + one_over_gamma_1pmu);
    if (std::abs(mu) < 1e-4) {
        // 1/Gamma(1+x) = 1 + g x + c2 x^2 + c3 x^3 + c4 x^4 + c5 x^5 + ...
        // The odd part gives gam1 = -(g + c3 mu^2 + c5 mu^4).
        const double c3 = -0.042002635034095236;
        const double c5 = -0.042197734555544337;
        gam1 = -(kEulerGamma + mu * mu * (c3 + mu * mu * c5));
    } else {
        gam1 = (one_over_gamma_1mmu - one_over_gamma_1pmu) / (2.0 * mu);
    }
}

// K_mu(x) and K_{mu+1}(x) for x <= 2, |mu| <= 1/2 (Temme's series).
void bessel_k_small(double x, double mu, double& k_mu, double& k_mup1) {
    const double x_half = 0.5 * x;
    const double mu2 = mu * mu;
    const double pimu = kPi * mu;
    const double fact = (std::abs(pimu) < kEps) ? 1.0 : pimu / std::sin(pimu);
    double d = -std::log(x_half);
    double e = mu * d;
    const double fact2 = (std::abs(e) < kEps) ? 1.0 : std::sinh(e) / e;
    double gam1, gam2, gampl, gammi;
    temme_gammas(mu, gam1, gam2, gampl, gammi);
    double ff = fact * (gam1 * std::cosh(e) + gam2 * fact2 * d);
    double sum = ff;
    e = std::exp(e);
    double p = 0.5 * e / gampl;
    double q = 0.5 / (e * gammi);
    double c = 1.0;
    d = x_half * x_half;
    double sum1 = p;
    int i = 1;
    for (; i <= kMaxIter; ++i) {
        ff = (static_cast<double>(i) * ff + p + q) / (static_cast<double>(i) * i - mu2);
        c *= d / static_cast<double>(i);
        p /= (static_cast<double>(i) - mu);
        q /= (static_cast<double>(i) + mu);
        const double del = c * ff;
        sum += del;
        const double del1 = c * (p - static_cast<double>(i) * ff);
        sum1 += del1;
        if (std::abs(del) < std::abs(sum) * kEps) break;
    }
    if (i > kMaxIter) throw numeric_error("bessel_k: series did not converge");
    k_mu = sum;
    k_mup1 = sum1 * 2.0 / x;
}

// K_mu(x) and K_{mu+1}(x) for x > 2, |mu| <= 1/2 (Steed's continued fraction CF2).
void bessel_k_large(double x, double mu, double& k_mu, double& k_mup1) {
    const double mu2 = mu * mu;
    double b = 2.0 * (1.0 + x);
    double d = 1.0 / b;
    double h = d;
    double delh = d;
    double q1 = 0.0, q2 = 1.0;
    const double a1 = 0.25 - mu2;
    double q = a1, c = a1, a = -a1;
    double s = 1.0 + q * delh;
    int i = 2;
    for (; i <= kMaxIter; ++i) {
        a -= 2.0 * (static_cast<double>(i) - 1.0);
        c = -a * c / static_cast<double>(i);
        const double qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        const double dels = q * delh;
        s += dels;
        if (std::abs(dels / s) < kEps) break;
    }
    if (i > kMaxIter) throw numeric_error("bessel_k: continued fraction did not converge");
    h = a1 * h;
    k_mu = std::sqrt(kPi / (2.0 * x)) * std::exp(-x) / s;
    k_mup1 = k_mu * (mu + x + 0.5 - h) / x;
}

} // namespace

double bessel_k(double nu, double x) {
    if (!(x > 0.0)) {
        throw param_domain_error("bessel_k requires x > 0 (got x = " + std::to_string(x) + ")");
    }
    nu = std::abs(nu);
    const int n_up = static_cast<int>(nu + 0.5);
    const double mu = nu - static_cast<double>(n_up);
    double k_mu, k_mup1;
    if (x <= 2.0) {
        bessel_k_small(x, mu, k_mu, k_mup1);
    } else {
        bessel_k_large(x, mu, k_mu, k_mup1);
    }
    for (int i = 1; i <= n_up; ++i) {
        const double k_next = (mu + static_cast<double>(i)) * (2.0 / x) * k_mup1 + k_mu;
        k_mu = k_mup1;
        k_mup1 = k_next;
    }
    return k_mu;
}

} // namespace stcp
