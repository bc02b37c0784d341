#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

namespace stcp {

// Space-time covariance families of the candidate model class.
//
// SepExpAr / MaternAr: AR(1) dynamics in time driven by spatially correlated
// Gaussian innovations, giving C(h, u) = phi^|u| * sigma2/(1-phi^2) * r(h)
// with r an exponential or Matern spatial correlation.
// CressieHuang: the non-separable space-time covariance with parameters
// (a, b, c, nu, sigma2); the space-time interaction parameter c = 1 gives the
// separable special case.
enum class Family : int {
    SepExpAr = 1,
    MaternAr = 2,
    CressieHuang = 3,
};

enum class MeanKind : int {
    Zero = 1,      // mean fixed at 0
    Constant = 2,  // one free location parameter
    Covariates = 3 // regression mean z' beta with per-covariate inclusion codes
};

// Argument fed to the spatial correlation kernels of the AR families. The
// squared norm is the literal model formula; the plain norm gives the
// conventional exponential/Matern decay. Cressie-Huang always takes the plain
// distance.
enum class SpatialKernel {
    SquaredDistance,
    PlainDistance,
};

// Integer-valued model order: the components are (mean code, inclusion codes
// when the mean is a regression, family code), each >= 1 so the description
// length of every component is finite and non-negative.
struct ModelOrder {
    MeanKind mean = MeanKind::Zero;
    Family family = Family::SepExpAr;
    std::vector<int> covariate_codes; // 1 = excluded, 2 = included; Covariates only
    SpatialKernel kernel = SpatialKernel::SquaredDistance;

    int mean_param_count() const;
    int family_param_count() const;
    int param_dim() const { return mean_param_count() + family_param_count(); } // d
    std::vector<int> integer_components() const;                                // xi
    int order_size() const { return static_cast<int>(integer_components().size()); } // c
    double code_length() const; // sum_i log xi_i, >= 0
    std::vector<std::string> param_names() const;
    std::string label() const;

    bool operator==(const ModelOrder& other) const;
};

ModelOrder make_order(Family family, MeanKind mean,
                      SpatialKernel kernel = SpatialKernel::SquaredDistance);

// Real parameter vector handling. Layout is mean parameters first, then the
// family parameters in declaration order:
//   SepExpAr:     phi, rho, sigma2
//   MaternAr:     phi, rho, sigma2, nu
//   CressieHuang: a, b, c, nu, sigma2
bool in_domain(const ModelOrder& order, const Eigen::VectorXd& theta);

// Bijection between the constrained parameter domain and R^d: atanh for phi,
// log for positive parameters, identity for location parameters.
Eigen::VectorXd to_unconstrained(const ModelOrder& order, const Eigen::VectorXd& theta);
Eigen::VectorXd from_unconstrained(const ModelOrder& order, const Eigen::VectorXd& z);

// Stationary covariance C(h, u) at spatial distance h >= 0 and integer time
// lag u (sign ignored). cov_value(order, theta, 0, 0) is the marginal
// variance. Throws param_domain_error outside the domain and numeric_error if
// a kernel evaluation is not finite.
double cov_value(const ModelOrder& order, const Eigen::VectorXd& theta, double h, int u);

// Spatial correlation kernels (r(0) = 1).
double exponential_correlation(double arg, double rho);
double matern_correlation(double arg, double rho, double nu);

// C(h,u) C(0,0) - C(h,0) C(0,u); identically 0 for a separable model.
double separability_defect(const ModelOrder& order, const Eigen::VectorXd& theta, double h, int u);

// Moments of one bivariate Gaussian factor.
struct BivariatePair {
    double m1 = 0.0;
    double m2 = 0.0;
    double v1 = 1.0;
    double v2 = 1.0;
    double c12 = 0.0;

    bool positive_definite() const { return v1 > 0.0 && v2 > 0.0 && v1 * v2 - c12 * c12 > 0.0; }
};

double pair_logdensity(const BivariatePair& p, double x1, double x2);
double marg_logdensity(double mean, double var, double x);

} // namespace stcp
