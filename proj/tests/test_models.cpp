#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "stcp/bessel.hpp"
#include "stcp/errors.hpp"
#include "stcp/models.hpp"
#include "stcp/rng.hpp"
#include "test_support.hpp"

using namespace stcp;
using test_support::vec3;
using test_support::vec4;
using test_support::vec5;

namespace {

// K_nu(x) reference values (40-digit arithmetic, truncated).
struct BesselCase {
    double nu, x, expect;
};
constexpr BesselCase kBesselOracle[] = {
    {0.1, 1e-6, 19.043892581433070921},
    {0.1, 0.001, 7.6735905190531842988},
    {0.1, 0.1, 2.4670534102276832031},
    {0.1, 0.5, 0.93008652913147853465},
    {0.1, 1.0, 0.42256594495516928669},
    {0.1, 2.0, 0.11413020353680899301},
    {0.1, 2.5, 0.062454247735452966202},
    {0.1, 5.0, 0.0036944832782554554669},
    {0.1, 10.0, 0.000017788551507869295616},
    {0.1, 20.0, 5.7426392118770889653e-10},
    {0.1, 50.0, 3.4105054446047280688e-23},
    {0.25, 1e-6, 68.107227889734946501},
    {0.25, 0.5, 0.96031632493188602295},
    {0.25, 2.5, 0.063017158998619515583},
    {0.25, 50.0, 3.4122788875748855900e-23},
    {0.5, 1e-6, 1253.3128840019895926},
    {0.5, 0.001, 39.593659513116643614},
    {0.5, 0.1, 3.5861668387972601445},
    {0.5, 1.0, 0.46106850444789455844},
    {0.5, 2.0, 0.11993777196806144737},
    {0.5, 10.0, 0.000017993478093705179608},
    {0.77, 1e-6, 42641.551573206456810},
    {0.77, 0.1, 5.8323837299473263893},
    {0.77, 1.0, 0.52138879011359344075},
    {0.77, 2.5, 0.068972401473182476531},
    {0.77, 50.0, 3.4302471975556209710e-23},
    {1.0, 1e-6, 999999.99999278427896},
    {1.0, 0.001, 999.99623815608557428},
    {1.0, 0.1, 9.8538447808706061348},
    {1.0, 1.0, 0.60190723019723457474},
    {1.0, 2.0, 0.13986588181652242728},
    {1.0, 10.0, 0.000018648773453825584597},
    {1.5, 0.001, 39633.253172629760257},
    {1.5, 0.5, 3.2251428104997607162},
    {1.5, 2.0, 0.17990665795209217105},
    {1.5, 20.0, 6.0651926734428168854e-10},
    {2.0, 1e-6, 1999999999999.5},
    {2.0, 0.1, 199.50396464211413931},
    {2.0, 1.0, 1.6248388986351774828},
    {2.0, 2.5, 0.12146020627856383695},
    {2.0, 10.0, 0.000021509817006932768731},
    {3.3, 0.001, 104968842516.24677724},
    {3.3, 0.5, 126.69904258432465423},
    {3.3, 2.0, 0.90857425180874949503},
    {3.3, 5.0, 0.0097915211162144236812},
    {3.3, 50.0, 3.7983171184797157968e-23},
    {5.0, 0.1, 38376009.995835928224},
    {5.0, 1.0, 360.96058960124070066},
    {5.0, 2.5, 2.7168842907865433582},
    {5.0, 20.0, 1.0538660139974233100e-9},
    {7.5, 0.001, 5.3558421376259513715e+27},
    {7.5, 0.5, 30365503.270558198585},
    {7.5, 2.0, 803.86511335290534186},
    {7.5, 10.0, 0.00023814095655825685578},
    {10.0, 1e-6, 1.8579455999999483904e+68},
    {10.0, 0.1, 1857429584630400999.9},
    {10.0, 1.0, 180713289.90102945469},
    {10.0, 2.0, 162482.40397955914872},
    {10.0, 5.0, 9.7585628291778101317},
    {10.0, 50.0, 9.1509882099879961115e-23},
};

ModelOrder sep_order(SpatialKernel k = SpatialKernel::SquaredDistance) {
    return make_order(Family::SepExpAr, MeanKind::Zero, k);
}

} // namespace

TEST_CASE("bessel_k against the high-precision oracle") {
    for (const auto& c : kBesselOracle) {
        const double got = bessel_k(c.nu, c.x);
        CHECK(std::abs(got - c.expect) <= 1e-10 * std::abs(c.expect));
    }
    // Half-integer closed form sqrt(pi / 2x) e^{-x}.
    CHECK(bessel_k(0.5, 1.0) == doctest::Approx(0.4610685044478946).epsilon(1e-12));
    CHECK_THROWS_AS(bessel_k(1.0, 0.0), param_domain_error);
    CHECK_THROWS_AS(bessel_k(1.0, -2.0), param_domain_error);
}

TEST_CASE("bessel_k diverges monotonically as x decreases to 0") {
    for (double nu : {0.2, 0.5, 1.0, 2.7}) {
        double prev = bessel_k(nu, 1.0);
        for (double x = 0.5; x > 1e-7; x *= 0.5) {
            const double cur = bessel_k(nu, x);
            CHECK(cur > prev);
            prev = cur;
        }
    }
}

TEST_CASE("model order bookkeeping") {
    const ModelOrder m1 = sep_order();
    CHECK(m1.param_dim() == 3);
    CHECK(m1.order_size() == 2);
    CHECK(m1.code_length() == doctest::Approx(0.0));

    const ModelOrder m2 = make_order(Family::SepExpAr, MeanKind::Constant);
    CHECK(m2.param_dim() == 4);
    CHECK(m2.code_length() == doctest::Approx(std::log(2.0)));

    ModelOrder mz = make_order(Family::CressieHuang, MeanKind::Covariates);
    mz.covariate_codes = {2, 1, 2};
    CHECK(mz.param_dim() == 5 + 2);
    CHECK(mz.order_size() == 5); // mean code, 3 inclusion codes, family code
    CHECK(mz.code_length() ==
          doctest::Approx(std::log(3.0) + std::log(2.0) + std::log(2.0) + std::log(3.0)));
    CHECK(mz.code_length() >= 0.0);
}

TEST_CASE("parameter transforms round-trip") {
    Rng rng(3);
    for (Family family : {Family::SepExpAr, Family::MaternAr, Family::CressieHuang}) {
        for (MeanKind mean : {MeanKind::Zero, MeanKind::Constant}) {
            const ModelOrder order = make_order(family, mean);
            for (int rep = 0; rep < 50; ++rep) {
                Eigen::VectorXd theta(order.param_dim());
                int i = 0;
                if (mean == MeanKind::Constant) theta[i++] = rng.normal() * 3.0;
                if (family != Family::CressieHuang) {
                    theta[i++] = std::tanh(rng.normal()); // phi
                }
                while (i < order.param_dim()) theta[i++] = std::exp(rng.normal());
                const Eigen::VectorXd back =
                    from_unconstrained(order, to_unconstrained(order, theta));
                CHECK((back - theta).cwiseAbs().maxCoeff() <= 1e-12 *
                          (1.0 + theta.cwiseAbs().maxCoeff()));
            }
        }
    }
    CHECK_THROWS_AS(to_unconstrained(sep_order(), vec3(1.5, 0.6, 1.0)), param_domain_error);
    CHECK_THROWS_AS(to_unconstrained(sep_order(), vec3(-0.5, -0.1, 1.0)), param_domain_error);
}

TEST_CASE("separable AR covariance values") {
    const Eigen::VectorXd theta = vec3(-0.5, 0.6, 1.0);
    const ModelOrder order = sep_order();
    CHECK(cov_value(order, theta, 0.0, 0) == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
    // Squared-distance kernel: distance 1 has kernel argument 1.
    CHECK(cov_value(order, theta, 1.0, 0) ==
          doctest::Approx(0.25183413711674912).epsilon(1e-12));
    // Plain-distance kernel agrees at distance 1 and differs at sqrt(2).
    const ModelOrder plain = sep_order(SpatialKernel::PlainDistance);
    CHECK(cov_value(plain, theta, 1.0, 0) == doctest::Approx(0.25183413711674912));
    CHECK(cov_value(order, theta, std::sqrt(2.0), 0) ==
          doctest::Approx((4.0 / 3.0) * std::exp(-2.0 / 0.6)).epsilon(1e-12));
    CHECK(cov_value(plain, theta, std::sqrt(2.0), 0) ==
          doctest::Approx((4.0 / 3.0) * std::exp(-std::sqrt(2.0) / 0.6)).epsilon(1e-12));
    // Sign symmetry in the lag.
    CHECK(cov_value(order, theta, 1.0, 3) == doctest::Approx(cov_value(order, theta, 1.0, -3)));
    CHECK(cov_value(order, theta, 0.0, 1) == doctest::Approx(-0.5 * 4.0 / 3.0));
    CHECK_THROWS_AS(cov_value(order, vec3(1.2, 0.6, 1.0), 0.0, 0), param_domain_error);
}

TEST_CASE("matern family reduces to the exponential kernel at nu = 1/2") {
    const ModelOrder matern = make_order(Family::MaternAr, MeanKind::Zero);
    const ModelOrder expo = sep_order();
    const Eigen::VectorXd tm = vec4(-0.3, 0.8, 1.2, 0.5);
    const Eigen::VectorXd te = vec3(-0.3, 0.0, 1.2); // rho filled per case below
    for (double r : {0.05, 0.3, 0.7, 1.0, 1.9, 3.0}) {
        // exp(-sqrt(2 nu) arg / rho) with nu = 1/2 equals exp(-arg / rho).
        Eigen::VectorXd te2 = te;
        te2[1] = 0.8;
        const double lhs = cov_value(matern, tm, r, 1);
        const double rhs = cov_value(expo, te2, r, 1);
        CHECK(std::abs(lhs - rhs) <= 1e-10 * std::abs(rhs));
    }
}

TEST_CASE("cressie-huang covariance and separability") {
    const ModelOrder order = make_order(Family::CressieHuang, MeanKind::Zero);
    const Eigen::VectorXd theta = vec5(1.0, 1.0, 3.0, 0.2, 1.0);
    CHECK(cov_value(order, theta, 0.0, 0) == doctest::Approx(1.0).epsilon(1e-12)); // sigma2
    CHECK(cov_value(order, theta, 1.0, 0) ==
          doctest::Approx(0.28060856206775881).epsilon(1e-10));
    CHECK(cov_value(order, theta, 0.0, 1) ==
          doctest::Approx(0.65291292247209310).epsilon(1e-10));
    CHECK(cov_value(order, theta, 1.0, 1) ==
          doctest::Approx(0.15379016633269344).epsilon(1e-10));

    CHECK(separability_defect(order, theta, 1.0, 1) ==
          doctest::Approx(-0.029422789997658695).epsilon(1e-9));
    // Axes are degenerate for any interaction parameter.
    CHECK(separability_defect(order, theta, 0.0, 3) == doctest::Approx(0.0));
    CHECK(separability_defect(order, theta, 2.0, 0) == doctest::Approx(0.0));
    // c = 1 is the separable case.
    const Eigen::VectorXd sep = vec5(1.3, 0.7, 1.0, 0.6, 2.0);
    for (double h : {0.3, 1.0, 2.5}) {
        for (int u : {1, 2, 5}) {
            CHECK(std::abs(separability_defect(order, sep, h, u)) <= 1e-10);
        }
    }
}

TEST_CASE("AR families are exactly separable") {
    Rng rng(17);
    for (int rep = 0; rep < 20; ++rep) {
        const Eigen::VectorXd theta =
            vec3(std::tanh(rng.normal()), std::exp(rng.normal() * 0.3),
                 std::exp(rng.normal() * 0.3));
        const ModelOrder order = sep_order();
        const double h = rng.uniform() * 2.0;
        const int u = 1 + static_cast<int>(rng.uniform() * 4);
        const double lhs = cov_value(order, theta, h, u) * cov_value(order, theta, 0.0, 0);
        const double rhs = cov_value(order, theta, h, 0) * cov_value(order, theta, 0.0, u);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-11));
    }
}

namespace {

double min_eigenvalue(const ModelOrder& order, const Eigen::VectorXd& theta,
                      const std::vector<double>& xs, const std::vector<double>& ys,
                      const std::vector<int>& ts) {
    const int n = static_cast<int>(xs.size());
    Eigen::MatrixXd cov(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double dx = xs[i] - xs[j], dy = ys[i] - ys[j];
            cov(i, j) = cov_value(order, theta, std::sqrt(dx * dx + dy * dy), ts[i] - ts[j]);
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (cov + cov.transpose()));
    return es.eigenvalues().minCoeff();
}

} // namespace

TEST_CASE("assembled covariance matrices are positive semidefinite") {
    Rng rng(23);
    struct Setting {
        ModelOrder order;
        Eigen::VectorXd theta;
    };
    // General point configurations: both AR kernels at their PD-safe
    // settings and the non-separable family across a parameter spread.
    std::vector<Setting> general = {
        {sep_order(), vec3(-0.5, 0.6, 1.0)},
        {sep_order(), vec3(0.7, 2.0, 0.5)},
        {sep_order(SpatialKernel::PlainDistance), vec3(-0.5, 0.6, 1.0)},
        {make_order(Family::MaternAr, MeanKind::Zero), vec4(0.4, 1.5, 1.0, 0.5)},
        {make_order(Family::MaternAr, MeanKind::Zero, SpatialKernel::PlainDistance),
         vec4(-0.2, 0.9, 0.9, 2.0)},
        {make_order(Family::MaternAr, MeanKind::Zero, SpatialKernel::PlainDistance),
         vec4(0.4, 1.5, 1.0, 0.5)},
        {make_order(Family::CressieHuang, MeanKind::Zero), vec5(1.0, 1.0, 3.0, 0.2, 1.0)},
        {make_order(Family::CressieHuang, MeanKind::Zero), vec5(0.5, 2.0, 1.0, 0.8, 1.5)},
        {make_order(Family::CressieHuang, MeanKind::Zero), vec5(2.0, 1.0, 5.0, 0.5, 1.0)},
    };
    const int n = 50;
    std::vector<double> xs(n), ys(n);
    std::vector<int> ts(n);
    for (int i = 0; i < n; ++i) {
        xs[i] = rng.uniform() * 4.0;
        ys[i] = rng.uniform() * 4.0;
        ts[i] = static_cast<int>(rng.uniform() * 6);
    }
    for (const auto& s : general) {
        CHECK(min_eigenvalue(s.order, s.theta, xs, ys, ts) >= -1e-8);
    }

    // The literal squared-norm Matern kernel is too flat at the origin to be
    // a valid covariance over arbitrary continuous configurations, but it is
    // positive definite on the unit lattices the generators use. Check it on
    // random lattice subsets at the smooth setting.
    std::vector<double> gx, gy;
    std::vector<int> gt;
    while (static_cast<int>(gx.size()) < n) {
        const double x = static_cast<int>(rng.uniform() * 8);
        const double y = static_cast<int>(rng.uniform() * 8);
        const int t = static_cast<int>(rng.uniform() * 6);
        bool dup = false;
        for (std::size_t i = 0; i < gx.size(); ++i) {
            if (gx[i] == x && gy[i] == y && gt[i] == t) dup = true;
        }
        if (!dup) {
            gx.push_back(x);
            gy.push_back(y);
            gt.push_back(t);
        }
    }
    CHECK(min_eigenvalue(make_order(Family::MaternAr, MeanKind::Zero),
                         vec4(-0.2, 0.9, 0.9, 2.0), gx, gy, gt) >= -1e-8);
    CHECK(min_eigenvalue(sep_order(), vec3(-0.5, 0.6, 1.0), gx, gy, gt) >= -1e-8);
}

TEST_CASE("gaussian densities") {
    CHECK(marg_logdensity(0.0, 1.0, 0.0) ==
          doctest::Approx(-0.91893853320467274).epsilon(1e-14));
    CHECK(marg_logdensity(2.5, 0.7, 2.5) ==
          doctest::Approx(-0.5 * std::log(2.0 * 3.14159265358979323846 * 0.7)));
    CHECK(marg_logdensity(0.0, 4.0 / 3.0, 2.0) ==
          doctest::Approx(test_support::dense_pair_logpdf(0, 0, 4.0 / 3.0, 1, 0, 2.0, 0) -
                          marg_logdensity(0.0, 1.0, 0.0)));
    CHECK_THROWS_AS(marg_logdensity(0.0, 0.0, 1.0), param_domain_error);

    BivariatePair p{0.0, 0.0, 1.0, 1.0, 0.0};
    CHECK(pair_logdensity(p, 0.0, 0.0) ==
          doctest::Approx(-1.8378770664093454836).epsilon(1e-14));
    BivariatePair degenerate{0.0, 0.0, 1.0, 1.0, 1.0};
    CHECK(!degenerate.positive_definite());
    CHECK_THROWS_AS(pair_logdensity(degenerate, 0.3, 0.3), numeric_error);

    // Dense 2x2 oracle comparison at the documented point.
    BivariatePair q{0.0, 0.0, 4.0 / 3.0, 4.0 / 3.0, 0.25183413711674912};
    CHECK(pair_logdensity(q, 1.0, -1.0) ==
          doctest::Approx(test_support::dense_pair_logpdf(0, 0, q.v1, q.v2, q.c12, 1.0, -1.0))
              .epsilon(1e-12));
    CHECK(pair_logdensity(q, 1.0, -1.0) == doctest::Approx(-3.0320385972234127).epsilon(1e-12));
}
