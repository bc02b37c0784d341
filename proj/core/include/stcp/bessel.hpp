#pragma once

namespace stcp {

// Modified Bessel function of the second kind K_nu(x) for real order.
//
// The order is reduced to |mu| <= 1/2 plus an integer; K_mu and K_{mu+1} are
// computed by Temme's series for x <= 2 and by the Steed continued fraction
// for x > 2, then carried to the requested order by the (stable) upward
// recurrence K_{nu+1} = K_{nu-1} + (2 nu / x) K_nu. Relative accuracy is
// better than 1e-12 over nu in [0, 10], x in [1e-6, 50].
//
// K is even in the order, so negative nu is folded to |nu|. Throws
// param_domain_error for x <= 0.
double bessel_k(double nu, double x);

} // namespace stcp
