/**
 * @file bessel.hpp
 * @brief Bessel functions J_nu of integer order on the nonnegative axis and
 *        the holomorphic transform kernel 2 pi i^k J_{k-1}.
 */
#pragma once

#include "deltalab/numeric.hpp"

namespace deltalab {

/// J_nu(x) for integer nu >= 0 and x >= 0.  Power series up to the seam at
/// x = 16, large-argument asymptotics beyond; both sides are accurate to a
/// few 1e-15 absolute at the seam.
double bessel_j(unsigned nu, double x);

/// Large-argument amplitude pair: J_nu(x) = sqrt(2/(pi x)) (cos(omega) P -
/// sin(omega) Q) with omega = x - nu pi/2 - pi/4.  Series truncated at the
/// smallest term; requires x above roughly 20 for full accuracy.  Used to
/// peel the oscillation out of Hankel-type integrands.
void bessel_pq(unsigned nu, double x, double& p_out, double& q_out);

/// 2 pi i^k J_{k-1}(x) for even k >= 2; real because i^k = (-1)^{k/2}.
inline double holomorphic_kernel(unsigned k, double x) {
    if (k < 2 || k % 2 != 0) throw std::invalid_argument("kernel weight must be even");
    double sign = ((k / 2) % 2 == 0) ? 1.0 : -1.0;
    return sign * kTau * bessel_j(k - 1, x);
}

}  // namespace deltalab
