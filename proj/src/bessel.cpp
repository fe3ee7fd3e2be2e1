#include "deltalab/bessel.hpp"

namespace deltalab {

namespace {

constexpr long double kPiL = 3.141592653589793238462643383279502884L;
constexpr double kSeam = 16.0;

double series(unsigned nu, double x) {
    long double half = static_cast<long double>(x) / 2.0L;
    long double hsq = half * half;
    long double term = 1.0L;
    for (unsigned i = 1; i <= nu; ++i) term *= half / static_cast<long double>(i);
    long double sum = term;
    for (unsigned m = 1; m < 600; ++m) {
        term *= -hsq / (static_cast<long double>(m) * static_cast<long double>(m + nu));
        sum += term;
        if (std::abs(term) < 1e-25L * (std::abs(sum) + 1e-30L)) break;
    }
    return static_cast<double>(sum);
}

void pq_series(unsigned nu, double x, long double& p, long double& q) {
    long double mu = 4.0L * static_cast<long double>(nu) * nu;
    long double x8 = 8.0L * static_cast<long double>(x);
    p = 1.0L;
    q = 0.0L;
    long double acc = 1.0L;
    long double prev_mag = 1e30L;
    for (int k = 1; k < 60; ++k) {
        long double odd = static_cast<long double>(2 * k - 1);
        acc *= (mu - odd * odd) / (static_cast<long double>(k) * x8);
        long double mag = std::abs(acc);
        if (mag >= prev_mag) break;
        prev_mag = mag;
        long double sign = ((k / 2) % 2 == 0) ? 1.0L : -1.0L;
        if (k % 2 == 1) {
            q += sign * acc;
        } else {
            p += sign * acc;
        }
        if (mag < 1e-22L) break;
    }
}

/// sqrt(2/(pi x)) (cos(omega) P - sin(omega) Q), omega = x - nu pi/2 - pi/4,
/// with P, Q the standard inverse-power series truncated at the smallest term.
double asymptotic(unsigned nu, double x) {
    long double p, q;
    pq_series(nu, x, p, q);
    long double omega = static_cast<long double>(x) -
                        static_cast<long double>(nu) * kPiL / 2.0L - kPiL / 4.0L;
    long double amp = std::sqrt(2.0L / (kPiL * static_cast<long double>(x)));
    return static_cast<double>(amp * (std::cos(omega) * p - std::sin(omega) * q));
}

}  // namespace

double bessel_j(unsigned nu, double x) {
    if (x < 0.0) throw std::domain_error("bessel_j: negative argument");
    if (x <= kSeam) return series(nu, x);
    return asymptotic(nu, x);
}

void bessel_pq(unsigned nu, double x, double& p_out, double& q_out) {
    long double p, q;
    pq_series(nu, x, p, q);
    p_out = static_cast<double>(p);
    q_out = static_cast<double>(q);
}

}  // namespace deltalab
