/**
 * @file expsums.hpp
 * @brief Complete exponential sums mod a prime q: the twisted kernel
 *        K(u, n) = sum over units alpha of conj(chi)(n + alpha) e(inv(alpha) u / q),
 *        the shifted sums built from it, and the two-variable correlation sum
 *        with its closed-form branches.
 */
#pragma once

#include "deltalab/arith.hpp"

namespace deltalab {

/**
 * Precomputed table of K(u, n) over all residue pairs.  The shifted sums
 * used downstream depend on their arguments only through u and n mod q, so
 * one table serves every (m, ell, p) combination.  At u = 0 the kernel
 * collapses to -conj(chi)(n) for nontrivial chi; the table encodes that
 * without special-casing.
 */
class TwistKernel {
  public:
    /// Throws std::invalid_argument for the trivial character.
    explicit TwistKernel(DirichletCharacter chi);

    u64 q() const { return q_; }
    const DirichletCharacter& character() const { return chi_; }

    cplx at(i64 u, i64 n) const {
        return table_[mod_floor(u, q_) * q_ + mod_floor(n, q_)];
    }

  private:
    DirichletCharacter chi_;
    u64 q_;
    std::vector<cplx> table_;
};

/**
 * D(m, n, ell, p) = sum over units alpha mod q of
 *   conj(chi)(n + alpha) e(inv(alpha p) m ell^amp / q),
 * looked up as K(m ell^amp inv(p), n).  Requires (p, q) = 1.
 */
cplx twisted_shift_sum(const TwistKernel& kernel, i64 m, i64 n, u64 ell, unsigned amp, u64 p);

/// Same sum by direct evaluation without tables; the test oracle route.
cplx twisted_shift_sum_brute(const DirichletCharacter& chi, i64 m, i64 n, u64 ell, unsigned amp,
                             u64 p);

/// Trichotomy for the correlation sum evaluation.
struct CorrelationValue {
    int branch = 0;           ///< 1: q | m.  2: generic, bound only.  3: degenerate pair.
    bool closed_form = false; ///< Branch 2 carries no closed form.
    cplx value{0.0, 0.0};     ///< Meaningful only when closed_form is true.
};

/**
 * C(chi; m, alpha, gamma, n1, n2) = sum over z in F_q^* with m + gamma inv(z)
 * invertible of conj(chi)(n1 + z) chi(n2 + alpha inv(m + gamma inv(z))).
 * Requires nontrivial chi and (alpha gamma, q) = 1.
 */
cplx correlation_brute(const DirichletCharacter& chi, i64 m, i64 alpha, i64 gamma, i64 n1, i64 n2);

/**
 * Closed-form evaluation of the same sum.  Requires additionally
 * (n1 n2, q) = 1.  Branch 1 (q | m):
 *   chi(alpha inv(gamma)) R_q(n2 - n1 alpha inv(gamma)) - chi(n2 inv(n1)).
 * Branch 3 (q does not divide m, n1 = inv(m) gamma and n2 = -inv(m) alpha):
 *   -chi(m n2 inv(gamma)) for non-quadratic chi,
 *   chi(inv(m) n2 gamma) (q - 2) for quadratic chi.
 * Branch 2 (everything else): no closed form, square-root cancellation only.
 */
CorrelationValue correlation_closed(const DirichletCharacter& chi, i64 m, i64 alpha, i64 gamma,
                                    i64 n1, i64 n2);

}  // namespace deltalab
