/**
 * @file arith.hpp
 * @brief Multiplicative structure mod a prime q: discrete logarithms,
 *        Dirichlet characters and their Gauss sums, Ramanujan sums, and the
 *        divisor-sum expansion of the point-mass indicator.
 */
#pragma once

#include <memory>
#include <vector>

#include "deltalab/numeric.hpp"

namespace deltalab {

/// Distinct prime factors of n, ascending.  n >= 1.
std::vector<u64> prime_factors(u64 n);

/// All divisors of n, ascending.  n >= 1.
std::vector<u64> divisors(u64 n);

/// Mobius function.
int mobius(u64 n);

/// Legendre symbol (a | p) for odd prime p, in {-1, 0, 1}.
int legendre_symbol(i64 a, u64 p);

/**
 * Tables for the multiplicative group mod a prime q > 3: the smallest
 * primitive root g and the discrete logarithm of every unit to base g.
 */
class PrimeModulus {
  public:
    /// Throws std::invalid_argument("q must be prime > 3") otherwise.
    explicit PrimeModulus(u64 q);

    u64 q() const { return q_; }
    u64 generator() const { return g_; }

    /// Index j with g^j = a mod q.  Requires 1 <= a < q.
    u64 dlog(u64 a) const { return dlog_[a]; }

    u64 inverse(u64 a) const { return powmod(a % q_, q_ - 2, q_); }
    u64 reduce(i64 a) const { return mod_floor(a, q_); }

  private:
    u64 q_;
    u64 g_;
    std::vector<u64> dlog_;
};

/**
 * Dirichlet character mod prime q, indexed by t in [0, q-2]:
 * chi(g^j) = e(t j / (q-1)) for the smallest primitive root g.
 * t = 0 is the trivial character, t = (q-1)/2 the quadratic one.
 */
class DirichletCharacter {
  public:
    DirichletCharacter(std::shared_ptr<const PrimeModulus> mod, u64 index);

    u64 modulus() const { return mod_->q(); }
    u64 index() const { return t_; }
    const PrimeModulus& residues() const { return *mod_; }

    bool is_trivial() const { return t_ == 0; }
    bool is_primitive() const { return t_ != 0; }
    bool is_quadratic() const { return 2 * t_ == mod_->q() - 1; }
    bool is_real() const { return is_trivial() || is_quadratic(); }

    DirichletCharacter conjugate() const;

    /// chi(a); zero when q | a.
    cplx value(i64 a) const { return table_[mod_->reduce(a)]; }
    cplx value_u(u64 a) const { return table_[a < modulus() ? a : a % modulus()]; }

  private:
    std::shared_ptr<const PrimeModulus> mod_;
    u64 t_;
    std::vector<cplx> table_;
};

/// The quadratic character mod q (Legendre symbol).
DirichletCharacter legendre_character(std::shared_ptr<const PrimeModulus> mod);

/**
 * Gauss sum g_chi = sum over a mod q of chi(a) e(a/q).
 * Throws std::invalid_argument("character not primitive") for trivial chi.
 */
cplx gauss_sum(const DirichletCharacter& chi);

/// Ramanujan sum R_c(n) = sum over units a mod c of e(a n / c), exactly.
i64 ramanujan_sum(u64 c, i64 n);

/**
 * (1/q) sum over c | q of the unit sums sum_{(a,c)=1} e(a n / c), evaluated
 * in floating point.  Equals 1 when q | n and 0 otherwise, up to roundoff;
 * in particular it detects n = 0 exactly among |n| < q.
 */
cplx trivial_delta(i64 n, u64 q);

/// Same expansion summed exactly over Ramanujan sums, as an integer.
i64 trivial_delta_exact(i64 n, u64 q);

/**
 * Max over |n| < q of |trivial_delta(n, q) - [n == 0]| for prime q, using a
 * shared root table and an incremental index walk, so the whole sweep costs
 * O(q^2) table lookups.
 */
double delta_identity_max_error_prime(u64 q);

}  // namespace deltalab
