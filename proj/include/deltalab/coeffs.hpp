/**
 * @file coeffs.hpp
 * @brief Hecke eigenvalue tables for holomorphic newforms of prime level:
 *        an exact eta-product backend for level 11, a strict file backend,
 *        structural validation (multiplicativity, Hecke recursion, Deligne
 *        bound), and the analytic normalization used downstream.
 */
#pragma once

#include <iosfwd>
#include <string>

#include "deltalab/numeric.hpp"

namespace deltalab {

/**
 * Integer coefficients a_1..a_nmax of a holomorphic newform of prime level
 * and trivial nebentypus, arithmetic normalization.  Immutable once built.
 * Integer coefficients are the source of truth; lambda() applies the
 * analytic normalization at the last moment.
 */
class HeckeCoefficients {
  public:
    HeckeCoefficients(u64 level, u64 weight, std::string label, std::vector<i64> a_one_indexed);

    /// Level-11 weight-2 coefficients by exact expansion of
    /// x prod (1-x^n)^2 (1-x^{11n})^2 via the pentagonal-number series.
    /// Requires 1 <= nmax <= 10^6.
    static HeckeCoefficients eta_level11(u64 nmax);

    /// Parse and validate; throws with "parse error at line L: reason" or a
    /// named invariant violation.
    static HeckeCoefficients load_file(const std::string& path);
    static HeckeCoefficients parse(std::istream& in);

    void save_file(const std::string& path) const;

    u64 level() const { return level_; }
    u64 weight() const { return weight_; }
    u64 nmax() const { return nmax_; }
    const std::string& label() const { return label_; }

    /// Exact integer a_n, 1 <= n <= nmax.
    i64 a(u64 n) const {
        check_horizon(n);
        return a_[n];
    }

    /// lambda(n) = a_n n^{-(k-1)/2}.
    double lambda(u64 n) const {
        check_horizon(n);
        return static_cast<double>(a_[n]) /
               std::pow(static_cast<double>(n), (static_cast<double>(weight_) - 1.0) / 2.0);
    }

    /**
     * Checks a_1 = 1, multiplicativity at every composite with coprime parts,
     * the Hecke recursion at prime powers away from the level, the power rule
     * at the level, the Deligne bound at every prime, and |a_q|^2 = q^{k-2}.
     * Throws with a message naming the identity and the witness, e.g.
     * "multiplicativity violated at n=6" or "Deligne bound violated at p=2".
     */
    void validate() const;

    /// (1/X) sum_{n <= X} lambda(n)^2.  Requires 1 <= X <= nmax.
    double rankin_selberg_ratio(u64 X) const;

  private:
    void check_horizon(u64 n) const {
        if (n < 1 || n > nmax_) {
            throw std::out_of_range("coefficient horizon exceeded at n=" + std::to_string(n));
        }
    }

    u64 level_;
    u64 weight_;
    u64 nmax_;
    std::string label_;
    std::vector<i64> a_;
};

}  // namespace deltalab
