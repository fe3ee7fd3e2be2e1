/**
 * @file transforms.hpp
 * @brief Fourier and Hankel-type transforms of the smooth weights, fast
 *        grid-backed evaluators with recorded error budgets, and the two
 *        summation-formula verifiers (Poisson over residue classes, the
 *        level-aware dual expansion of twisted coefficient sums).
 */
#pragma once

#include <functional>
#include <optional>
#include <string>

#include "deltalab/arith.hpp"
#include "deltalab/coeffs.hpp"
#include "deltalab/quadrature.hpp"

namespace deltalab {

/// hat{w}(y) = integral of w(x) e(-x y) over [a, b], adaptive, absolute
/// error target tol (reported bound is the achieved refinement delta).
SumValue fourier_hat(const std::function<double(double)>& w, double a, double b, double y,
                     double tol = 1e-10);

/// Transform of the bump W on [1, 2].
SumValue fourier_hat_W(double y, double tol = 1e-10);

/// f^+(y) = integral of f(x) 2 pi i^k J_{k-1}(4 pi sqrt(x y)) over [a, b].
/// Real because k is even.
SumValue hankel_plus(const std::function<double(double)>& f, double a, double b, unsigned k,
                     double y, double tol = 1e-10);

/// Transform of the plateau U on [1/2, 9] at weight k = 2, by direct
/// quadrature.
SumValue uplus_direct(double w, double tol = 1e-12);

/**
 * Grid of hat{W} on a nonuniform mesh, 4-point Lagrange interpolation.
 * Mesh spacing tracks the decay envelope so the interpolation error stays
 * below kBudget; values beyond y_max() are below kTailFloor in magnitude
 * and are returned as 0.
 */
class WHatGrid {
  public:
    static constexpr double kBudget = 5e-11;
    static constexpr double kTailFloor = 1e-14;

    static const WHatGrid& instance();

    cplx value(double y) const;
    double envelope(double y) const;  ///< monotone upper bound for |hat W| on [|y|, inf)
    double y_max() const { return y_max_; }

  private:
    WHatGrid();
    struct Segment {
        double start, h;
        std::vector<double> re, im, env;
    };
    std::vector<Segment> segs_;
    double y_max_;
};

/**
 * Fast evaluation of U^+(w): direct adaptive quadrature below the seam at
 * w = 16, a Filon scheme beyond.  In the Filon regime the J_1 kernel is
 * replaced by its large-argument amplitude times e^(i lambda s) with s =
 * sqrt(t) and lambda = 4 pi sqrt(w); the smooth amplitude is projected on
 * Legendre polynomials per panel and the polynomial-times-exponential
 * moments are spherical Bessel values, so the cost is a few hundred
 * amplitude evaluations independent of w.  Absolute accuracy is near
 * 1e-12 at any w.
 */
double uplus(double w);

/**
 * Measured decay envelope of |U^+|: a dense sampled table up to
 * table_max(), extended beyond by a fitted model exp(b0 - b1 w^{1/4})
 * times a safety factor.  The quarter-power exponent matches the
 * Gevrey-2 regularity of the mollifier-built weight: the transform decays
 * faster than any power of w but slower than exponentially, so a fitted
 * power-law constant cannot certify truncation tails at reasonable cost.
 * bound() is what the dual-sum truncation certificates use.
 */
class UPlusEnvelope {
  public:
    static const UPlusEnvelope& instance();

    double bound(double w) const;  ///< monotone nonincreasing upper bound for |U^+| on [w, inf)
    double table_max() const { return table_max_; }
    double model_b0() const { return b0_; }
    double model_b1() const { return b1_; }

    /// sum over m > m_stop of 2 sqrt(m) * pref * bound(scale * m): the
    /// certificate for dropped dual-sum mass under |lambda(m)| <= d(m) <=
    /// 2 sqrt(m).
    double tail_sum(i64 m_stop, double scale, double pref) const;

  private:
    UPlusEnvelope();
    std::vector<double> w_, env_;
    double table_max_;
    double b0_, b1_;
};

/// One verification record; serialized by the reporting layer.
struct VerifyReport {
    std::string name;
    cplx lhs{0.0, 0.0};
    cplx rhs{0.0, 0.0};
    double abs_diff = 0.0;
    double rel_diff = 0.0;
    double claimed_bound = 0.0;   ///< tolerance the verdict compares against
    double tail_bound = 0.0;      ///< bound on the mass dropped by truncation
    i64 truncation = 0;           ///< index radius actually summed
    cplx fitted_eta{0.0, 0.0};
    bool eta_was_fitted = false;
    bool pass = false;
    std::vector<std::pair<std::string, std::string>> params;
};

/**
 * Dual-route check of summation by residue classes mod [c, q]:
 * LHS = sum over n of chi(n) e(-alpha n ell^2 / c) W(n / N), direct;
 * RHS = (N/[c,q]) g_chi sum over the arithmetic progression picked out by
 * the collapsed beta-sum, with hat W evaluated on the grid.
 * Requires primitive chi and (alpha, c) = 1.
 */
VerifyReport poisson_verify(const DirichletCharacter& chi, i64 alpha, u64 ell, u64 c, double N);

/**
 * Dual-route check of the twisted coefficient sum against its level-aware
 * dual expansion: LHS = sum over m of lambda(m) e(alpha m / c) U(m / D);
 * RHS = (eta / (c sqrt(q2))) sum over m of lambda(m) e(-inv(alpha q2) m / c)
 *       D U^+(D m / (q2 c^2)),
 * q1 = (c, q), q2 = q / q1.  When eta is absent it is fitted from the ratio
 * and reported; when present the agreement is a genuine two-route identity.
 * Dual truncation stops once the envelope bound on a term drops below 1e-9
 * times the accumulated head, and tail_bound records the certified
 * remainder from UPlusEnvelope::tail_sum.
 */
VerifyReport voronoi_verify(const HeckeCoefficients& f, i64 alpha, u64 c, double dilation,
                            std::optional<cplx> eta = std::nullopt);

}  // namespace deltalab
