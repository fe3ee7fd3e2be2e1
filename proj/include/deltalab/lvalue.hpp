/**
 * @file lvalue.hpp
 * @brief Central values of the twisted series via two-scale smoothed
 *        summation, and the convexity/subconvexity ratio study.
 *
 * The evaluator never assumes a functional equation or root number: it sums
 * the smoothed series sum_n lambda(n) chi(n) n^{-1/2} exp(-n/X) at the two
 * scales X = 3q and X = 6q and gates acceptance on their agreement.  The
 * trivial zeros of the completed function kill every power-of-1/X correction
 * between the scales, so a genuine central value shows a tiny gap while an
 * unstable evaluation is flagged rather than trusted.
 */
#pragma once

#include <string>
#include <vector>

#include "deltalab/arith.hpp"
#include "deltalab/coeffs.hpp"

namespace deltalab {

struct LValueResult {
    cplx value;                   ///< evaluation at the wider scale X = 6q
    double stability_gap = 0.0;   ///< |X=3q evaluation - X=6q evaluation|
    bool accepted = false;        ///< stability_gap < 1e-3 * (1 + |value|)
    u64 truncation = 0;           ///< terms summed at the wider scale
    u64 conductor = 0;            ///< q^2: level times twist modulus
    std::string method = "smoothed-series";
};

/**
 * One smoothing scale: sum_{n <= cut} lambda(n) chi(n) n^{-1/2} e^{-n/X}
 * with cut = min(horizon, 45 X), where the dropped tail is below 1e-18.
 * Throws std::out_of_range when the horizon is under 10 X, the floor at
 * which the truncation error could reach the acceptance gate.
 */
cplx dirichlet_series_smoothed(const HeckeCoefficients& f, const DirichletCharacter& chi,
                               double X);

/// Two-scale evaluation.  Throws std::invalid_argument for the trivial
/// character or a level/modulus mismatch.
LValueResult lvalue_central(const HeckeCoefficients& f, const DirichletCharacter& chi);

struct ExponentStudyRow {
    u64 q = 0;
    std::string chi_index;        ///< "1".."q-2", or "max" for the summary row
    double re = 0.0, im = 0.0, abs = 0.0;
    double stability_gap = 0.0;
    double r_conv = 0.0;          ///< |value| / q^{1/2}
    double r_sub = 0.0;           ///< |value| / q^{1/2 - 1/12}
};

struct ExponentStudy {
    std::vector<ExponentStudyRow> rows;
    std::vector<std::string> errors;   ///< per-file failures, isolated
    std::vector<std::string> flags;    ///< levels whose max ratio looks anomalous
    std::string to_csv() const;
};

/**
 * Loads each coefficient file, evaluates every nontrivial character of its
 * level, and emits one row per character plus a per-level summary row
 * (chi_index = "max") carrying the maximizing character's data.  A level
 * whose ratio max |value| / q^{1/2} exceeds 10 is flagged, not failed; a
 * file that cannot be loaded lands in errors and the rest proceed.
 */
ExponentStudy exponent_study(const std::vector<std::string>& coefficient_files);

}  // namespace deltalab
