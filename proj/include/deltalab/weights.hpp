/**
 * @file weights.hpp
 * @brief Smooth compactly supported weights built from the standard
 *        mollifier exp(-1/t): a bump W on [1,2], a plateau V equal to 1 on
 *        [1,2] inside [1/2,3], and a plateau U equal to 1 on [1,8] inside
 *        [1/2,9].  All values lie in [0,1].
 */
#pragma once

#include <cmath>

namespace deltalab {

inline double mollifier(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

/// C-infinity step: 0 for t <= 0, 1 for t >= 1, strictly increasing between.
inline double smooth_step(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    double a = mollifier(t);
    double b = mollifier(1.0 - t);
    return a / (a + b);
}

/// Bump supported on [1,2], maximum 1 at x = 3/2.
inline double weight_W(double x) { return smooth_step(2.0 * (x - 1.0)) * smooth_step(2.0 * (2.0 - x)); }

/// Plateau: 1 on [1,2], supported on [1/2,3].
inline double weight_V(double x) { return smooth_step(2.0 * x - 1.0) * smooth_step(3.0 - x); }

/// Plateau: 1 on [1,8], supported on [1/2,9].
inline double weight_U(double x) { return smooth_step(2.0 * x - 1.0) * smooth_step(9.0 - x); }

}  // namespace deltalab
