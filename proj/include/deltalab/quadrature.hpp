/**
 * @file quadrature.hpp
 * @brief Composite Gauss-Legendre integration with panel doubling until the
 *        value stabilizes.  Panel counts are chosen by the caller from the
 *        integrand's oscillation scale.
 */
#pragma once

#include <functional>

#include "deltalab/numeric.hpp"

namespace deltalab {

struct GLRule {
    std::vector<double> nodes;    ///< on (-1, 1)
    std::vector<double> weights;
};

/// Nodes and weights of the n-point Gauss-Legendre rule, computed once by
/// Newton iteration on P_n and cached.
const GLRule& gl_rule(int n);

///// Single pass: `panels` equal panels of the n-point rule over [a, b].
cplx gl_integrate(const std::function<cplx(double)>& f, double a, double b, int panels,
                  int nodes_per_panel = 24);

struct AdaptiveResult {
    cplx value{0.0, 0.0};
    double error_estimate = 0.0;  ///< |last refinement delta|
    bool converged = false;
    int panels = 0;
};

/// Doubles the panel count until two passes agree within tol (absolute).
AdaptiveResult integrate_adaptive(const std::function<cplx(double)>& f, double a, double b,
                                  int initial_panels, double tol, int max_doublings = 10);

}  // namespace deltalab
