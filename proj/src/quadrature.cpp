#include "deltalab/quadrature.hpp"

#include <map>
#include <mutex>

namespace deltalab {

namespace {

GLRule build_rule(int n) {
    constexpr long double pi = 3.141592653589793238462643383279502884L;
    GLRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        long double x = std::cos(pi * (static_cast<long double>(i) + 0.75L) /
                                 (static_cast<long double>(n) + 0.5L));
        long double dp = 0.0L;
        for (int iter = 0; iter < 100; ++iter) {
            long double p0 = 1.0L, p1 = x;
            for (int j = 2; j <= n; ++j) {
                long double p2 = ((2.0L * j - 1.0L) * x * p1 - (j - 1.0L) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0L);
            long double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-21L) {
                p0 = 1.0L;
                p1 = x;
                for (int j = 2; j <= n; ++j) {
                    long double p2 = ((2.0L * j - 1.0L) * x * p1 - (j - 1.0L) * p0) / j;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0L);
                break;
            }
        }
        rule.nodes[i] = static_cast<double>(x);
        rule.weights[i] = static_cast<double>(2.0L / ((1.0L - x * x) * dp * dp));
    }
    return rule;
}

}  // namespace

const GLRule& gl_rule(int n) {
    static std::mutex mu;
    static std::map<int, GLRule> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, build_rule(n)).first;
    return it->second;
}

cplx gl_integrate(const std::function<cplx(double)>& f, double a, double b, int panels,
                  int nodes_per_panel) {
    if (panels < 1) panels = 1;
    const GLRule& rule = gl_rule(nodes_per_panel);
    std::vector<cplx> partial(panels);
    double width = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        double lo = a + p * width;
        double mid = lo + width / 2.0;
        double half = width / 2.0;
        KahanSumC acc;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            acc.add(rule.weights[i] * f(mid + half * rule.nodes[i]));
        }
        partial[p] = acc.value() * half;
    }
    return pairwise_sum(partial);
}

AdaptiveResult integrate_adaptive(const std::function<cplx(double)>& f, double a, double b,
                                  int initial_panels, double tol, int max_doublings) {
    AdaptiveResult out;
    if (initial_panels < 1) initial_panels = 1;
    int panels = initial_panels;
    cplx prev = gl_integrate(f, a, b, panels);
    double delta = 0.0;
    for (int d = 0; d < max_doublings; ++d) {
        panels *= 2;
        cplx cur = gl_integrate(f, a, b, panels);
        delta = std::abs(cur - prev);
        if (delta <= tol) {
            out.value = cur;
            out.error_estimate = delta;
            out.converged = true;
            out.panels = panels;
            return out;
        }
        prev = cur;
    }
    out.value = prev;
    out.error_estimate = delta;
    out.converged = false;
    out.panels = panels;
    return out;
}

}  // namespace deltalab
