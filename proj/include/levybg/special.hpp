#pragma once

#include <cmath>

namespace levybg {

// G(alpha) = Gamma(1-alpha) cos(pi alpha / 2) for alpha in (0,2). The product
// has a removable singularity at alpha = 1 (limit pi/2); evaluate through
// Gamma(2-alpha) sin(pi(1-alpha)/2) / (1-alpha) which is smooth on (0,2).
inline double gamma_cos_factor(double alpha) {
    const double q = 1.0 - alpha;
    const double g2 = std::tgamma(2.0 - alpha);
    const double x = 0.5 * M_PI * q;
    if (std::abs(q) < 1e-8) {
        // sin(x)/q = (pi/2)(1 - x^2/6)
        return g2 * 0.5 * M_PI * (1.0 - x * x / 6.0);
    }
    return g2 * std::sin(x) / q;
}

// digamma for strictly positive argument (upward recurrence + asymptotic tail).
inline double digamma(double x) {
    double r = 0.0;
    while (x < 6.0) {
        r -= 1.0 / x;
        x += 1.0;
    }
    const double x1 = 1.0 / x, x2 = x1 * x1;
    return r + std::log(x) - 0.5 * x1 -
           x2 * (1.0 / 12.0 - x2 * (1.0 / 120.0 - x2 * (1.0 / 252.0 - x2 / 240.0)));
}

// d/dalpha of gamma_cos_factor, smooth through alpha = 1.
// G(alpha) = Gamma(2-alpha) S(q), q = 1-alpha, S(q) = sin(pi q/2)/q.
inline double gamma_cos_factor_dalpha(double alpha) {
    const double q = 1.0 - alpha;
    const double g2 = std::tgamma(2.0 - alpha);
    const double psi2 = digamma(2.0 - alpha);
    double S, dS;  // S(q) and S'(q)
    const double x = 0.5 * M_PI * q;
    if (std::abs(q) < 1e-5) {
        const double c = 0.5 * M_PI;
        S = c * (1.0 - x * x / 6.0);
        dS = -c * c * c * q / 3.0 * (1.0 - x * x / 10.0);
    } else {
        S = std::sin(x) / q;
        dS = (0.5 * M_PI * std::cos(x) * q - std::sin(x)) / (q * q);
    }
    // dG/dalpha = -Gamma'(2-alpha) S - Gamma(2-alpha) S'(q)
    return -g2 * psi2 * S - g2 * dS;
}

}  // namespace levybg
