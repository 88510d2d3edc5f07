#pragma once

namespace evacc::special {

/// psi(x) for x > 0: upward recurrence to x >= 6, then the asymptotic series.
double digamma(double x);

/// psi'(x) for x > 0, same scheme as digamma.
double trigamma(double x);

/// ln B(a, b) = lgamma(a) + lgamma(b) - lgamma(a + b).
double log_beta(double a, double b);

}  // namespace evacc::special
