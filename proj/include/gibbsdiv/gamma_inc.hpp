#pragma once

#include <cmath>

#include "gibbsdiv/common.hpp"

namespace gibbsdiv {

// Exponential integral E1(x), x > 0.
double exp_integral_e1(double x);

// Upper incomplete gamma Gamma(a; x) = int_x^inf u^(a-1) e^(-u) du for real a
// (negative a via the downward recursion Gamma(a,x) = (Gamma(a+1,x) - x^a e^-x)/a,
// a = 0 via E1).  The value is always positive; log_upper_gamma never over- or
// underflows on the supported domain a in [-60, 60], x in [1e-6, 1e3].
double log_upper_gamma(double a, double x);
double upper_gamma(double a, double x);

// Q(a, x) = Gamma(a; x) / Gamma(a) for a > 0 (chi-square tail probabilities).
double regularized_gamma_q(double a, double x);

// Generalized rising factorial in log form: log (a)_x = lgamma(a+x) - lgamma(a).
inline double log_rising(double a, double x) { return std::lgamma(a + x) - std::lgamma(a); }

} // namespace gibbsdiv
