#pragma once

#include <functional>
#include <vector>

#include "gibbsdiv/common.hpp"

namespace gibbsdiv {

struct QuadOptions {
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    // First-pass subdivision budget; escalated once (x4) before giving up.
    int max_segments = 1500;
    bool throw_on_failure = true;
};

struct QuadResult {
    double value = 0.0;
    double abs_error = 0.0;
    long evaluations = 0;
    int segments = 0;
    bool converged = false;
};

// Adaptive Gauss-Kronrod (G7/K15) on a finite interval.
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     const QuadOptions& opts = {});

// Same rule applied to exp(f_log - M) with M the running maximum of f_log,
// so integrands spanning thousands of orders of magnitude stay conditioned.
// Returns log of the integral (-inf for a numerically zero integral).
// `splits` are interior points the caller knows to be features.
double integrate_log(const std::function<double(double)>& f_log, double a, double b,
                     const std::vector<double>& splits = {}, const QuadOptions& opts = {});

// log of the integral over (0, inf) of exp(f_log(x)) dx, computed through the
// substitution x = e^w after a scan locates the peak and a window outside
// which the integrand is negligible.  Intended for smooth log-concave-ish
// integrands (weight integrals, normalizers).
double integrate_log_positive_axis(const std::function<double(double)>& f_log,
                                   const QuadOptions& opts = {});

} // namespace gibbsdiv
