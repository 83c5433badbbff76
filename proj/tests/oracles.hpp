#pragma once

// Test-side oracles, deliberately independent of the library's quadrature
// and evaluation paths: a tanh-sinh integrator, elementary closed forms at
// alpha = 1/2, series evaluations, and brute-force enumerators.

#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

// Tanh-sinh quadrature on (a, b); handles endpoint singularities.
inline double tanh_sinh(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-12) {
    const double c = 0.5 * (b - a), mid = 0.5 * (a + b);
    auto node_sum = [&](double t) { // w(t) [f(x_-) + f(x_+)], guarded
        const double u = 0.5 * M_PI * std::sinh(t);
        const double x = std::tanh(u);
        const double w = 0.5 * M_PI * std::cosh(t) / std::pow(std::cosh(u), 2);
        const double xl = mid - c * x, xr = mid + c * x;
        double fl = (xl > a && xl < b) ? f(xl) : 0.0;
        double fr = (xr > a && xr < b) ? f(xr) : 0.0;
        if (!std::isfinite(fl)) fl = 0.0;
        if (!std::isfinite(fr)) fr = 0.0;
        return w * (fl + fr);
    };
    double h = 1.0;
    double sum = 0.5 * M_PI * f(mid); // j = 0
    for (int j = 1; j * h <= 6.5; ++j) sum += node_sum(j * h);
    double integral = sum * h * c;
    for (int level = 1; level <= 12; ++level) {
        h *= 0.5;
        double add = 0.0;
        for (int j = 1; j * h <= 6.5; j += 2) add += node_sum(j * h);
        const double next = 0.5 * integral + add * h * c;
        const bool settled = std::abs(next - integral) < tol * std::abs(next);
        integral = next;
        if (level >= 5 && settled) break;
    }
    return integral;
}

// Semi-infinite integral via u -> x = lo + u/(1-u).
inline double tanh_sinh_to_inf(const std::function<double(double)>& f, double lo,
                               double tol = 1e-12) {
    auto g = [&](double u) {
        const double x = lo + u / (1.0 - u);
        return f(x) / ((1.0 - u) * (1.0 - u));
    };
    return tanh_sinh(g, 0.0, 1.0, tol);
}

// Elementary alpha = 1/2 forms.
inline double levy_pdf(double t) {
    return std::exp(-0.25 / t) / (2.0 * std::sqrt(M_PI) * std::pow(t, 1.5));
}
inline double half_ml_pdf(double s) { return std::exp(-0.25 * s * s) / std::sqrt(M_PI); }
inline double levy_cdf(double t) { return std::erfc(0.5 / std::sqrt(t)); }

// First-order right-tail asymptote of the stable density.
inline double stable_tail(double alpha, double t) {
    return alpha / std::tgamma(1.0 - alpha) * std::pow(t, -alpha - 1.0);
}

// Mittag-Leffler density by its entire power series (usable for moderate s;
// an implementation-independent route to g_alpha).  The stopping rule uses
// the sin-free envelope: individual terms vanish at sin(pi k alpha) = 0
// without the series having converged.
inline double ml_series_pdf(double alpha, double s) {
    double sum = 0.0;
    double sk = 1.0; // s^(k-1)
    for (int k = 1; k < 400; ++k) {
        const double env = std::exp(std::lgamma(k * alpha + 1.0) - std::lgamma(k + 1.0)) / M_PI;
        const double term =
            (k % 2 == 1 ? 1.0 : -1.0) * env * std::sin(M_PI * k * alpha) * sk;
        sum += term;
        if (k > 8 && env * sk < 1e-17 * std::abs(sum)) break;
        sk *= s;
    }
    return sum / alpha;
}

// Mass of a density with a polynomial upper tail ~ t^(-1-idx): compactify
// the tail via t = u^(-p); any p >= 1/idx regularizes the endpoint.
inline double total_mass_fat_tail(const std::function<double(double)>& pdf, double p = 6.0) {
    const double head = tanh_sinh(pdf, 0.0, 1.0, 1e-13);
    const double tail = tanh_sinh(
        [&](double u) {
            return p * pdf(std::pow(u, -p)) * std::pow(u, -p - 1.0);
        },
        0.0, 1.0, 1e-13);
    return head + tail;
}

// All set partitions of {0..n-1} as restricted-growth strings; calls visit
// with the multiset of block sizes.
inline void for_each_set_partition(int n, const std::function<void(const std::vector<long>&)>& visit) {
    std::vector<int> rgs(n, 0);
    std::vector<long> sizes;
    auto emit = [&]() {
        int k = 0;
        for (int v : rgs) k = std::max(k, v + 1);
        sizes.assign(k, 0);
        for (int v : rgs) ++sizes[v];
        visit(sizes);
    };
    // iterate restricted growth strings: rgs[0] = 0, rgs[i] <= max(rgs[0..i-1]) + 1
    for (;;) {
        emit();
        int i = n - 1;
        for (; i > 0; --i) {
            int maxv = 0;
            for (int j = 0; j < i; ++j) maxv = std::max(maxv, rgs[j]);
            if (rgs[i] <= maxv) break;
        }
        if (i == 0) return;
        ++rgs[i];
        for (int j = i + 1; j < n; ++j) rgs[j] = 0;
    }
}

} // namespace oracle
