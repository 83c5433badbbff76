#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gibbsdiv/gamma_inc.hpp"
#include "gibbsdiv/quadrature.hpp"
#include "oracles.hpp"

using namespace gibbsdiv;

TEST_CASE("gauss-kronrod on smooth integrands") {
    auto res = integrate([](double x) { return std::sin(x); }, 0.0, M_PI);
    CHECK(res.value == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("gauss-kronrod polynomial value") {
    // int_{-1}^{3} (x^3 - 2x + 1) dx = [x^4/4 - x^2 + x] = (81/4 - 9 + 3) - (1/4 - 1 - 1)
    const double expect = (81.0 / 4.0 - 9.0 + 3.0) - (0.25 - 1.0 - 1.0);
    auto res = integrate([](double x) { return x * x * x - 2.0 * x + 1.0; }, -1.0, 3.0);
    CHECK(res.value == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("log-domain integration of a narrow gaussian") {
    // integral of exp(-(x-2)^2 / (2 sigma^2)) over (0, 40) with sigma = 1e-6
    const double sigma = 1e-6;
    auto f_log = [&](double x) {
        const double z = (x - 2.0) / sigma;
        return -0.5 * z * z;
    };
    QuadOptions tight;
    tight.rel_tol = 1e-11;
    const double got = integrate_log(f_log, 0.0, 40.0, {2.0}, tight);
    const double expect = std::log(std::sqrt(2.0 * M_PI) * sigma);
    CHECK(got == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("positive-axis log integration reproduces the gamma function") {
    for (double a : {0.7, 4.5, 60.0}) {
        auto f_log = [&](double x) { return (a - 1.0) * std::log(x) - x; };
        CHECK(integrate_log_positive_axis(f_log) ==
              doctest::Approx(std::lgamma(a)).epsilon(1e-9));
    }
}

TEST_CASE("quadrature failure carries diagnostics") {
    QuadOptions opts;
    opts.max_segments = 4;
    opts.rel_tol = 1e-14;
    auto nasty = [](double x) { return std::cos(500.0 * x) / std::sqrt(std::abs(x) + 1e-12); };
    CHECK_THROWS_AS(integrate(nasty, 0.0, 1.0, opts), numeric_error);
}

TEST_CASE("exponential integral") {
    // E1(1) = 0.219383934395520274 (frozen; agrees with the quadrature oracle)
    CHECK(exp_integral_e1(1.0) == doctest::Approx(0.21938393439552026).epsilon(1e-13));
    const double direct = oracle::tanh_sinh_to_inf(
        [](double t) { return std::exp(-t) / t; }, 1.0);
    CHECK(exp_integral_e1(1.0) == doctest::Approx(direct).epsilon(1e-11));
    CHECK(exp_integral_e1(12.0) ==
          doctest::Approx(oracle::tanh_sinh_to_inf(
                              [](double t) { return std::exp(-t) / t; }, 12.0))
              .epsilon(1e-11));
    CHECK_THROWS_AS(exp_integral_e1(0.0), std::domain_error);
}

namespace {

// Scaled oracle for log Gamma(a; x): factor the integrand maximum out.
double oracle_log_upper_gamma(double a, double x) {
    const double tstar = std::max(x, a - 1.0);
    const double m = (a - 1.0) * std::log(tstar) - tstar;
    const double scaled = oracle::tanh_sinh_to_inf(
        [&](double t) { return std::exp((a - 1.0) * std::log(t) - t - m); }, x, 1e-13);
    return m + std::log(scaled);
}

} // namespace

TEST_CASE("upper incomplete gamma closed forms") {
    for (double x : {1e-4, 0.3, 1.0, 7.5, 300.0})
        CHECK(log_upper_gamma(1.0, x) == doctest::Approx(-x).epsilon(1e-12));

    // Gamma(0; 1) = E1(1); one recursion step: Gamma(-1; 1) = e^-1 - E1(1)
    CHECK(upper_gamma(0.0, 1.0) == doctest::Approx(0.21938393439552026).epsilon(1e-12));
    CHECK(upper_gamma(-1.0, 1.0) == doctest::Approx(0.14849550677592205).epsilon(1e-10));
}

TEST_CASE("upper incomplete gamma against the quadrature oracle") {
    const double as[] = {-59.5, -17.25, -5.5,  -2.0, -1.0, -0.4, 0.0,
                         0.35,  1.0,    2.625, 8.0,  31.5, 60.0};
    const double xs[] = {1e-6, 1e-3, 0.05, 0.4, 1.0, 2.2, 9.0, 55.0, 1e3};
    for (double a : as) {
        for (double x : xs) {
            const double lg = log_upper_gamma(a, x);
            const double lo = oracle_log_upper_gamma(a, x);
            INFO("a=", a, " x=", x, " got=", lg, " oracle=", lo);
            CHECK(lg == doctest::Approx(lo).epsilon(2e-10));
        }
    }
}

TEST_CASE("regularized Q matches the ratio") {
    for (double a : {0.5, 3.0, 17.0})
        for (double x : {0.2, 2.0, 30.0}) {
            const double q = regularized_gamma_q(a, x);
            const double ref = std::exp(log_upper_gamma(a, x) - std::lgamma(a));
            CHECK(q == doctest::Approx(ref).epsilon(1e-11));
        }
}
