#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "gibbsdiv/stable.hpp"
#include "gibbsdiv/stable_samplers.hpp"
#include "oracles.hpp"

using namespace gibbsdiv;

namespace {

std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i)
        g[i] = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (n - 1.0));
    return g;
}

double ks_against(const std::vector<double>& sorted, const std::function<double(double)>& cdf) {
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = cdf(sorted[i]);
        d = std::max(d, std::abs(f - i / n));
        d = std::max(d, std::abs(f - (i + 1) / n));
    }
    return d;
}

} // namespace

TEST_CASE("alpha construction guards") {
    CHECK_THROWS_AS(Alpha(0.0), std::domain_error);
    CHECK_THROWS_AS(Alpha(1.0), std::domain_error);
    CHECK_THROWS_AS(Alpha(-0.3), std::domain_error);
    CHECK_NOTHROW(Alpha(0.5));
}

TEST_CASE("stable pdf matches the alpha=1/2 closed form") {
    const StableDensity sd(Alpha(0.5));
    // frozen spot value: f_{1/2}(1) = e^{-1/4} / (2 sqrt(pi))
    CHECK(sd.pdf(1.0) == doctest::Approx(0.21969564473386118).epsilon(1e-10));
    for (double t : log_grid(1e-3, 1e3, 100)) {
        INFO("t=", t);
        CHECK(sd.pdf(t) == doctest::Approx(oracle::levy_pdf(t)).epsilon(1e-8));
    }
    CHECK_THROWS_AS(sd.pdf(0.0), std::domain_error);
    CHECK_THROWS_AS(sd.pdf(-2.0), std::domain_error);
    CHECK_THROWS_AS(sd.pdf(std::numeric_limits<double>::infinity()), std::domain_error);
}

TEST_CASE("stable pdf essentially vanishes at the origin") {
    const StableDensity sd(Alpha(0.5));
    CHECK(sd.pdf(1e-4) < 1e-300); // superexponential decay
    CHECK(sd.log_pdf(1e-4) < -2000.0);
}

TEST_CASE("stable right tail follows alpha/Gamma(1-alpha) t^(-alpha-1)") {
    const StableDensity sd(Alpha(0.3));
    const double t = 100.0;
    CHECK(sd.pdf(t) == doctest::Approx(oracle::stable_tail(0.3, t)).epsilon(0.02));
}

TEST_CASE("series and integral branches agree across the crossover") {
    // pdf is continuous to ~1e-8 through the branch switch, and both branches
    // stay positive and finite in a wide band around it
    for (double a : {0.2, 0.5, 0.8, 0.9}) {
        const StableDensity sd((Alpha(a)));
        const double ts = sd.series_threshold();
        const double below = sd.pdf(ts * (1.0 - 1e-9));
        const double above = sd.pdf(ts * (1.0 + 1e-9));
        INFO("alpha=", a, " threshold=", ts);
        CHECK(below == doctest::Approx(above).epsilon(1e-8));
        for (double t : log_grid(0.2 * ts, 5.0 * ts, 11)) {
            const double f = sd.pdf(t);
            CHECK(std::isfinite(f));
            CHECK(f > 0.0);
        }
    }
}

TEST_CASE("stable cdf matches the alpha=1/2 closed form") {
    const StableDensity sd(Alpha(0.5));
    for (double t : log_grid(5e-2, 1e3, 25)) {
        INFO("t=", t);
        CHECK(sd.cdf(t) == doctest::Approx(oracle::levy_cdf(t)).epsilon(1e-9));
    }
}

TEST_CASE("mittag-leffler closed forms at alpha=1/2") {
    const StableDensity sd(Alpha(0.5));
    CHECK(ml_pdf(sd, 1.0) == doctest::Approx(std::exp(-0.25) / std::sqrt(M_PI)).epsilon(1e-10));
    CHECK(ml_pdf(sd, 1.0) == doctest::Approx(0.43939128946772236).epsilon(1e-10));
    // limit s -> 0+: 1/sqrt(pi)
    CHECK(ml_pdf(sd, 1e-8) == doctest::Approx(0.5641895835477563).epsilon(1e-8));
    for (double s : log_grid(1e-3, 30.0, 100)) {
        INFO("s=", s);
        CHECK(ml_pdf(sd, s) == doctest::Approx(oracle::half_ml_pdf(s)).epsilon(1e-8));
    }
    CHECK_THROWS_AS(ml_pdf(sd, 0.0), std::domain_error);
}

TEST_CASE("mittag-leffler pdf equals its own entire series") {
    for (double a : {0.3, 0.5, 0.8}) {
        const StableDensity sd((Alpha(a)));
        for (double s : log_grid(0.05, 2.0, 20)) {
            INFO("alpha=", a, " s=", s);
            CHECK(ml_pdf(sd, s) == doctest::Approx(oracle::ml_series_pdf(a, s)).epsilon(1e-9));
        }
    }
}

TEST_CASE("change-of-variables identity holds as composed") {
    for (double a : {0.25, 0.6, 0.85}) {
        const StableDensity sd((Alpha(a)));
        for (double s : log_grid(0.02, 8.0, 25)) {
            const double direct =
                std::pow(s, -1.0 - 1.0 / a) / a * sd.pdf(std::pow(s, -1.0 / a));
            CHECK(ml_pdf(sd, s) == doctest::Approx(direct).epsilon(5e-13));
        }
    }
}

TEST_CASE("density normalizations") {
    for (double a : {0.2, 0.5, 0.8}) {
        const StableDensity sd((Alpha(a)));
        const double ml_mass = oracle::tanh_sinh_to_inf([&](double s) { return ml_pdf(sd, s); },
                                                        0.0, 1e-13);
        INFO("alpha=", a);
        CHECK(ml_mass == doctest::Approx(1.0).epsilon(1e-8));
        const double st_mass =
            oracle::total_mass_fat_tail([&](double t) { return sd.pdf(std::max(t, 1e-280)); });
        CHECK(st_mass == doctest::Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("tilted mittag-leffler: identities, values, normalization") {
    const StableDensity sd(Alpha(0.5));
    for (double y : {0.3, 1.0, 2.5})
        CHECK(tilted_ml_pdf(sd, 0.0, y) == doctest::Approx(ml_pdf(sd, y)).epsilon(1e-14));
    // Rayleigh form: g_{1/2,1/2}(y) = y e^{-y^2/4} / 2, frozen at y = 2
    CHECK(tilted_ml_pdf(sd, 1.0, 2.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-10));

    for (double a : {0.5, 0.7}) {
        const StableDensity sda((Alpha(a)));
        for (double c : {1.0, 3.0, 10.0}) {
            const double mass = oracle::tanh_sinh_to_inf(
                [&](double y) { return tilted_ml_pdf(sda, c, y); }, 0.0, 1e-13);
            INFO("alpha=", a, " k=", c);
            CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
        }
    }
}

TEST_CASE("tilted stable: identities, values, normalization") {
    const StableDensity sd(Alpha(0.5));
    for (double t : {0.4, 1.0, 7.0})
        CHECK(tilted_stable_pdf(sd, 0.0, t) == doctest::Approx(sd.pdf(t)).epsilon(1e-14));
    // Gamma(3/2)/Gamma(2) * f_{1/2}(1)
    const double expect = 0.88622692545275801 * oracle::levy_pdf(1.0);
    CHECK(tilted_stable_pdf(sd, 1.0, 1.0) == doctest::Approx(expect).epsilon(1e-10));

    const double mass = oracle::total_mass_fat_tail(
        [&](double t) { return tilted_stable_pdf(sd, 2.0, std::max(t, 1e-280)); });
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("mittag-leffler moments: closed form vs quadrature") {
    CHECK(ml_moment(Alpha(0.5), 0.0, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(ml_moment(Alpha(0.5), 0.0, 1.0) == doctest::Approx(1.1283791670955126).epsilon(1e-12));
    CHECK(ml_moment(Alpha(0.5), 1.0, 2.0) == doctest::Approx(4.0).epsilon(1e-12));
    for (double a : {0.3, 0.5, 0.7}) {
        const StableDensity sd((Alpha(a)));
        for (double c : {0.0, 1.0, 3.0}) {
            for (double r : {1.0, 2.0}) {
                const double by_quad = oracle::tanh_sinh_to_inf(
                    [&](double y) { return std::pow(y, r) * tilted_ml_pdf(sd, c, y); }, 0.0,
                    1e-13);
                INFO("alpha=", a, " c=", c, " r=", r);
                CHECK(ml_moment(Alpha(a), c, r) == doctest::Approx(by_quad).epsilon(1e-6));
            }
        }
    }
}

TEST_CASE("kanter sampler: determinism, mean, KS") {
    const StableDensity sd(Alpha(0.5));
    Pcg64 rng1(RandomStream{42, 7});
    Pcg64 rng2(RandomStream{42, 7});
    for (int i = 0; i < 10; ++i) CHECK(sd.sample(rng1) == sd.sample(rng2));

    Pcg64 other(RandomStream{42, 8});
    bool differs = false;
    Pcg64 rng3(RandomStream{42, 7});
    for (int i = 0; i < 10; ++i) differs |= (sd.sample(rng3) != sd.sample(other));
    CHECK(differs);

    const long n = 1000000;
    Pcg64 rng(RandomStream{20260808, 1});
    std::vector<double> draws(n);
    double mean_s = 0.0;
    for (long i = 0; i < n; ++i) {
        draws[i] = sd.sample(rng);
        mean_s += std::pow(draws[i], -0.5);
    }
    mean_s /= n;
    // E[T^(-alpha)] = E[S] = 2/sqrt(pi)
    CHECK(mean_s == doctest::Approx(1.1283791670955126).epsilon(0.005));

    std::sort(draws.begin(), draws.end());
    const double d = ks_against(draws, [&](double t) { return sd.cdf(t); });
    CHECK(d < 0.01);
}

TEST_CASE("tilted-ml sampler: mean, moments, k=0 matches the stable transform") {
    const Alpha a(0.5);
    const TiltedMlSampler tilted(a, 1.0);
    Pcg64 rng(RandomStream{99, 3});
    const long n = 1000000;
    double m1 = 0.0, m2 = 0.0;
    for (long i = 0; i < n; ++i) {
        const double y = tilted.sample(rng);
        m1 += y;
        m2 += y * y;
    }
    m1 /= n;
    m2 /= n;
    // E[Y_{1/2,1}] = 2 Gamma(3/2) = sqrt(pi); E[Y^2] = 4
    CHECK(m1 == doctest::Approx(std::sqrt(M_PI)).epsilon(0.006));
    CHECK(m2 == doctest::Approx(4.0).epsilon(3.0 * std::sqrt((48.0 - 16.0) / n) / 4.0 + 0.004));

    // untilted sampler vs S = T^(-alpha) with exact stable draws
    const TiltedMlSampler untilted(a, 0.0);
    Pcg64 rng_a(RandomStream{99, 4});
    Pcg64 rng_b(RandomStream{99, 5});
    const long nn = 200000;
    std::vector<double> ga(nn), gb(nn);
    const StableDensity& sd = stable_density(a);
    for (long i = 0; i < nn; ++i) {
        ga[i] = untilted.sample(rng_a);
        gb[i] = std::pow(sd.sample(rng_b), -0.5);
    }
    std::sort(ga.begin(), ga.end());
    std::sort(gb.begin(), gb.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < ga.size() && j < gb.size()) {
        if (ga[i] <= gb[j]) ++i;
        else ++j;
        d = std::max(d, std::abs((double)i / nn - (double)j / nn));
    }
    CHECK(d < 0.006); // two-sample 99% bound at 2e5 + tabulation error
}

TEST_CASE("tilted-ml sampler is seed-deterministic") {
    const TiltedMlSampler sampler(Alpha(0.5), 2.0);
    Pcg64 a(RandomStream{314, 15});
    Pcg64 b(RandomStream{314, 15});
    for (int i = 0; i < 10; ++i) CHECK(sampler.sample(a) == sampler.sample(b));
    Pcg64 c(RandomStream{314, 16});
    bool differs = false;
    Pcg64 d(RandomStream{314, 15});
    for (int i = 0; i < 10; ++i) differs |= (sampler.sample(d) != sampler.sample(c));
    CHECK(differs);
}

TEST_CASE("scaled convention rescales consistently") {
    const StableDensity std_sd(Alpha(0.5));
    const StableDensity scaled(Alpha(0.5), StableConvention(2.0));
    for (double t : {0.5, 1.0, 4.0}) {
        CHECK(scaled.pdf(t) == doctest::Approx(0.5 * std_sd.pdf(t / 2.0)).epsilon(1e-12));
        CHECK(scaled.cdf(t) == doctest::Approx(std_sd.cdf(t / 2.0)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(StableConvention(0.0), std::domain_error);
}
