#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "gibbsdiv/mc.hpp"
#include "gibbsdiv/gamma_inc.hpp"
#include "oracles.hpp"

using namespace gibbsdiv;

TEST_CASE("grow_partition basics") {
    const GibbsModel pd = GibbsModel::poisson_dirichlet(Alpha(0.5), 0.5);
    const WeightTable t = WeightTable::build(pd, 16);
    Pcg64 rng(RandomStream{13, 1});
    const PartitionState one = grow_partition(t, 1, rng);
    CHECK(one.n == 1);
    CHECK(one.k() == 1);

    // PD(0.5, 0.5): P(K_2 = 2) = (theta+alpha)/(theta+1) = 2/3
    long two_blocks = 0;
    const long reps = 100000;
    for (long r = 0; r < reps; ++r) {
        Pcg64 rr(RandomStream{13, static_cast<std::uint64_t>(r + 2)});
        if (grow_partition(t, 2, rr).k() == 2) ++two_blocks;
    }
    const double p_hat = static_cast<double>(two_blocks) / reps;
    CHECK(p_hat == doctest::Approx(2.0 / 3.0).epsilon(0.01));
    CHECK_THROWS_AS(grow_partition(t, 16, rng), std::out_of_range);
}

TEST_CASE("grow_partition block-count law matches V * S") {
    const GibbsModel pd = GibbsModel::poisson_dirichlet(Alpha(0.5), 1.0);
    const WeightTable t = WeightTable::build(pd, 8);
    const StirlingTriangle st(Alpha(0.5), 8);
    const long n = 6, reps = 100000;
    std::vector<long> counts(n + 1, 0);
    for (long r = 0; r < reps; ++r) {
        Pcg64 rr(RandomStream{404, static_cast<std::uint64_t>(r)});
        ++counts[grow_partition(t, n, rr).k()];
    }
    std::vector<long> observed(counts.begin() + 1, counts.end());
    std::vector<double> probs;
    for (long k = 1; k <= n; ++k) probs.push_back(block_count_pmf(t, st, n, k));
    const double p = chi_square_gof_pvalue(observed, probs);
    INFO("p-value ", p);
    CHECK(p > 0.001);
}

TEST_CASE("conditional chain: edge cases and one-step mean") {
    const PdPredictionSource src(Alpha(0.5), 1.0);
    Pcg64 rng(RandomStream{7, 7});
    CHECK(conditional_block_chain(src, ConditioningState(10, 3), 0, rng) == 0);

    // E[new blocks in m = 1] = (theta + k alpha)/(theta + n)
    const long reps = 200000;
    long news = 0;
    for (long r = 0; r < reps; ++r) {
        Pcg64 rr(RandomStream{8, static_cast<std::uint64_t>(r)});
        news += conditional_block_chain(src, ConditioningState(10, 3), 1, rr);
    }
    const double expect = (1.0 + 3 * 0.5) / (1.0 + 10.0);
    CHECK(static_cast<double>(news) / reps == doctest::Approx(expect).epsilon(0.02));
}

TEST_CASE("conditional chain matches exhaustive path enumeration") {
    // all 2^m paths of the (n', k') chain give the exact distribution
    const double alpha = 0.5, theta = 1.0;
    const long n0 = 10, k0 = 3, m = 5;
    std::vector<double> exact(m + 1, 0.0);
    for (unsigned mask = 0; mask < (1u << m); ++mask) {
        double prob = 1.0;
        long n = n0, k = k0, news = 0;
        for (long step = 0; step < m; ++step) {
            const double p_new = (theta + k * alpha) / (theta + n);
            if (mask & (1u << step)) {
                prob *= p_new;
                ++k;
                ++news;
            } else {
                prob *= 1.0 - p_new;
            }
            ++n;
        }
        exact[news] += prob;
    }
    const PdPredictionSource src(Alpha(alpha), theta);
    const long reps = 100000;
    std::vector<long> observed(m + 1, 0);
    for (long r = 0; r < reps; ++r) {
        Pcg64 rr(RandomStream{99, static_cast<std::uint64_t>(r)});
        ++observed[conditional_block_chain(src, ConditioningState(n0, k0), m, rr)];
    }
    const double p = chi_square_gof_pvalue(observed, exact);
    INFO("p-value ", p);
    CHECK(p > 0.001);
}

TEST_CASE("chain equals rejection-conditioned growth") {
    const GibbsModel pd = GibbsModel::poisson_dirichlet(Alpha(0.5), 1.0);
    const WeightTable table = WeightTable::build(pd, 14);
    const long n0 = 7, k0 = 3, m = 5, reps = 100000;

    std::vector<long> from_chain(m + 1, 0);
    for (long r = 0; r < reps; ++r) {
        Pcg64 rr(RandomStream{606, static_cast<std::uint64_t>(r)});
        ++from_chain[conditional_block_chain(table, ConditioningState(n0, k0), m, rr)];
    }

    std::vector<long> from_rejection(m + 1, 0);
    long accepted = 0;
    for (std::uint64_t r = 0; accepted < reps && r < 50u * reps; ++r) {
        Pcg64 rr(RandomStream{607, r});
        const PartitionState base = grow_partition(table, n0, rr);
        if (base.k() != k0) continue;
        // continue the same partition m more steps, counting new blocks
        PartitionState ext = base;
        long news = 0;
        const double a = 0.5;
        while (ext.n < n0 + m) {
            const Prediction p = predict_probs(table, ext.n, ext.k());
            double u = rr.uniform();
            if (u < p.p_new) {
                ext.block_sizes.push_back(1);
                ++news;
            } else {
                u -= p.p_new;
                bool placed = false;
                for (long& b : ext.block_sizes) {
                    const double w = (b - a) * p.existing_per_unit;
                    if (u < w) {
                        ++b;
                        placed = true;
                        break;
                    }
                    u -= w;
                }
                if (!placed) ++ext.block_sizes.back();
            }
            ++ext.n;
        }
        ++from_rejection[news];
        ++accepted;
    }
    REQUIRE(accepted == reps);
    const double p = chi_square_two_sample_pvalue(from_chain, from_rejection);
    INFO("two-sample p-value ", p);
    CHECK(p > 0.001);
}

TEST_CASE("empirical diversity: determinism and worker invariance") {
    const PdPredictionSource src(Alpha(0.5), 1.0);
    const ConditioningState st(10, 3);
    const DiversitySample s1 = empirical_diversity(src, st, 200, 500, RandomStream{42, 0}, 1);
    const DiversitySample s2 = empirical_diversity(src, st, 200, 500, RandomStream{42, 0}, 4);
    CHECK(s1.values == s2.values);
    const DiversitySample s3 = empirical_diversity(src, st, 200, 500, RandomStream{43, 0}, 1);
    CHECK(s1.values != s3.values);
    // m = 0 gives all-zero values
    const DiversitySample s0 = empirical_diversity(src, st, 0, 10, RandomStream{42, 0}, 1);
    for (double v : s0.values) CHECK(v == 0.0);
}

TEST_CASE("empirical moments against the finite-m closed form") {
    const Alpha a(0.5);
    const double theta = 1.0;
    const ConditioningState st(10, 3);
    const PdPredictionSource src(a, theta);
    const long m = 2000, reps = 20000;
    const DiversitySample s = empirical_diversity(src, st, m, reps, RandomStream{500, 0}, 1);
    const MomentSequence ms = empirical_moments(s, 2);
    CHECK(ms.values[0] == 1.0);
    const double target = pd_expected_new_blocks(a, theta, st, m) / std::pow(m, 0.5);
    INFO("mean ", ms.values[1], " +- ", ms.std_errors[1], " target ", target);
    CHECK(std::abs(ms.values[1] - target) < 3.5 * ms.std_errors[1]);
    // SE shrinks like 1/sqrt(reps)
    const DiversitySample small =
        empirical_diversity(src, st, m, reps / 10, RandomStream{500, 0}, 1);
    const MomentSequence ms_small = empirical_moments(small, 1);
    const double ratio = ms_small.std_errors[1] / ms.std_errors[1];
    CHECK(ratio == doctest::Approx(std::sqrt(10.0)).epsilon(0.30));
}

TEST_CASE("doubling m drifts the empirical mean toward the limit") {
    const Alpha a(0.5);
    const double theta = 1.0;
    const ConditioningState st(10, 3);
    const PdPredictionSource src(a, theta);
    const double limit = pd_conditional_moment(a, theta, st, 1.0);

    // the exact finite-m mean increases monotonically toward the limit
    double prev = 0.0;
    for (long m : {500L, 1000L, 2000L, 4000L}) {
        const double em = pd_expected_new_blocks(a, theta, st, m) / std::pow(m, 0.5);
        CHECK(em > prev);
        CHECK(em < limit);
        prev = em;
    }

    // empirical means track the same direction within noise
    const long reps = 20000;
    const DiversitySample s1 = empirical_diversity(src, st, 500, reps, RandomStream{72, 0}, 1);
    const DiversitySample s2 = empirical_diversity(src, st, 4000, reps, RandomStream{73, 0}, 1);
    const MomentSequence m1 = empirical_moments(s1, 1);
    const MomentSequence m2 = empirical_moments(s2, 1);
    CHECK(m2.values[1] - m1.values[1] >
          0.5 * (pd_expected_new_blocks(a, theta, st, 4000) / std::pow(4000.0, 0.5) -
                 pd_expected_new_blocks(a, theta, st, 500) / std::pow(500.0, 0.5)));
}

TEST_CASE("ks statistic: null case and coverage errors") {
    auto exp_log_pdf = [](double s) { return -s; };
    const DensityGrid g = DensityGrid::build(exp_log_pdf, 0.01, 10.0);
    Pcg64 rng(RandomStream{9, 9});
    const long n = 20000;
    std::vector<double> draws(n);
    for (long i = 0; i < n; ++i) draws[i] = g.sample(rng);
    const double d = ks_statistic(draws, g);
    CHECK(d < 1.63 / std::sqrt(static_cast<double>(n)));

    // deliberate mismatch has power
    std::vector<double> shifted(draws);
    for (double& v : shifted) v *= 1.35;
    CHECK(ks_statistic(shifted, g, 0.05) > 0.1);

    // a sample escaping the grid triggers the coverage error
    std::vector<double> off(draws);
    for (std::size_t i = 0; i < off.size() / 100; ++i) off[i] = 1e6;
    CHECK_THROWS_AS(ks_statistic(off, g), std::out_of_range);
}

TEST_CASE("two-sample ks on identical streams is small") {
    Pcg64 rng(RandomStream{77, 1});
    std::vector<double> a(50000), b(50000);
    for (auto& v : a) v = rng.gamma(2.5);
    for (auto& v : b) v = rng.gamma(2.5);
    CHECK(two_sample_ks(a, b) < 0.012);
    for (auto& v : b) v *= 1.2;
    CHECK(two_sample_ks(a, b) > 0.05);
}

TEST_CASE("prediction sources expose the same rule") {
    const GibbsModel pd = GibbsModel::poisson_dirichlet(Alpha(0.5), 1.0);
    const WeightTable table = WeightTable::build(pd, 30);
    const TablePredictionSource ts(table);
    const PdPredictionSource ps(Alpha(0.5), 1.0);
    for (long n : {1L, 7L, 20L}) {
        for (long k = 1; k <= n; k += std::max<long>(1, n / 3)) {
            const Prediction a = ts.predict(n, k);
            const Prediction b = ps.predict(n, k);
            CHECK(a.p_new == doctest::Approx(b.p_new).epsilon(1e-11));
            CHECK(a.existing_per_unit == doctest::Approx(b.existing_per_unit).epsilon(1e-11));
        }
    }
    auto made = make_prediction_source(pd, 8);
    CHECK(made->max_n() == 1000000L);
    const GibbsModel gg = GibbsModel::generalized_gamma(Alpha(0.5), 1.0);
    auto made_gg = make_prediction_source(gg, 8);
    CHECK(made_gg->max_n() == 7);
    Pcg64 rng(RandomStream{3, 3});
    CHECK_NOTHROW(conditional_block_chain(*made_gg, ConditioningState(3, 2), 4, rng));
    CHECK_THROWS_AS(conditional_block_chain(*made_gg, ConditioningState(3, 2), 6, rng),
                    std::out_of_range);
}

TEST_CASE("diversity sample csv is deterministic") {
    const PdPredictionSource src(Alpha(0.5), 1.0);
    const DiversitySample s1 =
        empirical_diversity(src, ConditioningState(10, 3), 50, 20, RandomStream{11, 0}, 1);
    const DiversitySample s2 =
        empirical_diversity(src, ConditioningState(10, 3), 50, 20, RandomStream{11, 0}, 2);
    std::ostringstream o1, o2;
    s1.write_csv(o1);
    s2.write_csv(o2);
    CHECK(o1.str() == o2.str());
    CHECK(o1.str().substr(0, 10) == "rep,value\n");
}

TEST_CASE("pd finite-m mean formula sanity") {
    // one additional draw: E = (theta + k alpha)/(theta + n)
    const double one = pd_expected_new_blocks(Alpha(0.5), 1.0, ConditioningState(10, 3), 1);
    CHECK(one == doctest::Approx(2.5 / 11.0).epsilon(1e-12));
    CHECK(pd_expected_new_blocks(Alpha(0.5), 1.0, ConditioningState(10, 3), 0) == 0.0);
    // m -> infinity: E / m^alpha approaches the r = 1 limit moment
    const double big = pd_expected_new_blocks(Alpha(0.5), 1.0, ConditioningState(10, 3),
                                              100000000) /
                       std::pow(1e8, 0.5);
    const double limit = pd_conditional_moment(Alpha(0.5), 1.0, ConditioningState(10, 3), 1.0);
    CHECK(big == doctest::Approx(limit).epsilon(2e-4));
}
