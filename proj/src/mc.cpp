#include "gibbsdiv/mc.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ostream>
#include <sstream>
#include <thread>

#include "gibbsdiv/gamma_inc.hpp"

namespace gibbsdiv {

std::unique_ptr<PredictionSource> make_prediction_source(const GibbsModel& model,
                                                         int table_nmax) {
    if (model.kind() == MixingKind::poisson_dirichlet)
        return std::make_unique<PdPredictionSource>(model.alpha_index(), model.theta());
    auto table = std::make_shared<WeightTable>(WeightTable::build(model, table_nmax));
    // Keeps the table alive alongside the source.
    struct OwningTableSource : PredictionSource {
        std::shared_ptr<WeightTable> table;
        explicit OwningTableSource(std::shared_ptr<WeightTable> t) : table(std::move(t)) {}
        double alpha() const override { return table->model().alpha(); }
        long max_n() const override { return table->nmax() - 1; }
        Prediction predict(long n, long k) const override {
            return predict_probs(*table, n, k);
        }
    };
    return std::make_unique<OwningTableSource>(std::move(table));
}

PartitionState grow_partition(const WeightTable& table, long target_n, Pcg64& rng) {
    if (target_n < 1 || target_n > table.nmax() - 1)
        throw std::out_of_range("grow_partition: target_n must be in [1, nmax-1]");
    const double a = table.model().alpha();
    PartitionState st;
    st.n = 1;
    st.block_sizes = {1};
    while (st.n < target_n) {
        const Prediction p = predict_probs(table, st.n, st.k());
        const double mass = p.p_new + (st.n - st.k() * a) * p.existing_per_unit;
        if (std::abs(mass - 1.0) > 1e-10)
            throw numeric_error("grow_partition: prediction mass " + std::to_string(mass) +
                                " at (n,k)=(" + std::to_string(st.n) + "," +
                                std::to_string(st.k()) + ")");
        double u = rng.uniform() * mass;
        if (u < p.p_new) {
            st.block_sizes.push_back(1);
        } else {
            u -= p.p_new;
            bool placed = false;
            for (long& b : st.block_sizes) {
                const double w = (b - a) * p.existing_per_unit;
                if (u < w) {
                    ++b;
                    placed = true;
                    break;
                }
                u -= w;
            }
            if (!placed) ++st.block_sizes.back(); // rounding edge: join the last block
        }
        ++st.n;
    }
    return st;
}

long conditional_block_chain(const PredictionSource& src, ConditioningState st, long m,
                             Pcg64& rng) {
    if (m < 0) throw std::domain_error("conditional_block_chain: m must be >= 0");
    if (st.n + m > src.max_n())
        throw std::out_of_range("conditional_block_chain: n + m exceeds the prediction range");
    const double a = src.alpha();
    long n = st.n, k = st.k, news = 0;
    for (long step = 0; step < m; ++step) {
        const Prediction p = src.predict(n, k);
        const double mass = p.p_new + (n - k * a) * p.existing_per_unit;
        if (std::abs(mass - 1.0) > 1e-10)
            throw numeric_error("conditional_block_chain: prediction mass " +
                                std::to_string(mass) + " at (n,k)=(" + std::to_string(n) + "," +
                                std::to_string(k) + ")");
        if (rng.uniform() * mass < p.p_new) {
            ++k;
            ++news;
        }
        ++n;
    }
    return news;
}

long conditional_block_chain(const WeightTable& table, ConditioningState st, long m,
                             Pcg64& rng) {
    const TablePredictionSource src(table);
    return conditional_block_chain(src, st, m, rng);
}

void DiversitySample::write_csv(std::ostream& os) const {
    os << "rep,value\n";
    char buf[48];
    for (long r = 0; r < reps; ++r) {
        os << r << ',';
        auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), values[static_cast<std::size_t>(r)],
                                     std::chars_format::general, 17);
        os.write(buf, p - buf);
        os.put('\n');
    }
}

DiversitySample empirical_diversity(const PredictionSource& src, ConditioningState st, long m,
                                    long reps, RandomStream stream, int jobs) {
    if (reps < 1) throw std::domain_error("empirical_diversity: reps must be >= 1");
    const auto t0 = std::chrono::steady_clock::now();
    DiversitySample out;
    out.alpha = src.alpha();
    out.n = st.n;
    out.k = st.k;
    out.m = m;
    out.reps = reps;
    out.stream = stream;
    out.new_blocks.resize(reps);
    out.values.resize(reps);
    const double scale = std::pow(static_cast<double>(std::max<long>(m, 1)), -src.alpha());

    auto run_range = [&](long lo, long hi) {
        for (long r = lo; r < hi; ++r) {
            Pcg64 rng(stream.substream(static_cast<std::uint64_t>(r)));
            const long news = conditional_block_chain(src, st, m, rng);
            out.new_blocks[static_cast<std::size_t>(r)] = news;
            out.values[static_cast<std::size_t>(r)] = news * scale;
        }
    };
    jobs = std::max(1, jobs);
    if (jobs == 1 || reps < 2 * jobs) {
        run_range(0, reps);
    } else {
        std::vector<std::thread> pool;
        const long chunk = (reps + jobs - 1) / jobs;
        for (int j = 0; j < jobs; ++j) {
            const long lo = j * chunk, hi = std::min<long>(reps, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back(run_range, lo, hi);
        }
        for (auto& th : pool) th.join();
    }
    out.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

double ks_statistic(std::vector<double> values, const DensityGrid& grid, double coverage_tol) {
    if (values.empty()) throw std::domain_error("ks_statistic: empty sample");
    std::sort(values.begin(), values.end());
    const double lo = grid.grid().front(), hi = grid.grid().back();
    long outside = 0;
    for (double v : values)
        if (v < lo || v > hi) ++outside;
    const double uncovered = static_cast<double>(outside) / values.size();
    if (uncovered > coverage_tol) {
        std::ostringstream msg;
        msg << "ks_statistic: " << uncovered * 100.0 << "% of the sample lies outside the grid ["
            << lo << ", " << hi << "] (allowed " << coverage_tol * 100.0 << "%)";
        throw std::out_of_range(msg.str());
    }
    const double total = grid.total_mass();
    const double n = static_cast<double>(values.size());
    double d = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double f = grid.cdf_at(values[i]) / total;
        d = std::max(d, std::abs(f - i / n));
        d = std::max(d, std::abs(f - (i + 1) / n));
    }
    return d;
}

double ks_statistic(const DiversitySample& sample, const DensityGrid& grid,
                    double coverage_tol) {
    return ks_statistic(sample.values, grid, coverage_tol);
}

double two_sample_ks(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::domain_error("two_sample_ks: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j]) ++i;
        else ++j;
        d = std::max(d, std::abs(i / na - j / nb));
    }
    return d;
}

MomentSequence empirical_moments(const DiversitySample& sample, int rmax) {
    if (rmax < 0 || rmax > 6) throw std::domain_error("empirical_moments: rmax in [0, 6]");
    const std::size_t n = sample.values.size();
    MomentSequence ms;
    for (int r = 0; r <= rmax; ++r) {
        double acc = 0.0;
        for (double v : sample.values) acc += std::pow(v, r);
        const double mean = acc / n;
        ms.values.push_back(mean);
        // Jackknife over replications; for a plug-in mean this reduces to the
        // classical standard error, computed here in its general form.
        double ss = 0.0;
        for (double v : sample.values) {
            const double loo = (acc - std::pow(v, r)) / (n - 1.0);
            ss += (loo - mean) * (loo - mean);
        }
        ms.std_errors.push_back(std::sqrt(ss * (n - 1.0) / n));
    }
    return ms;
}

namespace {

// Pools trailing low-count cells so every cell keeps a workable expectation.
std::vector<std::pair<double, double>> pooled_cells(const std::vector<double>& obs,
                                                    const std::vector<double>& expect,
                                                    double min_expect) {
    std::vector<std::pair<double, double>> cells;
    double o = 0.0, e = 0.0;
    for (std::size_t i = 0; i < obs.size(); ++i) {
        o += obs[i];
        e += expect[i];
        if (e >= min_expect) {
            cells.emplace_back(o, e);
            o = e = 0.0;
        }
    }
    if (e > 0.0 || o > 0.0) {
        if (!cells.empty()) {
            cells.back().first += o;
            cells.back().second += e;
        } else {
            cells.emplace_back(o, e);
        }
    }
    return cells;
}

} // namespace

double chi_square_gof_pvalue(const std::vector<long>& observed,
                             const std::vector<double>& probs) {
    if (observed.size() != probs.size())
        throw std::invalid_argument("chi_square_gof_pvalue: size mismatch");
    double n = 0.0;
    for (long o : observed) n += o;
    std::vector<double> obs(observed.begin(), observed.end());
    std::vector<double> expect(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) expect[i] = n * probs[i];
    const auto cells = pooled_cells(obs, expect, 5.0);
    if (cells.size() < 2) return 1.0;
    double chi2 = 0.0;
    for (const auto& [o, e] : cells) chi2 += (o - e) * (o - e) / e;
    const double df = static_cast<double>(cells.size()) - 1.0;
    return regularized_gamma_q(0.5 * df, 0.5 * chi2);
}

double chi_square_two_sample_pvalue(const std::vector<long>& a, const std::vector<long>& b) {
    const std::size_t cells_in = std::max(a.size(), b.size());
    double na = 0.0, nb = 0.0;
    for (long x : a) na += x;
    for (long x : b) nb += x;
    if (na == 0.0 || nb == 0.0)
        throw std::invalid_argument("chi_square_two_sample_pvalue: empty sample");

    // Pool on combined counts, then apply the two-sample statistic.
    std::vector<double> oa(cells_in, 0.0), ob(cells_in, 0.0), combined(cells_in, 0.0);
    for (std::size_t i = 0; i < cells_in; ++i) {
        oa[i] = i < a.size() ? static_cast<double>(a[i]) : 0.0;
        ob[i] = i < b.size() ? static_cast<double>(b[i]) : 0.0;
        combined[i] = oa[i] + ob[i];
    }
    std::vector<std::pair<double, double>> pa = pooled_cells(oa, combined, 10.0);
    std::vector<std::pair<double, double>> pb = pooled_cells(ob, combined, 10.0);
    const double ra = std::sqrt(nb / na), rb = std::sqrt(na / nb);
    double chi2 = 0.0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < pa.size(); ++i) {
        const double tot = pa[i].first + pb[i].first;
        if (tot <= 0.0) continue;
        const double diff = ra * pa[i].first - rb * pb[i].first;
        chi2 += diff * diff / tot;
        ++used;
    }
    if (used < 2) return 1.0;
    return regularized_gamma_q(0.5 * (used - 1.0), 0.5 * chi2);
}

double pd_expected_new_blocks(Alpha alpha, double theta, ConditioningState st, long m) {
    const double a = alpha.value();
    if (!(theta > -a)) throw std::domain_error("pd_expected_new_blocks: theta > -alpha");
    if (m == 0) return 0.0;
    const double growth = std::exp(log_rising(theta + st.n + a, static_cast<double>(m)) -
                                   log_rising(theta + st.n, static_cast<double>(m)));
    return (st.k + theta / a) * (growth - 1.0);
}

} // namespace gibbsdiv
