#pragma once

#include <memory>
#include <string>
#include <vector>

#include "gibbsdiv/density_grid.hpp"
#include "gibbsdiv/diversity.hpp"
#include "gibbsdiv/weights.hpp"

namespace gibbsdiv {

// A sampled partition of [n]: block sizes plus derived counts.
struct PartitionState {
    long n = 0;
    std::vector<long> block_sizes;
    long k() const { return static_cast<long>(block_sizes.size()); }
};

// Sequential-prediction probabilities for one model.  The table-backed
// source covers every mixing kind; the closed-form PD source has no table
// bound and carries chains to n in the millions.
class PredictionSource {
  public:
    virtual ~PredictionSource() = default;
    virtual double alpha() const = 0;
    virtual long max_n() const = 0;
    // p_new = V_{n+1,k+1}/V_{n,k};  a block of size n_j gets (n_j - alpha) *
    // existing_per_unit;  p_new + (n - k alpha) * existing_per_unit = 1.
    virtual Prediction predict(long n, long k) const = 0;
};

class TablePredictionSource : public PredictionSource {
  public:
    explicit TablePredictionSource(const WeightTable& table) : table_(&table) {}
    double alpha() const override { return table_->model().alpha(); }
    long max_n() const override { return table_->nmax() - 1; }
    Prediction predict(long n, long k) const override { return predict_probs(*table_, n, k); }

  private:
    const WeightTable* table_;
};

class PdPredictionSource : public PredictionSource {
  public:
    PdPredictionSource(Alpha alpha, double theta) : alpha_(alpha.value()), theta_(theta) {
        if (!(theta > -alpha_)) throw std::domain_error("PdPredictionSource: theta > -alpha");
    }
    double alpha() const override { return alpha_; }
    long max_n() const override { return 1000000L; }
    Prediction predict(long n, long k) const override {
        const double denom = theta_ + n;
        return {(theta_ + k * alpha_) / denom, 1.0 / denom};
    }

  private:
    double alpha_, theta_;
};

// PD models get the closed-form rule, everything else the table.
std::unique_ptr<PredictionSource> make_prediction_source(const GibbsModel& model,
                                                         int table_nmax);

// Grows an exchangeable partition of [target_n] by sequential prediction.
PartitionState grow_partition(const WeightTable& table, long target_n, Pcg64& rng);

// Number of new blocks among m additional draws given K_n = k.  Only the
// (n', k') chain is simulated: under the Gibbs product form the new-block
// probability depends on the configuration through (n', k') alone.  The
// prediction-rule mass balance is asserted at every visited state.
long conditional_block_chain(const PredictionSource& src, ConditioningState st, long m,
                             Pcg64& rng);
long conditional_block_chain(const WeightTable& table, ConditioningState st, long m,
                             Pcg64& rng);

// A batch of replicated K_m(new)/m^alpha values with reproduction metadata.
struct DiversitySample {
    double alpha = 0.0;
    long n = 0, k = 0, m = 0;
    long reps = 0;
    RandomStream stream;
    std::vector<long> new_blocks; // per replication
    std::vector<double> values;   // new_blocks / m^alpha
    double wall_seconds = 0.0;

    // CSV schema: "rep,value" with 17 significant digits.
    void write_csv(std::ostream& os) const;
};

// Replications draw independent substreams (seed, stream + rep), so results
// are identical for any worker count; with jobs > 1 replications fan out
// over a small thread pool.
DiversitySample empirical_diversity(const PredictionSource& src, ConditioningState st, long m,
                                    long reps, RandomStream stream, int jobs = 1);

// Sup distance between the sample's empirical CDF and the tabulated CDF.
// Errors out if more than coverage_tol of the sample falls outside the grid.
double ks_statistic(const DiversitySample& sample, const DensityGrid& grid,
                    double coverage_tol = 1e-4);
double ks_statistic(std::vector<double> values, const DensityGrid& grid,
                    double coverage_tol = 1e-4);

// Two-sample KS distance.
double two_sample_ks(std::vector<double> a, std::vector<double> b);

// Plug-in moments r = 0..rmax with jackknife standard errors.
MomentSequence empirical_moments(const DiversitySample& sample, int rmax);

// Pearson chi-square p-values (cells with small expectation are pooled).
double chi_square_gof_pvalue(const std::vector<long>& observed,
                             const std::vector<double>& probs);
double chi_square_two_sample_pvalue(const std::vector<long>& a, const std::vector<long>& b);

// Exact mean of the new-block count after m additional draws under PD:
//   E = (k + theta/alpha) [ ((theta+n+alpha)_m / (theta+n)_m) - 1 ],
// the finite-m counterpart of the r = 1 limit moment.
double pd_expected_new_blocks(Alpha alpha, double theta, ConditioningState st, long m);

} // namespace gibbsdiv
