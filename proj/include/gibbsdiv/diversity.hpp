#pragma once

#include <complex>
#include <vector>

#include "gibbsdiv/density_grid.hpp"
#include "gibbsdiv/gibbs_model.hpp"
#include "gibbsdiv/weights.hpp"

namespace gibbsdiv {

// The conditioning event: K_n = k observed blocks in a basic sample of size n.
struct ConditioningState {
    long n;
    long k;
    ConditioningState(long n_, long k_) : n(n_), k(k_) {
        if (n < 1 || k < 1 || k > n)
            throw std::domain_error("ConditioningState: requires 1 <= k <= n");
    }
};

// Base conditional-diversity density (the h == 1 case):
//   gtilde(s) = Gamma(n) / (Gamma(n-k a) Gamma(k)) s^(k-1/a-1) J(n-k a-1, s^(-1/a))
// with J the stable-beta kernel; the law of Y_{a,k} * W^a, W ~ Beta(k a, n-k a).
double gtilde_log_pdf(const StableDensity& sd, ConditioningState st, double s);
double gtilde_pdf(Alpha alpha, ConditioningState st, double s);

// Normalizer E_{n,k}[h(S^(-1/alpha))] = V_{n,k,h} * alpha^(1-k) Gamma(n)/Gamma(k),
// obtained through the weights (never by renormalizing the numerator).
struct Normalizer {
    double log_value;
    WeightMethod method; // provenance of the V_{n,k} behind it
};
Normalizer conditional_normalizer(const GibbsModel& model, ConditioningState st);

// Conditional alpha-diversity density h(s^(-1/a)) gtilde(s) / E_{n,k}[h].
double conditional_log_pdf(const GibbsModel& model, ConditioningState st, double s);
double conditional_pdf(const GibbsModel& model, ConditioningState st, double s);

// Unconditional alpha-diversity density h(s^(-1/a)) g_alpha(s).
double unconditional_log_pdf(const GibbsModel& model, double s);
double unconditional_pdf(const GibbsModel& model, double s);

// Poisson-Dirichlet fast path (the theta/alpha polynomial tilt of gtilde).
double pd_conditional_log_pdf(Alpha alpha, double theta, ConditioningState st, double z);
double pd_conditional_pdf(Alpha alpha, double theta, ConditioningState st, double z);

// Limit moments ((theta+k a)/a)_r Gamma(theta+n) / Gamma(theta+n+r a).
double pd_conditional_moment(Alpha alpha, double theta, ConditioningState st, double r);

// Truncated characteristic-function series sum_{r<=R} (it)^r/r! mu_r with a
// next-term bound; `converging` is false while the bound still grows in R.
struct ChfPartialSum {
    std::complex<double> value;
    double next_term_bound;
    bool converging;
};
ChfPartialSum chf_partial_sum(Alpha alpha, double theta, ConditioningState st, double t, int rmax);

// Generalized-Gamma fast path
//   exp(-(1/2)(beta/s)^(1/a)) Gamma(k) gtilde(s) / sum_i C(n-1,i)(-1)^i beta^(i/a) Gamma(k-i/a; beta),
// with the denominator falling back to the weight integral when the
// alternating sum self-reports precision loss.  method_out (optional)
// records which route produced the normalizer.
double gg_conditional_log_pdf(Alpha alpha, double beta, ConditioningState st, double s,
                              WeightMethod* method_out = nullptr);
double gg_conditional_pdf(Alpha alpha, double beta, ConditioningState st, double s,
                          WeightMethod* method_out = nullptr);

// Tabulated conditional density with its normalizer provenance.
struct ConditionalGrid {
    DensityGrid grid;
    Normalizer normalizer;
};
ConditionalGrid conditional_density_grid(const GibbsModel& model, ConditioningState st,
                                         const DensityGrid::BuildOptions& opts = DensityGrid::BuildOptions());
DensityGrid unconditional_density_grid(const GibbsModel& model,
                                       const DensityGrid::BuildOptions& opts = DensityGrid::BuildOptions());

// Two-sample KS check of the ratio identity
//   [S_{a,ka} / Beta(ka, n-ka)]^(-a)  =d=  Y_{a,k} * Beta(ka, n-ka)^a,
// with the left ensemble drawn through the tilted-stable tabulation and the
// right through the tilted-ML tabulation.
double tilted_identity_ks_check(Alpha alpha, ConditioningState st, long draws, RandomStream stream);

// Closed-form moment comparison of the two product representations of the
// PD conditional diversity, Y_{a,theta/a+k} Beta(theta+ka, n-ka)^a versus
// Y_{a,(theta+n)/a} Beta(theta/a+k, n/a-k) (the latter needs n/a - k > 0).
// Returns the largest relative gap over r = 0..rmax.
double representation_moment_gap(Alpha alpha, double theta, ConditioningState st, int rmax);

// Moment sequence m_0..m_R, optionally with standard errors.
struct MomentSequence {
    std::vector<double> values;
    std::vector<double> std_errors; // empty for exact sequences

    // Lyapunov log-convexity: m_{r-1} m_{r+1} >= m_r^2 (within tol).
    bool is_log_convex(double tol = 1e-9) const;
};
MomentSequence pd_conditional_moments(Alpha alpha, double theta, ConditioningState st, int rmax);

} // namespace gibbsdiv
