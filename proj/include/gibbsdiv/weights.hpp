#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "gibbsdiv/gibbs_model.hpp"

namespace gibbsdiv {

// Two-parameter Poisson-Dirichlet Gibbs weights, closed form:
//   V_{n,k} = alpha^(k-1) Gamma(theta/alpha+k) Gamma(theta+1)
//             / (Gamma(theta+n) Gamma(theta/alpha+1)).
double log_pd_weight(double alpha, double theta, long n, long k);
double pd_weight(double alpha, double theta, long n, long k);

// Generalized-Gamma Gibbs weights by quadrature of
//   V_{n,k} = e^beta 2^n alpha^k / Gamma(n)
//             * int_0^inf lambda^(n-1) e^{-(beta^(1/alpha)+2 lambda)^alpha}
//                         / (beta^(1/alpha)+2 lambda)^(n-k alpha) d lambda.
double log_gg_weight_integral(double alpha, double beta, long n, long k);
double gg_weight_integral(double alpha, double beta, long n, long k);

// Same weights through the alternating incomplete-gamma sum
//   V_{n,k} = e^beta alpha^(k-1)/Gamma(n)
//             * sum_i C(n-1,i) (-1)^i beta^(i/alpha) Gamma(k - i/alpha; beta).
// Throws precision_error once cancellation leaves fewer than min_digits
// estimated significant digits (default ~6); callers fall back to the
// integral form.  Table construction demands more headroom so its recursion
// residuals stay below 1e-8.
double log_gg_weight_sum(double alpha, double beta, long n, long k, double min_digits = 6.0);
double gg_weight_sum(double alpha, double beta, long n, long k, double min_digits = 6.0);

// Weights of an arbitrary tilt by nested quadrature:
//   V_{n,k,h} = alpha^k / Gamma(n-k alpha)
//               * int_0^inf h(t) t^(-k alpha) J(n-k alpha-1, t) dt
// with J the stable-beta kernel.  Works for every mixing kind; this is the
// production route for tabulated tilts and a cross-check for the others.
double log_generic_weight(const GibbsModel& model, long n, long k);
double generic_weight(const GibbsModel& model, long n, long k);

enum class WeightMethod { closed, sum, quadrature };
const char* to_string(WeightMethod m);

// Triangular array of log V_{n,k}, 1 <= k <= n <= nmax, with per-entry
// provenance.  Immutable once built; values are stored in logs so PD tables
// stay usable far beyond the double underflow range.
class WeightTable {
  public:
    static WeightTable build(const GibbsModel& model, int nmax);

    const GibbsModel& model() const { return model_; }
    int nmax() const { return nmax_; }
    double log_v(long n, long k) const;
    double v(long n, long k) const { return std::exp(log_v(n, k)); }
    WeightMethod method(long n, long k) const;

    // |V_{n,k} - (n-k alpha) V_{n+1,k} - V_{n+1,k+1}| / V_{n,k}
    double recursion_residual(long n, long k) const;
    double max_recursion_residual() const;

    // CSV schema: header "n,k,V,method", rows by n then k, 17 significant
    // digits (values below the double range are written as d.dd...e-XXXXX).
    void write_csv(std::ostream& os) const;
    static WeightTable read_csv(std::istream& is, const GibbsModel& model);

  private:
    WeightTable(GibbsModel model, int nmax) : model_(std::move(model)), nmax_(nmax) {}
    std::size_t index(long n, long k) const;
    void validate() const;

    GibbsModel model_;
    int nmax_;
    std::vector<double> logv_;
    std::vector<WeightMethod> method_;
};

// Generalized Stirling-type triangle S_alpha(n,k) from
//   S(1,1) = 1,  S(n+1,k) = S(n,k-1) + (n - k alpha) S(n,k),
// stored in logs.  Paired with a WeightTable it gives the block-count law
// P(K_n = k) = V_{n,k} S_alpha(n,k).
class StirlingTriangle {
  public:
    StirlingTriangle(Alpha alpha, int nmax);
    double alpha() const { return alpha_; }
    int nmax() const { return nmax_; }
    double log_s(long n, long k) const;
    double s(long n, long k) const { return std::exp(log_s(n, k)); }

  private:
    double alpha_;
    int nmax_;
    std::vector<double> logs_;
};

// P(K_n = k) under the table's model.
double block_count_pmf(const WeightTable& table, const StirlingTriangle& st, long n, long k);

// EPPF value V_{n,k} prod_j (1-alpha)_(n_j - 1).
double log_eppf(const WeightTable& table, const Composition& comp);
double eppf(const WeightTable& table, const Composition& comp);

struct Prediction {
    double p_new;             // V_{n+1,k+1} / V_{n,k}
    double existing_per_unit; // V_{n+1,k} / V_{n,k}; a size-n_j block gets (n_j - alpha) times this
};
Prediction predict_probs(const WeightTable& table, long n, long k);

} // namespace gibbsdiv
