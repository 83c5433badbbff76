#include "gibbsdiv/diversity.hpp"

#include <algorithm>
#include <cmath>

#include "gibbsdiv/gamma_inc.hpp"
#include "gibbsdiv/stable_samplers.hpp"

namespace gibbsdiv {

namespace {

double two_sample_ks_sorted(std::vector<double>& a, std::vector<double>& b) {
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

} // namespace

double gtilde_log_pdf(const StableDensity& sd, ConditioningState st, double s) {
    require_positive(s, "gtilde_pdf: s");
    const double a = sd.alpha();
    const double n = static_cast<double>(st.n), k = static_cast<double>(st.k);
    const double c = n - k * a - 1.0;
    return std::lgamma(n) - std::lgamma(n - k * a) - std::lgamma(k) +
           (k - 1.0 / a - 1.0) * std::log(s) +
           log_stable_beta_integral(sd, c, std::pow(s, -1.0 / a));
}

double gtilde_pdf(Alpha alpha, ConditioningState st, double s) {
    return std::exp(gtilde_log_pdf(stable_density(alpha), st, s));
}

Normalizer conditional_normalizer(const GibbsModel& model, ConditioningState st) {
    const double a = model.alpha();
    double log_v;
    WeightMethod method;
    switch (model.kind()) {
        case MixingKind::poisson_dirichlet:
            log_v = log_pd_weight(a, model.theta(), st.n, st.k);
            method = WeightMethod::closed;
            break;
        case MixingKind::generalized_gamma:
            try {
                // normalization tolerances need a bit more than the op default
                log_v = log_gg_weight_sum(a, model.beta(), st.n, st.k, 7.5);
                method = WeightMethod::sum;
            } catch (const precision_error&) {
                log_v = log_gg_weight_integral(a, model.beta(), st.n, st.k);
                method = WeightMethod::quadrature;
            }
            break;
        case MixingKind::tabulated:
        default:
            log_v = log_generic_weight(model, st.n, st.k);
            method = WeightMethod::quadrature;
            break;
    }
    const double le = log_v + (1.0 - st.k) * std::log(a) +
                      std::lgamma(static_cast<double>(st.n)) -
                      std::lgamma(static_cast<double>(st.k));
    return {le, method};
}

double conditional_log_pdf(const GibbsModel& model, ConditioningState st, double s) {
    require_positive(s, "conditional_pdf: s");
    const Normalizer norm = conditional_normalizer(model, st);
    const double t = std::pow(s, -1.0 / model.alpha());
    return model.log_h(t) + gtilde_log_pdf(model.density(), st, s) - norm.log_value;
}

double conditional_pdf(const GibbsModel& model, ConditioningState st, double s) {
    return std::exp(conditional_log_pdf(model, st, s));
}

double unconditional_log_pdf(const GibbsModel& model, double s) {
    require_positive(s, "unconditional_pdf: s");
    const double t = std::pow(s, -1.0 / model.alpha());
    return model.log_h(t) + ml_log_pdf(model.density(), s);
}

double unconditional_pdf(const GibbsModel& model, double s) {
    return std::exp(unconditional_log_pdf(model, s));
}

double pd_conditional_log_pdf(Alpha alpha, double theta, ConditioningState st, double z) {
    require_positive(z, "pd_conditional_pdf: z");
    const double a = alpha.value();
    if (!(theta > -a)) throw std::domain_error("pd_conditional_pdf: requires theta > -alpha");
    const double n = static_cast<double>(st.n), k = static_cast<double>(st.k);
    const double c = n - k * a - 1.0;
    return std::lgamma(theta + n) - std::lgamma(n - k * a) - std::lgamma(theta / a + k) +
           (theta / a + k - 1.0 - 1.0 / a) * std::log(z) +
           log_stable_beta_integral(stable_density(alpha), c, std::pow(z, -1.0 / a));
}

double pd_conditional_pdf(Alpha alpha, double theta, ConditioningState st, double z) {
    return std::exp(pd_conditional_log_pdf(alpha, theta, st, z));
}

double pd_conditional_moment(Alpha alpha, double theta, ConditioningState st, double r) {
    const double a = alpha.value();
    if (!(theta > -a)) throw std::domain_error("pd_conditional_moment: requires theta > -alpha");
    if (r < 0.0) throw std::domain_error("pd_conditional_moment: requires r >= 0");
    return std::exp(log_rising(theta / a + st.k, r) + std::lgamma(theta + st.n) -
                    std::lgamma(theta + st.n + r * a));
}

ChfPartialSum chf_partial_sum(Alpha alpha, double theta, ConditioningState st, double t,
                              int rmax) {
    if (rmax < 0) throw std::domain_error("chf_partial_sum: requires rmax >= 0");
    std::complex<double> acc(0.0, 0.0);
    std::complex<double> it_pow(1.0, 0.0);
    const std::complex<double> it(0.0, t);
    double log_fact = 0.0;
    double last_mag = 0.0;
    for (int r = 0; r <= rmax; ++r) {
        if (r > 0) {
            it_pow *= it;
            log_fact += std::log(static_cast<double>(r));
        }
        const double mu = pd_conditional_moment(alpha, theta, st, r);
        acc += it_pow * std::exp(-log_fact) * mu;
        last_mag = std::pow(std::abs(t), r) * std::exp(-log_fact) * mu;
    }
    const double mu_next = pd_conditional_moment(alpha, theta, st, rmax + 1.0);
    const double bound = std::pow(std::abs(t), rmax + 1.0) *
                         std::exp(-log_fact - std::log(rmax + 1.0)) * mu_next;
    return {acc, bound, rmax == 0 ? true : bound <= last_mag};
}

double gg_conditional_log_pdf(Alpha alpha, double beta, ConditioningState st, double s,
                              WeightMethod* method_out) {
    require_positive(s, "gg_conditional_pdf: s");
    require_positive(beta, "gg_conditional_pdf: beta");
    const double a = alpha.value();
    const double n = static_cast<double>(st.n), k = static_cast<double>(st.k);
    // log D, with D = sum_i C(n-1,i) (-1)^i beta^(i/a) Gamma(k - i/a; beta)
    //             = V_{n,k} Gamma(n) e^-beta alpha^(1-k)  for either V route.
    double log_v;
    WeightMethod method;
    try {
        log_v = log_gg_weight_sum(a, beta, st.n, st.k, 7.5);
        method = WeightMethod::sum;
    } catch (const precision_error&) {
        log_v = log_gg_weight_integral(a, beta, st.n, st.k);
        method = WeightMethod::quadrature;
    }
    if (method_out) *method_out = method;
    const double log_d = log_v + std::lgamma(n) - beta + (1.0 - k) * std::log(a);
    // exp(-(beta/s)^(1/alpha)): the lambda = beta^(1/alpha) tilt mapped to
    // s-space (the factor-1/2 variant belongs to the (2 lambda)^alpha
    // convention and does not normalize against the scale-1 stable law).
    const double tilt = -std::pow(beta / s, 1.0 / a);
    return tilt + std::lgamma(k) + gtilde_log_pdf(stable_density(alpha), st, s) - log_d;
}

double gg_conditional_pdf(Alpha alpha, double beta, ConditioningState st, double s,
                          WeightMethod* method_out) {
    return std::exp(gg_conditional_log_pdf(alpha, beta, st, s, method_out));
}

ConditionalGrid conditional_density_grid(const GibbsModel& model, ConditioningState st,
                                         const DensityGrid::BuildOptions& opts) {
    const Normalizer norm = conditional_normalizer(model, st);
    const double a = model.alpha();
    const StableDensity& sd = model.density();
    auto log_pdf = [&, norm](double s) {
        return model.log_h(std::pow(s, -1.0 / a)) + gtilde_log_pdf(sd, st, s) -
               norm.log_value;
    };
    // Hull hints from the h == 1 moments; expansion does the rest.
    const double m1 = std::exp(log_rising(static_cast<double>(st.k), 1.0) +
                               std::lgamma(static_cast<double>(st.n)) -
                               std::lgamma(st.n + a));
    DensityGrid grid = DensityGrid::build(log_pdf, std::max(1e-8, m1 / 30.0), 4.0 * m1, opts);
    return {std::move(grid), norm};
}

DensityGrid unconditional_density_grid(const GibbsModel& model,
                                       const DensityGrid::BuildOptions& opts) {
    auto log_pdf = [&](double s) { return unconditional_log_pdf(model, s); };
    const double m1 = ml_moment(model.alpha_index(), 0.0, 1.0);
    return DensityGrid::build(log_pdf, std::max(1e-8, m1 / 30.0), 4.0 * m1, opts);
}

double tilted_identity_ks_check(Alpha alpha, ConditioningState st, long draws, RandomStream stream) {
    if (draws < 10000) throw std::domain_error("tilted_identity_ks_check: needs at least 1e4 draws");
    const double a = alpha.value();
    const double ka = st.k * a;
    const double nka = st.n - ka;

    const TiltedStableSampler stable_side(alpha, static_cast<double>(st.k));
    const TiltedMlSampler ml_side(alpha, static_cast<double>(st.k));

    Pcg64 rng_a(stream.substream(1));
    Pcg64 rng_b(stream.substream(2));
    std::vector<double> ens_a(draws), ens_b(draws);
    for (long i = 0; i < draws; ++i) {
        const double s = stable_side.sample(rng_a);
        const double w = rng_a.beta(ka, nka);
        ens_a[i] = std::pow(s / w, -a); // [R]^(-alpha)
    }
    for (long i = 0; i < draws; ++i) {
        const double y = ml_side.sample(rng_b);
        const double w = rng_b.beta(ka, nka);
        ens_b[i] = y * std::pow(w, a);
    }
    return two_sample_ks_sorted(ens_a, ens_b);
}

double representation_moment_gap(Alpha alpha, double theta, ConditioningState st, int rmax) {
    const double a = alpha.value();
    if (!(theta > -a)) throw std::domain_error("representation_moment_gap: requires theta > -alpha");
    const double n = static_cast<double>(st.n), k = static_cast<double>(st.k);
    if (!(n / a - k > 0.0))
        throw std::domain_error("representation_moment_gap: the second representation needs n/alpha - k > 0");

    const double c1 = theta / a + k;        // tilt order of Y_{a,theta/a+k}
    const double c2 = (theta + n) / a;      // tilt order of Y_1 ~ g_{a,(theta+n)}
    double worst = 0.0;
    for (int r = 0; r <= rmax; ++r) {
        const double ra = r * a;
        const double side1 =
            std::exp(log_rising(c1 + 1.0, r) - log_rising(c1 * a + 1.0, ra) // E[Y^r]
                     + log_rising(theta + k * a, ra) - log_rising(theta + n, ra)); // E[W^(ra)]
        const double side2 =
            std::exp(log_rising(c2 + 1.0, r) - log_rising(c2 * a + 1.0, ra) // E[Y1^r]
                     + log_rising(theta / a + k, r) - log_rising((theta + n) / a, r)); // E[X^r]
        worst = std::max(worst, std::abs(side1 - side2) / side1);
    }
    return worst;
}

bool MomentSequence::is_log_convex(double tol) const {
    for (std::size_t r = 1; r + 1 < values.size(); ++r) {
        if (values[r - 1] * values[r + 1] < values[r] * values[r] * (1.0 - tol)) return false;
    }
    return true;
}

MomentSequence pd_conditional_moments(Alpha alpha, double theta, ConditioningState st,
                                      int rmax) {
    MomentSequence ms;
    for (int r = 0; r <= rmax; ++r)
        ms.values.push_back(pd_conditional_moment(alpha, theta, st, r));
    return ms;
}

} // namespace gibbsdiv
