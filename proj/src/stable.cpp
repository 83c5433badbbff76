#include "gibbsdiv/stable.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace gibbsdiv {

namespace {

constexpr double kPi = 3.141592653589793238462643383279503;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(sin x / x) on (0, pi); series below 0.35 keeps full relative accuracy.
double logsinc(double x) {
    if (x < 0.35) {
        const double x2 = x * x;
        // -sum_m zeta(2m)/(m pi^(2m)) x^(2m)
        return -x2 * (1.0 / 6.0 +
                      x2 * (1.0 / 180.0 +
                            x2 * (1.0 / 2835.0 +
                                  x2 * (1.0 / 37800.0 +
                                        x2 * (1.0 / 467775.0 +
                                              x2 * (691.0 / 3831077250.0 +
                                                    x2 * (2.0 / 127702575.0)))))));
    }
    return std::log(std::sin(x) / x);
}

// logsinc(a*x) - logsinc(x) without cancellation for small x.
double logsinc_diff(double a, double x) {
    if (x < 0.35) {
        const double x2 = x * x;
        const double a2 = a * a;
        double sum = 0.0;
        double x2m = 1.0;
        double a2m = 1.0;
        static const double coef[7] = {1.0 / 6.0,      1.0 / 180.0,         1.0 / 2835.0,
                                       1.0 / 37800.0,  1.0 / 467775.0,      691.0 / 3831077250.0,
                                       2.0 / 127702575.0};
        for (int m = 0; m < 7; ++m) {
            x2m *= x2;
            a2m *= a2;
            sum += coef[m] * (1.0 - a2m) * x2m;
        }
        return sum;
    }
    return logsinc(a * x) - logsinc(x);
}

double logsumexp2(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

QuadOptions pdf_quad_opts() {
    QuadOptions o;
    o.abs_tol = 1e-280;
    o.rel_tol = 3e-11;
    o.max_segments = 900;
    return o;
}

} // namespace

StableDensity::StableDensity(Alpha alpha, StableConvention conv)
    : alpha_(alpha.value()), conv_(conv) {
    const double a = alpha_;
    log_a0_ = (a / (1.0 - a)) * std::log(a) + std::log1p(-a);

    // Series in x = t^(-alpha):  f(t) = t^(-1) sum_k coef_k x^k.
    const int kmax = 120;
    series_coef_.assign(kmax + 1, 0.0);
    series_bound_.assign(kmax + 1, 0.0);
    double sign = 1.0;
    for (int k = 1; k <= kmax; ++k) {
        const double lg = std::lgamma(k * a + 1.0) - std::lgamma(k + 1.0);
        const double mag = std::exp(lg) / kPi;
        series_coef_[k] = sign * std::sin(kPi * k * a) * mag;
        series_bound_[k] = mag;
        sign = -sign;
    }
    double rho_max = 0.0;
    for (int k = 1; k <= 50; ++k) {
        const double rho =
            std::exp(std::lgamma((k + 1) * a + 1.0) - std::lgamma(k * a + 1.0)) / (k + 1.0);
        rho_max = std::max(rho_max, rho);
    }
    t_series_ = std::pow(3.0 * rho_max, 1.0 / a);

    build_quad_tables();

    // Median by bisection; used only as an integration length scale.
    double lo = 1e-6, hi = 1e9;
    while (cdf_std(hi) < 0.5 && hi < 1e30) hi *= 10.0;
    while (cdf_std(lo) > 0.5 && lo > 1e-30) lo *= 0.1;
    for (int it = 0; it < 80; ++it) {
        const double mid = std::sqrt(lo * hi);
        (cdf_std(mid) < 0.5 ? lo : hi) = mid;
    }
    median_ = std::sqrt(lo * hi) * conv_.scale();
}

void StableDensity::build_quad_tables() {
    const double a = alpha_;
    const double r = a / (1.0 - a);
    // table covers z A0 <= 1e9, i.e. u >= (log A0 - log 1e9)/r
    u_hi_ = std::log(t_series_);
    u_lo_ = std::min((log_a0_ - std::log(1e9)) / r, u_hi_ - 1.0);
    du_ = 0.02 / std::max(1.0, 0.5 * r);
    const int n = static_cast<int>(std::ceil((u_hi_ - u_lo_) / du_)) + 5; // 2-node pad each side
    eta_pdf_.resize(n);
    eta_cdf_.resize(n);
    const double c0 = std::log(a) - std::log1p(-a) - std::log(kPi) + log_a0_;
    for (int i = 0; i < n; ++i) {
        const double u = u_lo_ + (i - 2) * du_;
        const double t = std::exp(u);
        const double za0 = std::exp(-r * u + log_a0_);
        eta_pdf_[i] = zolotarev_log_pdf(t) - (c0 - u / (1.0 - a) - za0);
        eta_cdf_[i] = zolotarev_log_cdf_int(t);
    }
}

double StableDensity::interp_eta(const std::vector<double>& eta, double u) const {
    // Hermite cubic on the uniform grid with five-point slopes.
    const double x = (u - u_lo_) / du_ + 2.0; // index space, padded
    const int i = std::clamp(static_cast<int>(x), 2, static_cast<int>(eta.size()) - 4);
    const double w = x - i;
    auto slope = [&](int j) {
        return (eta[j - 2] - 8.0 * eta[j - 1] + 8.0 * eta[j + 1] - eta[j + 2]) / 12.0;
    };
    const double y0 = eta[i], y1 = eta[i + 1];
    const double m0 = slope(i), m1 = slope(i + 1);
    const double w2 = w * w, w3 = w2 * w;
    return y0 * (2 * w3 - 3 * w2 + 1) + m0 * (w3 - 2 * w2 + w) + y1 * (-2 * w3 + 3 * w2) +
           m1 * (w3 - w2);
}

double StableDensity::zolotarev_log_ratio(double phi) const {
    const double a = alpha_;
    return (a / (1.0 - a)) * logsinc_diff(a, phi) + logsinc_diff(1.0 - a, phi);
}

double StableDensity::series_log_pdf(double t) const {
    const double x = std::pow(t, -alpha_);
    double sum = 0.0;
    double max_mag = 0.0;
    double xk = 1.0;
    bool converged = false;
    for (std::size_t k = 1; k < series_coef_.size(); ++k) {
        xk *= x;
        const double term = series_coef_[k] * xk;
        sum += term;
        max_mag = std::max(max_mag, std::abs(term));
        if (series_bound_[k] * xk < 1e-17 * std::abs(sum) && k >= 3) {
            converged = true;
            break;
        }
    }
    if (!converged || !(sum > 0.0) || max_mag > 1e3 * sum) return zolotarev_log_pdf(t);
    return std::log(sum) - std::log(t);
}

double StableDensity::series_survival(double t) const {
    const double x = std::pow(t, -alpha_);
    double sum = 0.0;
    double xk = 1.0;
    for (std::size_t k = 1; k < series_coef_.size(); ++k) {
        xk *= x;
        sum += series_coef_[k] / (k * alpha_) * xk;
        if (series_bound_[k] / (k * alpha_) * xk < 1e-17 * std::abs(sum) && k >= 3) break;
    }
    return sum;
}

double StableDensity::zolotarev_log_pdf(double t) const {
    const double a = alpha_;
    const double r = a / (1.0 - a);
    const double log_za0 = -r * std::log(t) + log_a0_;
    if (log_za0 > 708.0) return kNegInf; // density underflows any double
    const double za0 = std::exp(log_za0);

    auto f_log = [&](double phi) {
        const double d = zolotarev_log_ratio(phi);
        return d - za0 * std::expm1(d);
    };

    std::vector<double> splits;
    if (za0 >= 1.0) {
        const double sigma = 1.0 / std::sqrt(za0 * a);
        for (double m : {1.0, 3.0, 10.0, 30.0})
            if (m * sigma < kPi) splits.push_back(m * sigma);
    } else {
        // Interior peak where A(phi) = 1/z, i.e. log-ratio = log(1/za0).
        const double target = std::log(1.0 / za0);
        double lo = 1e-9, hi = kPi - 1e-9;
        if (zolotarev_log_ratio(hi) > target) {
            for (int it = 0; it < 100; ++it) {
                const double mid = 0.5 * (lo + hi);
                (zolotarev_log_ratio(mid) < target ? lo : hi) = mid;
            }
        }
        const double phi_star = 0.5 * (lo + hi);
        splits = {0.25 * phi_star, 0.5 * phi_star, phi_star, 0.5 * (phi_star + kPi),
                  kPi - 0.25 * (kPi - phi_star)};
    }
    const double log_int = integrate_log(f_log, 0.0, kPi, splits, pdf_quad_opts());
    return std::log(a) - std::log1p(-a) - std::log(kPi) + log_a0_ -
           std::log(t) / (1.0 - a) - za0 + log_int;
}

double StableDensity::zolotarev_log_cdf_int(double t) const {
    const double r = alpha_ / (1.0 - alpha_);
    const double za0 = std::exp(-r * std::log(t) + log_a0_);
    // log int exp(-za0 expm1(Delta)) dphi; the factored form stays fully
    // conditioned however large za0 gets.
    auto f_log = [&](double phi) { return -za0 * std::expm1(zolotarev_log_ratio(phi)); };
    std::vector<double> splits;
    if (za0 >= 1.0) {
        const double sigma = 1.0 / std::sqrt(za0 * alpha_);
        for (double m : {1.0, 3.0, 10.0, 30.0})
            if (m * sigma < kPi) splits.push_back(m * sigma);
    }
    return integrate_log(f_log, 0.0, kPi, splits, pdf_quad_opts());
}

double StableDensity::log_pdf_std(double t) const {
    if (t >= t_series_) return series_log_pdf(t);
    const double a = alpha_;
    const double r = a / (1.0 - a);
    const double u = std::log(t);
    const double log_za0 = -r * u + log_a0_;
    if (log_za0 > 708.0) return kNegInf; // density underflows any double
    const double za0 = std::exp(log_za0);
    const double eta = (u < u_lo_) ? 0.5 * std::log(kPi / (2.0 * za0 * a))
                                   : interp_eta(eta_pdf_, u);
    const double c0 = std::log(a) - std::log1p(-a) - std::log(kPi) + log_a0_;
    return c0 - u / (1.0 - a) - za0 + eta;
}

double StableDensity::cdf_std(double t) const {
    if (t <= 0.0) return 0.0;
    if (t >= t_series_) return 1.0 - series_survival(t);
    const double r = alpha_ / (1.0 - alpha_);
    const double u = std::log(t);
    const double log_za0 = -r * u + log_a0_;
    if (log_za0 > 708.0) return 0.0;
    const double za0 = std::exp(log_za0);
    const double log_int = (u < u_lo_) ? 0.5 * std::log(kPi / (2.0 * za0 * alpha_))
                                       : interp_eta(eta_cdf_, u);
    return std::exp(log_int - za0 - std::log(kPi));
}

double StableDensity::log_pdf(double t) const {
    if (!std::isfinite(t) || t <= 0.0)
        throw std::domain_error("stable log_pdf: t must be positive and finite");
    const double c = conv_.scale();
    return log_pdf_std(t / c) - std::log(c);
}

double StableDensity::pdf(double t) const { return std::exp(log_pdf(t)); }

double StableDensity::cdf(double t) const {
    if (!std::isfinite(t)) throw std::domain_error("stable cdf: t must be finite");
    return cdf_std(t / conv_.scale());
}

double StableDensity::sample(Pcg64& rng) const {
    const double u = rng.uniform(kPi);
    const double w = rng.exponential();
    const double log_a = log_a0_ + zolotarev_log_ratio(u);
    return conv_.scale() *
           std::exp(((1.0 - alpha_) / alpha_) * (log_a - std::log(w)));
}

double ml_log_pdf(const StableDensity& sd, double s) {
    if (!std::isfinite(s) || s <= 0.0)
        throw std::domain_error("ml_pdf: s must be positive and finite");
    const double a = sd.alpha();
    const double log_t = -std::log(s) / a;
    if (log_t > 700.0) {
        // t = s^(-1/alpha) overflows; g has already flattened onto its value
        // at 0, scale^alpha / Gamma(1-alpha), to within O(s).
        return a * std::log(sd.scale()) - std::lgamma(1.0 - a);
    }
    return -std::log(a) + (-1.0 - 1.0 / a) * std::log(s) + sd.log_pdf(std::exp(log_t));
}

double ml_pdf(const StableDensity& sd, double s) { return std::exp(ml_log_pdf(sd, s)); }

double tilted_ml_log_pdf(const StableDensity& sd, double c, double y) {
    if (c < 0.0) throw std::domain_error("tilted_ml_pdf: tilt order must be >= 0");
    if (c == 0.0) return ml_log_pdf(sd, y);
    const double a = sd.alpha();
    return std::lgamma(c * a + 1.0) - std::lgamma(c + 1.0) + c * std::log(y) +
           ml_log_pdf(sd, y);
}

double tilted_ml_pdf(const StableDensity& sd, double c, double y) {
    return std::exp(tilted_ml_log_pdf(sd, c, y));
}

double tilted_stable_log_pdf(const StableDensity& sd, double c, double t) {
    if (c < 0.0) throw std::domain_error("tilted_stable_pdf: tilt order must be >= 0");
    const double a = sd.alpha();
    return std::lgamma(c * a + 1.0) - std::lgamma(c + 1.0) - c * a * std::log(t) +
           sd.log_pdf(t);
}

double tilted_stable_pdf(const StableDensity& sd, double c, double t) {
    return std::exp(tilted_stable_log_pdf(sd, c, t));
}

double ml_moment(Alpha alpha, double c, double r) {
    if (c < 0.0 || r < 0.0) throw std::domain_error("ml_moment: requires c >= 0, r >= 0");
    const double a = alpha.value();
    return std::exp(std::lgamma(c + r + 1.0) - std::lgamma(c + 1.0) +
                    std::lgamma(c * a + 1.0) - std::lgamma(c * a + r * a + 1.0));
}

double log_stable_beta_integral(const StableDensity& sd, double c, double y) {
    if (!(c > -1.0)) throw std::domain_error("log_stable_beta_integral: requires c > -1");
    require_positive(y, "log_stable_beta_integral: y");

    // J = int_0^1 (1-v)^c f(v y) dv, split at v = 0.9.
    auto f_log = [&](double v) { return c * std::log1p(-v) + sd.log_pdf(v * y); };

    const double v0 = std::clamp(sd.median() / y, 1e-10, 0.45);
    std::vector<double> splits{v0 / 8.0, v0, std::min(8.0 * v0, 0.45), 0.6, 0.8};
    const double log_left = integrate_log(f_log, 0.0, 0.9, splits);

    double log_right;
    if (c >= 0.0) {
        log_right = integrate_log(f_log, 0.9, 1.0, {0.95, 0.99});
    } else {
        // (1-v)^c is singular at 1: flatten it with w = (1-v)^(c+1).
        const double w1 = std::pow(0.1, c + 1.0);
        const double inv = 1.0 / (c + 1.0);
        auto f_log_w = [&](double w) {
            const double v = 1.0 - std::pow(w, inv);
            return sd.log_pdf(std::max(v, 1e-300) * y) - std::log1p(c);
        };
        log_right = integrate_log(f_log_w, 0.0, w1, {0.05 * w1, 0.3 * w1, 0.7 * w1});
    }
    return logsumexp2(log_left, log_right);
}

namespace {
std::mutex g_cache_mutex;
std::map<double, std::shared_ptr<const StableDensity>>& stable_cache_map() {
    static std::map<double, std::shared_ptr<const StableDensity>> m;
    return m;
}
} // namespace

const StableDensity& stable_density(Alpha alpha) {
    std::lock_guard<std::mutex> lock(g_cache_mutex);
    auto& m = stable_cache_map();
    auto it = m.find(alpha.value());
    if (it == m.end())
        it = m.emplace(alpha.value(), std::make_shared<const StableDensity>(alpha)).first;
    return *it->second;
}

double stable_pdf(Alpha alpha, double t) { return stable_density(alpha).pdf(t); }
double stable_log_pdf(Alpha alpha, double t) { return stable_density(alpha).log_pdf(t); }
double stable_cdf(Alpha alpha, double t) { return stable_density(alpha).cdf(t); }
double sample_stable(Alpha alpha, Pcg64& rng) { return stable_density(alpha).sample(rng); }
double ml_pdf(Alpha alpha, double s) { return ml_pdf(stable_density(alpha), s); }
double tilted_ml_pdf(Alpha alpha, double c, double y) {
    return tilted_ml_pdf(stable_density(alpha), c, y);
}
double tilted_stable_pdf(Alpha alpha, double c, double t) {
    return tilted_stable_pdf(stable_density(alpha), c, t);
}

} // namespace gibbsdiv
