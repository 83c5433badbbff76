#include "gibbsdiv/weights.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "gibbsdiv/gamma_inc.hpp"
#include "gibbsdiv/quadrature.hpp"

namespace gibbsdiv {

namespace {

void check_nk(long n, long k) {
    if (k < 1 || k > n) throw std::domain_error("Gibbs weight: requires 1 <= k <= n");
}

double log_choose(long n, long k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

double logsumexp(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// Formats exp(logv) with 17 significant digits even when it is far below the
// double range, using a decimal mantissa/exponent split.
std::string format_log_value(double logv) {
    char buf[64];
    if (logv > -650.0 && logv < 650.0) {
        const double v = std::exp(logv);
        auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
        return std::string(buf, p);
    }
    const double l10 = logv / std::log(10.0);
    double e10 = std::floor(l10);
    double mant = std::pow(10.0, l10 - e10);
    if (mant >= 10.0) {
        mant /= 10.0;
        e10 += 1.0;
    }
    std::snprintf(buf, sizeof(buf), "%.16fe%+.0f", mant, e10);
    return std::string(buf);
}

double parse_log_value(const std::string& s) {
    const double v = std::strtod(s.c_str(), nullptr);
    // denormals lose mantissa bits, so only trust strtod in the normal range
    if (v >= 1e-290 && std::isfinite(v)) return std::log(v);
    // out-of-range scientific form: mantissa e exponent
    const auto pos = s.find_first_of("eE");
    if (pos == std::string::npos)
        throw std::invalid_argument("WeightTable CSV: unparseable value '" + s + "'");
    const double mant = std::strtod(s.substr(0, pos).c_str(), nullptr);
    const double e10 = std::strtod(s.substr(pos + 1).c_str(), nullptr);
    if (!(mant > 0.0))
        throw std::invalid_argument("WeightTable CSV: nonpositive value '" + s + "'");
    return std::log(mant) + e10 * std::log(10.0);
}

} // namespace

double log_pd_weight(double alpha, double theta, long n, long k) {
    check_nk(n, k);
    if (!(alpha > 0.0 && alpha < 1.0) || !(theta > -alpha))
        throw std::domain_error("pd_weight: requires 0 < alpha < 1 and theta > -alpha");
    const double ta = theta / alpha;
    return (k - 1.0) * std::log(alpha) + std::lgamma(ta + k) + std::lgamma(theta + 1.0) -
           std::lgamma(theta + n) - std::lgamma(ta + 1.0);
}

double pd_weight(double alpha, double theta, long n, long k) {
    return std::exp(log_pd_weight(alpha, theta, n, k));
}

double log_gg_weight_integral(double alpha, double beta, long n, long k) {
    check_nk(n, k);
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("gg_weight: bad alpha");
    require_positive(beta, "gg_weight: beta");
    const double b = std::pow(beta, 1.0 / alpha);
    // After u = 2 lambda:  V = e^beta alpha^k / Gamma(n)
    //   * int_0^inf u^(n-1) (b+u)^(k alpha - n) e^{-(b+u)^alpha} du.
    auto f_log = [&](double u) {
        const double bu = b + u;
        return (n - 1.0) * std::log(u) + (k * alpha - n) * std::log(bu) -
               std::pow(bu, alpha);
    };
    QuadOptions opts;
    opts.rel_tol = 1e-11;
    opts.abs_tol = 1e-300;
    const double log_int = integrate_log_positive_axis(f_log, opts);
    return beta + k * std::log(alpha) - std::lgamma(static_cast<double>(n)) + log_int;
}

double gg_weight_integral(double alpha, double beta, long n, long k) {
    return std::exp(log_gg_weight_integral(alpha, beta, n, k));
}

double log_gg_weight_sum(double alpha, double beta, long n, long k, double min_digits) {
    check_nk(n, k);
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("gg_weight: bad alpha");
    require_positive(beta, "gg_weight: beta");
    const double lbeta = std::log(beta);

    std::vector<double> log_terms(n);
    for (long i = 0; i < n; ++i) {
        log_terms[i] = log_choose(n - 1, i) + (i / alpha) * lbeta +
                       log_upper_gamma(k - i / alpha, beta);
    }
    const double m = *std::max_element(log_terms.begin(), log_terms.end());

    long double sum = 0.0L, abs_sum = 0.0L;
    for (long i = 0; i < n; ++i) {
        const long double t = std::exp(static_cast<long double>(log_terms[i] - m));
        sum += (i % 2 == 0) ? t : -t;
        abs_sum += t;
    }
    // terms carry ~13.5 reliable digits; cancellation eats log10(|terms|/|sum|)
    const double max_ratio = std::pow(10.0, 13.5 - min_digits);
    if (!(sum > 0.0L) || abs_sum / sum > max_ratio) {
        std::ostringstream msg;
        msg << "gg_weight_sum(alpha=" << alpha << ", beta=" << beta << ", n=" << n
            << ", k=" << k << "): alternating sum cancels below " << min_digits
            << " significant digits (|terms|/|sum| = "
            << static_cast<double>(sum > 0.0L ? abs_sum / sum : -1.0L)
            << "); use the integral form";
        throw precision_error(msg.str());
    }
    return beta + (k - 1.0) * std::log(alpha) - std::lgamma(static_cast<double>(n)) + m +
           static_cast<double>(std::log(sum));
}

double gg_weight_sum(double alpha, double beta, long n, long k, double min_digits) {
    return std::exp(log_gg_weight_sum(alpha, beta, n, k, min_digits));
}

double log_generic_weight(const GibbsModel& model, long n, long k) {
    check_nk(n, k);
    const StableDensity& sd = model.density();
    const double alpha = model.alpha();
    const double c = n - k * alpha - 1.0;
    auto f_log = [&](double t) {
        return model.log_h(t) - k * alpha * std::log(t) +
               log_stable_beta_integral(sd, c, t);
    };
    QuadOptions opts;
    opts.rel_tol = 1e-8;
    opts.abs_tol = 1e-300;
    opts.max_segments = 600;
    const double log_int = integrate_log_positive_axis(f_log, opts);
    return k * std::log(alpha) - std::lgamma(n - k * alpha) + log_int;
}

double generic_weight(const GibbsModel& model, long n, long k) {
    return std::exp(log_generic_weight(model, n, k));
}

const char* to_string(WeightMethod m) {
    switch (m) {
        case WeightMethod::closed: return "closed";
        case WeightMethod::sum: return "sum";
        case WeightMethod::quadrature: return "quadrature";
    }
    return "?";
}

std::size_t WeightTable::index(long n, long k) const {
    if (n < 1 || n > nmax_ || k < 1 || k > n)
        throw std::out_of_range("WeightTable: (n,k) = (" + std::to_string(n) + "," +
                                std::to_string(k) + ") outside table of nmax " +
                                std::to_string(nmax_));
    return static_cast<std::size_t>(n - 1) * n / 2 + (k - 1);
}

WeightTable WeightTable::build(const GibbsModel& model, int nmax) {
    if (nmax < 1 || nmax > 4096)
        throw std::out_of_range("WeightTable::build: nmax must be in [1, 4096] "
                                "(closed-form prediction rules cover larger PD runs)");
    WeightTable t(model, nmax);
    const std::size_t total = static_cast<std::size_t>(nmax) * (nmax + 1) / 2;
    t.logv_.resize(total);
    t.method_.resize(total);
    for (long n = 1; n <= nmax; ++n) {
        for (long k = 1; k <= n; ++k) {
            const std::size_t idx = t.index(n, k);
            switch (model.kind()) {
                case MixingKind::poisson_dirichlet:
                    t.logv_[idx] = log_pd_weight(model.alpha(), model.theta(), n, k);
                    t.method_[idx] = WeightMethod::closed;
                    break;
                case MixingKind::generalized_gamma:
                    try {
                        // stricter than the standalone op: the table's recursion
                        // residuals must stay below 1e-8
                        t.logv_[idx] =
                            log_gg_weight_sum(model.alpha(), model.beta(), n, k, 9.5);
                        t.method_[idx] = WeightMethod::sum;
                    } catch (const precision_error&) {
                        t.logv_[idx] =
                            log_gg_weight_integral(model.alpha(), model.beta(), n, k);
                        t.method_[idx] = WeightMethod::quadrature;
                    }
                    break;
                case MixingKind::tabulated:
                    t.logv_[idx] = log_generic_weight(model, n, k);
                    t.method_[idx] = WeightMethod::quadrature;
                    break;
            }
        }
    }
    t.validate();
    t.logv_[0] = 0.0; // V(1,1) = 1 exactly, once validated to rounding
    return t;
}

void WeightTable::validate() const {
    for (double lv : logv_)
        if (!std::isfinite(lv))
            throw numeric_error("WeightTable: non-finite log weight encountered");
    if (std::abs(logv_[0]) > 1e-12)
        throw numeric_error("WeightTable: V(1,1) != 1 (log = " + std::to_string(logv_[0]) + ")");
    const double tol = model().kind() == MixingKind::poisson_dirichlet ? 1e-10 : 1e-8;
    for (long n = 1; n < nmax_; ++n)
        for (long k = 1; k <= n; ++k) {
            const double r = recursion_residual(n, k);
            if (!(r < tol)) {
                std::ostringstream msg;
                msg << "WeightTable: backward recursion residual " << r << " at (n,k)=(" << n
                    << "," << k << ") exceeds " << tol;
                throw numeric_error(msg.str());
            }
        }
}

double WeightTable::log_v(long n, long k) const { return logv_[index(n, k)]; }

WeightMethod WeightTable::method(long n, long k) const { return method_[index(n, k)]; }

double WeightTable::recursion_residual(long n, long k) const {
    if (n + 1 > nmax_) throw std::out_of_range("recursion_residual: n+1 beyond table");
    const double base = log_v(n, k);
    const double a = model_.alpha();
    const double lhs = (n - k * a) * std::exp(log_v(n + 1, k) - base) +
                       std::exp(log_v(n + 1, k + 1) - base);
    return std::abs(1.0 - lhs);
}

double WeightTable::max_recursion_residual() const {
    double worst = 0.0;
    for (long n = 1; n < nmax_; ++n)
        for (long k = 1; k <= n; ++k) worst = std::max(worst, recursion_residual(n, k));
    return worst;
}

void WeightTable::write_csv(std::ostream& os) const {
    os << "n,k,V,method\n";
    for (long n = 1; n <= nmax_; ++n)
        for (long k = 1; k <= n; ++k)
            os << n << ',' << k << ',' << format_log_value(log_v(n, k)) << ','
               << to_string(method(n, k)) << '\n';
}

WeightTable WeightTable::read_csv(std::istream& is, const GibbsModel& model) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("n,k,V", 0) != 0)
        throw std::invalid_argument("WeightTable CSV: missing 'n,k,V,method' header");
    struct Row {
        long n, k;
        double logv;
        WeightMethod method;
    };
    std::vector<Row> rows;
    long nmax = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string fn, fk, fv, fm;
        if (!std::getline(ss, fn, ',') || !std::getline(ss, fk, ',') ||
            !std::getline(ss, fv, ',') || !std::getline(ss, fm))
            throw std::invalid_argument("WeightTable CSV: malformed row '" + line + "'");
        Row r;
        r.n = std::strtol(fn.c_str(), nullptr, 10);
        r.k = std::strtol(fk.c_str(), nullptr, 10);
        r.logv = parse_log_value(fv);
        if (fm == "closed") r.method = WeightMethod::closed;
        else if (fm == "sum") r.method = WeightMethod::sum;
        else if (fm == "quadrature") r.method = WeightMethod::quadrature;
        else throw std::invalid_argument("WeightTable CSV: unknown method '" + fm + "'");
        nmax = std::max(nmax, r.n);
        rows.push_back(r);
    }
    WeightTable t(model, static_cast<int>(nmax));
    const std::size_t total = static_cast<std::size_t>(nmax) * (nmax + 1) / 2;
    t.logv_.assign(total, std::numeric_limits<double>::quiet_NaN());
    t.method_.assign(total, WeightMethod::quadrature);
    for (const Row& r : rows) {
        t.logv_[t.index(r.n, r.k)] = r.logv;
        t.method_[t.index(r.n, r.k)] = r.method;
    }
    t.validate();
    t.logv_[0] = 0.0;
    return t;
}

StirlingTriangle::StirlingTriangle(Alpha alpha, int nmax) : alpha_(alpha.value()), nmax_(nmax) {
    if (nmax < 1) throw std::out_of_range("StirlingTriangle: nmax must be >= 1");
    const std::size_t total = static_cast<std::size_t>(nmax) * (nmax + 1) / 2;
    logs_.assign(total, -std::numeric_limits<double>::infinity());
    auto at = [&](long n, long k) -> double& {
        return logs_[static_cast<std::size_t>(n - 1) * n / 2 + (k - 1)];
    };
    at(1, 1) = 0.0;
    for (long n = 1; n < nmax; ++n) {
        for (long k = 1; k <= n + 1; ++k) {
            const double from_new = (k >= 2) ? at(n, k - 1) : -std::numeric_limits<double>::infinity();
            const double from_old = (k <= n)
                                        ? std::log(n - k * alpha_) + at(n, k)
                                        : -std::numeric_limits<double>::infinity();
            at(n + 1, k) = logsumexp(from_new, from_old);
        }
    }
}

double StirlingTriangle::log_s(long n, long k) const {
    if (n < 1 || n > nmax_ || k < 1 || k > n)
        throw std::out_of_range("StirlingTriangle: (n,k) out of range");
    return logs_[static_cast<std::size_t>(n - 1) * n / 2 + (k - 1)];
}

double block_count_pmf(const WeightTable& table, const StirlingTriangle& st, long n, long k) {
    if (std::abs(table.model().alpha() - st.alpha()) > 0.0)
        throw std::invalid_argument("block_count_pmf: table and triangle alphas differ");
    return std::exp(table.log_v(n, k) + st.log_s(n, k));
}

double log_eppf(const WeightTable& table, const Composition& comp) {
    const double a = table.model().alpha();
    double lp = table.log_v(comp.n(), comp.k());
    const double lg1ma = std::lgamma(1.0 - a);
    for (long nj : comp.parts()) lp += std::lgamma(nj - a) - lg1ma;
    return lp;
}

double eppf(const WeightTable& table, const Composition& comp) {
    return std::exp(log_eppf(table, comp));
}

Prediction predict_probs(const WeightTable& table, long n, long k) {
    const double base = table.log_v(n, k);
    Prediction p;
    p.p_new = std::exp(table.log_v(n + 1, k + 1) - base);
    p.existing_per_unit = std::exp(table.log_v(n + 1, k) - base);
    return p;
}

} // namespace gibbsdiv
