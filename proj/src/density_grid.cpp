#include "gibbsdiv/density_grid.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <ostream>
#include <sstream>

namespace gibbsdiv {

namespace {

double safe_exp(double l) { return l < -745.0 ? 0.0 : std::exp(l); }

void write_value(std::ostream& os, double v) {
    char buf[48];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    os.write(buf, p - buf);
}

} // namespace

DensityGrid DensityGrid::build(const std::function<double(double)>& log_pdf, double lo_hint,
                               double hi_hint, const BuildOptions& opts) {
    require_positive(lo_hint, "DensityGrid: lo_hint");
    require_positive(hi_hint, "DensityGrid: hi_hint");
    if (!(hi_hint > lo_hint)) throw std::invalid_argument("DensityGrid: hull hints out of order");

    auto tail_weight = [&](double s) {
        const double p = safe_exp(log_pdf(s));
        return p * s * (opts.moment_safety ? std::max(1.0, s * s * s) : 1.0);
    };

    double lo = lo_hint, hi = hi_hint;
    for (int i = 0; i < 400 && tail_weight(lo) > opts.tail_weight_cut && lo > 1e-280; ++i)
        lo *= 0.6;
    for (int i = 0; i < 400 && tail_weight(hi) > opts.tail_weight_cut && hi < 1e280; ++i)
        hi *= 1.6;

    // Log-spaced base grid, kept in a map so refinement stays sorted.
    std::map<double, double> pts; // s -> pdf
    const double llo = std::log(lo), lhi = std::log(hi);
    for (int i = 0; i < opts.base_points; ++i) {
        const double s = std::exp(llo + (lhi - llo) * i / (opts.base_points - 1.0));
        pts.emplace(s, safe_exp(log_pdf(s)));
    }

    // Midpoint refinement against the local trapezoid error.
    for (int pass = 0; pass < 40 && static_cast<int>(pts.size()) < opts.max_points; ++pass) {
        std::vector<std::pair<double, double>> v(pts.begin(), pts.end());
        std::vector<std::pair<double, double>> err_mid; // (error, midpoint)
        double total_err = 0.0;
        for (std::size_t i = 0; i + 1 < v.size(); ++i) {
            const double h = v[i + 1].first - v[i].first;
            const double mid = 0.5 * (v[i].first + v[i + 1].first);
            const double fm = safe_exp(log_pdf(mid));
            const double e = std::abs(v[i].second + v[i + 1].second - 2.0 * fm) * h * 0.25;
            total_err += e;
            err_mid.emplace_back(e, mid);
            pts.emplace(mid, fm); // the evaluation is paid for; keep it
        }
        if (total_err < opts.target_abs_err) break;
    }

    DensityGrid g;
    g.s_.reserve(pts.size());
    g.pdf_.reserve(pts.size());
    for (const auto& [s, p] : pts) {
        if (!std::isfinite(p) || p < 0.0)
            throw numeric_error("DensityGrid: non-finite or negative pdf at s = " +
                                std::to_string(s));
        g.s_.push_back(s);
        g.pdf_.push_back(p);
    }
    g.cdf_.resize(g.s_.size());
    double acc = 0.0;
    g.cdf_[0] = 0.0;
    for (std::size_t i = 1; i < g.s_.size(); ++i) {
        acc += 0.5 * (g.pdf_[i] + g.pdf_[i - 1]) * (g.s_[i] - g.s_[i - 1]);
        g.cdf_[i] = acc;
    }
    if (opts.check_mass && !(std::abs(acc - 1.0) <= opts.mass_tol)) {
        std::ostringstream msg;
        msg << "DensityGrid: tabulated mass " << acc << " deviates from 1 beyond "
            << opts.mass_tol << " (hull [" << g.s_.front() << ", " << g.s_.back() << "], "
            << g.s_.size() << " points)";
        throw numeric_error(msg.str());
    }
    return g;
}

DensityGrid DensityGrid::from_points(const std::function<double(double)>& log_pdf,
                                     std::vector<double> s) {
    if (s.size() < 2) throw std::invalid_argument("DensityGrid::from_points: need >= 2 points");
    for (std::size_t i = 0; i < s.size(); ++i) {
        require_positive(s[i], "DensityGrid::from_points: s");
        if (i > 0 && !(s[i] > s[i - 1]))
            throw std::invalid_argument("DensityGrid::from_points: s must be increasing");
    }
    DensityGrid g;
    g.s_ = std::move(s);
    g.pdf_.resize(g.s_.size());
    for (std::size_t i = 0; i < g.s_.size(); ++i) {
        g.pdf_[i] = safe_exp(log_pdf(g.s_[i]));
        if (!std::isfinite(g.pdf_[i]) || g.pdf_[i] < 0.0)
            throw numeric_error("DensityGrid: non-finite pdf at s = " + std::to_string(g.s_[i]));
    }
    g.cdf_.resize(g.s_.size());
    g.cdf_[0] = 0.0;
    double acc = 0.0;
    for (std::size_t i = 1; i < g.s_.size(); ++i) {
        acc += 0.5 * (g.pdf_[i] + g.pdf_[i - 1]) * (g.s_[i] - g.s_[i - 1]);
        g.cdf_[i] = acc;
    }
    return g;
}

double DensityGrid::pdf_at(double s) const {
    if (s <= s_.front() || s >= s_.back()) return 0.0;
    const auto it = std::upper_bound(s_.begin(), s_.end(), s);
    const std::size_t i = static_cast<std::size_t>(it - s_.begin()) - 1;
    const double w = (s - s_[i]) / (s_[i + 1] - s_[i]);
    return pdf_[i] * (1.0 - w) + pdf_[i + 1] * w;
}

double DensityGrid::cdf_at(double s) const {
    if (s <= s_.front()) return 0.0;
    if (s >= s_.back()) return cdf_.back();
    const auto it = std::upper_bound(s_.begin(), s_.end(), s);
    const std::size_t i = static_cast<std::size_t>(it - s_.begin()) - 1;
    const double w = (s - s_[i]) / (s_[i + 1] - s_[i]);
    return cdf_[i] * (1.0 - w) + cdf_[i + 1] * w;
}

double DensityGrid::quantile(double u) const {
    if (u <= 0.0) return s_.front();
    if (u >= cdf_.back()) return s_.back();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    std::size_t i = static_cast<std::size_t>(it - cdf_.begin());
    if (i == 0) return s_.front();
    --i;
    const double span = cdf_[i + 1] - cdf_[i];
    if (span <= 0.0) return s_[i];
    const double w = (u - cdf_[i]) / span;
    return s_[i] * (1.0 - w) + s_[i + 1] * w;
}

double DensityGrid::moment(double r) const {
    double acc = 0.0;
    for (std::size_t i = 1; i < s_.size(); ++i) {
        const double fl = pdf_[i - 1] * std::pow(s_[i - 1], r);
        const double fr = pdf_[i] * std::pow(s_[i], r);
        acc += 0.5 * (fl + fr) * (s_[i] - s_[i - 1]);
    }
    return acc;
}

void DensityGrid::write_csv(std::ostream& os) const {
    os << "s,pdf,cdf\n";
    for (std::size_t i = 0; i < s_.size(); ++i) {
        write_value(os, s_[i]);
        os.put(',');
        write_value(os, pdf_[i]);
        os.put(',');
        write_value(os, cdf_[i]);
        os.put('\n');
    }
}

} // namespace gibbsdiv
