#include "gibbsdiv/gibbs_model.hpp"

#include <algorithm>
#include <cmath>

#include "gibbsdiv/quadrature.hpp"

namespace gibbsdiv {

TabulatedTilt::TabulatedTilt(std::vector<double> t, std::vector<double> h, Tail left, Tail right)
    : left_(left), right_(right) {
    if (t.size() != h.size() || t.size() < 4)
        throw std::invalid_argument("TabulatedTilt: need >= 4 matching (t, h) points");
    x_.reserve(t.size());
    y_.reserve(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        require_positive(t[i], "TabulatedTilt: t");
        require_positive(h[i], "TabulatedTilt: h");
        if (i > 0 && !(t[i] > t[i - 1]))
            throw std::invalid_argument("TabulatedTilt: t must be strictly increasing");
        x_.push_back(std::log(t[i]));
        y_.push_back(std::log(h[i]));
    }
    t_min_ = t.front();
    t_max_ = t.back();

    // Fritsch-Carlson slopes: monotone on monotone data, flat at local extrema.
    const std::size_t n = x_.size();
    std::vector<double> d(n - 1), w(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        w[i] = x_[i + 1] - x_[i];
        d[i] = (y_[i + 1] - y_[i]) / w[i];
    }
    slope_.assign(n, 0.0);
    slope_[0] = d[0];
    slope_[n - 1] = d[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (d[i - 1] * d[i] <= 0.0) {
            slope_[i] = 0.0;
        } else {
            const double w1 = 2.0 * w[i] + w[i - 1];
            const double w2 = w[i] + 2.0 * w[i - 1];
            slope_[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
        }
    }
}

double TabulatedTilt::log_h(double t) const {
    require_positive(t, "TabulatedTilt::log_h: t");
    const double x = std::log(t);
    if (x <= x_.front()) {
        switch (left_) {
            case Tail::power: return y_.front() + slope_.front() * (x - x_.front());
            case Tail::clamp: return y_.front();
            case Tail::zero: return -std::numeric_limits<double>::infinity();
        }
    }
    if (x >= x_.back()) {
        switch (right_) {
            case Tail::power: return y_.back() + slope_.back() * (x - x_.back());
            case Tail::clamp: return y_.back();
            case Tail::zero: return -std::numeric_limits<double>::infinity();
        }
    }
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
    const double hseg = x_[i + 1] - x_[i];
    const double u = (x - x_[i]) / hseg;
    const double u2 = u * u, u3 = u2 * u;
    return y_[i] * (2 * u3 - 3 * u2 + 1) + hseg * slope_[i] * (u3 - 2 * u2 + u) +
           y_[i + 1] * (-2 * u3 + 3 * u2) + hseg * slope_[i + 1] * (u3 - u2);
}

GibbsModel GibbsModel::poisson_dirichlet(Alpha alpha, double theta) {
    if (!(theta > -alpha.value()))
        throw std::domain_error("poisson_dirichlet: requires theta > -alpha");
    return GibbsModel(alpha, PdMixing{theta});
}

GibbsModel GibbsModel::generalized_gamma(Alpha alpha, double beta) {
    require_positive(beta, "generalized_gamma: beta");
    return GibbsModel(alpha, GenGammaMixing{beta});
}

GibbsModel GibbsModel::tabulated(Alpha alpha, TabulatedTilt tilt, double mass_tol) {
    GibbsModel m(alpha, std::move(tilt));
    const StableDensity& sd = m.density();
    auto f_log = [&](double t) { return m.log_h(t) + sd.log_pdf(t); };
    const double mass = std::exp(integrate_log_positive_axis(f_log));
    if (!(std::abs(mass - 1.0) <= mass_tol))
        throw std::domain_error("tabulated mixing: h * f_alpha integrates to " +
                                std::to_string(mass) + ", not 1 within " +
                                std::to_string(mass_tol));
    return m;
}

MixingKind GibbsModel::kind() const {
    if (std::holds_alternative<PdMixing>(mixing_)) return MixingKind::poisson_dirichlet;
    if (std::holds_alternative<GenGammaMixing>(mixing_)) return MixingKind::generalized_gamma;
    return MixingKind::tabulated;
}

double GibbsModel::theta() const {
    if (kind() != MixingKind::poisson_dirichlet)
        throw std::logic_error("GibbsModel::theta: not a Poisson-Dirichlet model");
    return std::get<PdMixing>(mixing_).theta;
}

double GibbsModel::beta() const {
    if (kind() != MixingKind::generalized_gamma)
        throw std::logic_error("GibbsModel::beta: not a generalized-Gamma model");
    return std::get<GenGammaMixing>(mixing_).beta;
}

const TabulatedTilt& GibbsModel::tilt() const {
    if (kind() != MixingKind::tabulated)
        throw std::logic_error("GibbsModel::tilt: not a tabulated-tilt model");
    return std::get<TabulatedTilt>(mixing_);
}

double GibbsModel::log_h(double t) const {
    require_positive(t, "GibbsModel::log_h: t");
    switch (kind()) {
        case MixingKind::poisson_dirichlet: {
            const double th = theta();
            return std::lgamma(th + 1.0) - std::lgamma(th / alpha() + 1.0) - th * std::log(t);
        }
        case MixingKind::generalized_gamma: {
            // Exponential tilt exp(psi - lambda t) with lambda = beta^(1/alpha),
            // the parameterization whose weights are the incomplete-gamma sums;
            // psi(lambda) = lambda^alpha = beta under the scale-1 convention.
            const double b = beta();
            return b - std::pow(b, 1.0 / alpha()) * t;
        }
        case MixingKind::tabulated: return tilt().log_h(t);
    }
    return 0.0; // unreachable
}

Composition::Composition(std::vector<long> parts) : parts_(std::move(parts)) {
    if (parts_.empty()) throw std::invalid_argument("Composition: needs at least one part");
    for (long p : parts_) {
        if (p < 1) throw std::invalid_argument("Composition: parts must be >= 1");
        n_ += p;
    }
}

} // namespace gibbsdiv
