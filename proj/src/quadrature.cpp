#include "gibbsdiv/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>

namespace gibbsdiv {

namespace {

// G7/K15 nodes and weights on [-1, 1].
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a, b, value, error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

Segment gk15(const std::function<double(double)>& f, double a, double b, long& evals) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double result_g = fc * kWg[3];
    double result_k = fc * kWgk[7];
    for (int j = 0; j < 7; ++j) {
        const double x = h * kXgk[j];
        const double f1 = f(c - x);
        const double f2 = f(c + x);
        result_k += kWgk[j] * (f1 + f2);
        if (j % 2 == 1) result_g += kWg[j / 2] * (f1 + f2);
    }
    evals += 15;
    const double value = result_k * h;
    double err = std::abs((result_k - result_g) * h);
    if (err > 0.0 && std::isfinite(err))
        err = std::min(err, std::pow(200.0 * err, 1.5));
    return {a, b, value, std::max(err, std::abs(value) * 1e-15)};
}

QuadResult adapt(const std::function<double(double)>& f, const std::vector<double>& edges,
                 const QuadOptions& opts) {
    QuadResult res;
    std::priority_queue<Segment> heap;
    double total = 0.0, total_err = 0.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        if (!(edges[i + 1] > edges[i])) continue;
        Segment s = gk15(f, edges[i], edges[i + 1], res.evaluations);
        total += s.value;
        total_err += s.error;
        heap.push(s);
    }
    const int budget = 4 * opts.max_segments;
    int n = static_cast<int>(heap.size());
    for (int iter = 0; iter < 2 * budget && n < budget && !heap.empty(); ++iter) {
        if (!std::isfinite(total) || !std::isfinite(total_err)) break;
        if (total_err <= std::max(opts.abs_tol, opts.rel_tol * std::abs(total))) break;
        Segment worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {
            // interval exhausted by rounding: accept its value as final
            total_err -= worst.error;
            continue;
        }
        Segment left = gk15(f, worst.a, mid, res.evaluations);
        Segment right = gk15(f, mid, worst.b, res.evaluations);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++n;
    }
    res.value = total;
    res.abs_error = total_err;
    res.segments = n;
    res.converged = std::isfinite(total) &&
                    total_err <= std::max(opts.abs_tol, opts.rel_tol * std::abs(total));
    return res;
}

} // namespace

QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     const QuadOptions& opts) {
    if (!(b > a)) return {};
    QuadResult res = adapt(f, {a, b}, opts);
    if (!res.converged && opts.throw_on_failure) {
        std::ostringstream msg;
        msg << "quadrature failed to converge on [" << a << ", " << b
            << "]: value=" << res.value << " abs_error=" << res.abs_error
            << " segments=" << res.segments << " evaluations=" << res.evaluations;
        throw numeric_error(msg.str());
    }
    return res;
}

double integrate_log(const std::function<double(double)>& f_log, double a, double b,
                     const std::vector<double>& splits, const QuadOptions& opts) {
    constexpr double neg_inf = -std::numeric_limits<double>::infinity();
    if (!(b > a)) return neg_inf;
    // NaN from boundary probes (0 * log(0) style) counts as a vanished value.
    auto fl = [&f_log](double x) {
        const double v = f_log(x);
        return std::isnan(v) ? -std::numeric_limits<double>::infinity() : v;
    };
    std::vector<double> edges{a};
    for (double s : splits)
        if (s > a && s < b) edges.push_back(s);
    edges.push_back(b);
    std::sort(edges.begin(), edges.end());

    // Coarse scan for the peak, remembering its bracketing neighbours.
    double peak = neg_inf, x_peak = 0.5 * (a + b), br_lo = a, br_hi = b;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        const double step = (edges[i + 1] - edges[i]) / 16.0;
        for (int j = 1; j < 16; ++j) {
            const double x = edges[i] + step * j;
            const double v = fl(x);
            if (v > peak) {
                peak = v;
                x_peak = x;
                br_lo = x - step;
                br_hi = x + step;
            }
        }
    }
    if (!std::isfinite(peak)) return neg_inf;

    // Polish the peak by ternary search inside its bracket (the integrands
    // served here are unimodal around each indicated feature).
    {
        double lo = std::max(a, br_lo), hi = std::min(b, br_hi);
        for (int it = 0; it < 60; ++it) {
            const double m1 = lo + (hi - lo) / 3.0;
            const double m2 = hi - (hi - lo) / 3.0;
            if (fl(m1) < fl(m2)) lo = m1;
            else hi = m2;
        }
        const double x_ref = 0.5 * (lo + hi);
        const double v_ref = fl(x_ref);
        if (v_ref > peak) {
            peak = v_ref;
            x_peak = x_ref;
        }
    }

    // Bracket the mass: walk out to a ~40-log drop on each side and lay a
    // geometric ladder of edges so the top rule sees the feature.
    auto drop_dist = [&](int dir) {
        const double limit = dir > 0 ? b - x_peak : x_peak - a;
        if (!(limit > 0.0)) return 0.0;
        double d = limit * 1e-15;
        while (d < limit) {
            const double v = fl(x_peak + dir * d);
            if (!(v > peak - 40.0)) break;
            d = std::min(limit, d * 4.0);
        }
        return d;
    };
    const double dl = drop_dist(-1), dr = drop_dist(+1);
    for (double frac : {1.0, 0.125, 1.0 / 64.0}) {
        if (dl > 0.0) edges.push_back(x_peak - dl * frac);
        if (dr > 0.0) edges.push_back(x_peak + dr * frac);
    }
    edges.push_back(x_peak);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    while (!edges.empty() && edges.front() < a) edges.erase(edges.begin());
    while (!edges.empty() && edges.back() > b) edges.pop_back();

    // Scaled integration, re-shifting if evaluation finds a higher point.
    // The scaled total is O(feature width), so only the relative tolerance
    // is meaningful here.
    QuadOptions scaled_opts = opts;
    scaled_opts.abs_tol = 0.0;
    double shift = peak;
    for (int attempt = 0; attempt < 4; ++attempt) {
        double run_max = neg_inf;
        auto g = [&](double x) {
            const double v = fl(x);
            run_max = std::max(run_max, v);
            const double e = v - shift;
            return e < -745.0 ? 0.0 : std::exp(std::min(e, 700.0));
        };
        QuadResult res = adapt(g, edges, scaled_opts);
        if (run_max > shift + 1.0) {
            shift = run_max;
            continue;
        }
        if (!res.converged && opts.throw_on_failure) {
            std::ostringstream msg;
            msg << "log-domain quadrature failed on [" << a << ", " << b
                << "]: scaled value=" << res.value << " abs_error=" << res.abs_error
                << " segments=" << res.segments;
            throw numeric_error(msg.str());
        }
        if (!(res.value > 0.0)) return neg_inf;
        return shift + std::log(res.value);
    }
    throw numeric_error("integrate_log: peak rescaling failed to settle");
}

double integrate_log_positive_axis(const std::function<double(double)>& f_log,
                                   const QuadOptions& opts) {
    auto g = [&](double w) { return f_log(std::exp(w)) + w; };

    const double w_min = -90.0, w_max = 90.0;
    double peak = -std::numeric_limits<double>::infinity();
    double w_peak = 0.0;
    const int n_scan = 361;
    for (int i = 0; i < n_scan; ++i) {
        const double w = w_min + (w_max - w_min) * i / (n_scan - 1);
        const double v = g(w);
        if (v > peak) {
            peak = v;
            w_peak = w;
        }
    }
    if (!std::isfinite(peak))
        throw numeric_error("integrate_log_positive_axis: integrand vanishes everywhere scanned");

    const double drop = 75.0;
    double lo = w_peak, hi = w_peak;
    double step = 0.5;
    while (lo > w_min && g(lo) > peak - drop) {
        lo -= step;
        step *= 1.3;
    }
    step = 0.5;
    while (hi < w_max && g(hi) > peak - drop) {
        hi += step;
        step *= 1.3;
    }

    std::vector<double> splits{w_peak};
    for (double frac : {0.25, 0.5, 0.75})
        splits.push_back(lo + (hi - lo) * frac);
    return integrate_log(g, lo, hi, splits, opts);
}

} // namespace gibbsdiv
