#include "gibbsdiv/stable_samplers.hpp"

#include <algorithm>
#include <cmath>

namespace gibbsdiv {

TiltedMlSampler::TiltedMlSampler(Alpha alpha, double tilt_order) {
    const StableDensity& sd = stable_density(alpha);
    const double m1 = ml_moment(alpha, tilt_order, 1.0);
    const double m2 = ml_moment(alpha, tilt_order, 2.0);
    const double sdev = std::sqrt(std::max(m2 - m1 * m1, 1e-12));
    auto log_pdf = [&sd, tilt_order](double y) {
        return tilted_ml_log_pdf(sd, tilt_order, y);
    };
    grid_ = DensityGrid::build(log_pdf, std::max(1e-8, m1 / 30.0), m1 + 8.0 * sdev);
}

TiltedStableSampler::TiltedStableSampler(Alpha alpha, double tilt_order) {
    const StableDensity& sd = stable_density(alpha);
    auto log_pdf = [&sd, tilt_order](double t) {
        return tilted_stable_log_pdf(sd, tilt_order, t);
    };
    DensityGrid::BuildOptions opts;
    opts.moment_safety = false; // polynomial upper tail; higher moments diverge
    const double med = sd.median();
    grid_ = DensityGrid::build(log_pdf, med / 100.0, med * 100.0, opts);
}

} // namespace gibbsdiv
