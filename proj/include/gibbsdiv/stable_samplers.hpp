#pragma once

#include "gibbsdiv/density_grid.hpp"
#include "gibbsdiv/stable.hpp"

namespace gibbsdiv {

// Draws from the polynomially tilted Mittag-Leffler law g_{alpha,c*alpha} by
// inverse CDF on an adaptively refined tabulation.  Rejection against
// g_alpha is not an option here: the polynomial tilt makes the likelihood
// ratio unbounded.
class TiltedMlSampler {
  public:
    TiltedMlSampler(Alpha alpha, double tilt_order);
    double sample(Pcg64& rng) const { return grid_.sample(rng); }
    const DensityGrid& grid() const { return grid_; }

  private:
    DensityGrid grid_;
};

// Same mechanism for the polynomially tilted stable law t^(-c*alpha) f_alpha(t).
// Its tails are polynomial, so the tabulation hull is chosen by mass rather
// than by moments.
class TiltedStableSampler {
  public:
    TiltedStableSampler(Alpha alpha, double tilt_order);
    double sample(Pcg64& rng) const { return grid_.sample(rng); }
    const DensityGrid& grid() const { return grid_; }

  private:
    DensityGrid grid_;
};

// Exact sampler for the PD conditional diversity via its product
// representation Y_{a,theta/a+k} * Beta(theta + k a, n - k a)^a.
class PdConditionalSampler {
  public:
    PdConditionalSampler(Alpha alpha, double theta, long n, long k)
        : alpha_(alpha.value()),
          beta_a_(theta + k * alpha.value()),
          beta_b_(n - k * alpha.value()),
          tilted_(alpha, theta / alpha.value() + k) {
        if (!(theta > -alpha.value()))
            throw std::domain_error("PdConditionalSampler: theta > -alpha required");
    }
    double sample(Pcg64& rng) const {
        const double y = tilted_.sample(rng);
        return y * std::pow(rng.beta(beta_a_, beta_b_), alpha_);
    }

  private:
    double alpha_, beta_a_, beta_b_;
    TiltedMlSampler tilted_;
};

} // namespace gibbsdiv
