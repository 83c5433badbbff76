#pragma once

#include <vector>

#include "gibbsdiv/common.hpp"
#include "gibbsdiv/quadrature.hpp"
#include "gibbsdiv/rng.hpp"

namespace gibbsdiv {

// One-sided alpha-stable law on (0, inf) with Laplace transform
// E[exp(-lambda T)] = exp(-(scale*lambda)^alpha).  Evaluation uses the
// convergent power series in t^(-alpha) for large t and the Zolotarev
// single-integral representation, rescaled around the integrand peak,
// elsewhere; both branches carry relative accuracy ~1e-9 on the supported
// range.  Sampling is exact (Kanter's method).
class StableDensity {
  public:
    explicit StableDensity(Alpha alpha, StableConvention conv = StableConvention{});

    double alpha() const { return alpha_; }
    double scale() const { return conv_.scale(); }

    double pdf(double t) const;
    double log_pdf(double t) const;
    double cdf(double t) const;
    double sample(Pcg64& rng) const;

    // Median of T; a convenient O(1) length scale for integration splits.
    double median() const { return median_; }

    // log A(phi) - log A(0) for the Zolotarev function A on (0, pi).
    // Exposed because the mixture integrals reuse it.
    double zolotarev_log_ratio(double phi) const;

    // t at and above which the series branch is in force.
    double series_threshold() const { return t_series_ * conv_.scale(); }

  private:
    double log_pdf_std(double t) const; // scale = 1
    double cdf_std(double t) const;
    double series_log_pdf(double t) const;   // requires t >= t_series_
    double series_survival(double t) const;  // requires t >= t_series_
    double zolotarev_log_pdf(double t) const;
    double zolotarev_log_cdf_int(double t) const; // log int exp(-zA0 expm1(Delta))
    void build_quad_tables();
    double interp_eta(const std::vector<double>& eta, double u) const;

    double alpha_;
    StableConvention conv_;
    double log_a0_;   // log A(0) = (alpha/(1-alpha)) log alpha + log(1-alpha)
    double t_series_; // series branch threshold (standard scale)
    double median_;
    std::vector<double> series_coef_;  // signed k-th coefficient
    std::vector<double> series_bound_; // magnitude bound for the k-th term

    // The quadrature branch factors as
    //   log f = C - log(t)/(1-alpha) - z A0 + eta(log t),
    //   log F = -log pi - z A0 + eta_F(log t),
    // with eta slowly varying; both are tabulated on a uniform log-t grid up
    // to z A0 = 1e9 and interpolated (Hermite, five-point slopes).  Beyond
    // the table the half-Gaussian Laplace limit eta ~ log sqrt(pi/(2 z A0
    // alpha)) is within ~1e-9.
    double u_lo_ = 0.0, u_hi_ = 0.0, du_ = 0.0;
    std::vector<double> eta_pdf_, eta_cdf_;
};

// Density of S = T^(-alpha): g_alpha(s) = s^(-1-1/alpha) f_alpha(s^(-1/alpha)) / alpha.
double ml_pdf(const StableDensity& sd, double s);
double ml_log_pdf(const StableDensity& sd, double s);

// Polynomially tilted Mittag-Leffler density
//   g_{alpha,c*alpha}(y) = Gamma(c*alpha+1)/Gamma(c+1) * y^c * g_alpha(y),
// for real tilt order c >= 0 (c = 0 gives g_alpha back).
double tilted_ml_pdf(const StableDensity& sd, double c, double y);
double tilted_ml_log_pdf(const StableDensity& sd, double c, double y);

// Polynomially tilted stable density
//   f_{S_{alpha,c*alpha}}(t) = Gamma(c*alpha+1)/Gamma(c+1) * t^(-c*alpha) * f_alpha(t).
double tilted_stable_pdf(const StableDensity& sd, double c, double t);
double tilted_stable_log_pdf(const StableDensity& sd, double c, double t);

// E[Y^r] for Y ~ g_{alpha,c*alpha}:
//   Gamma(c+r+1)/Gamma(c+1) * Gamma(c*alpha+1)/Gamma(c*alpha+r*alpha+1).
double ml_moment(Alpha alpha, double c, double r);

// log of J(c, y) = Integral_{0}^{1} p^c f_alpha((1-p) y) dp, c > -1, y > 0.
// This kernel carries every conditional-diversity density and the generic
// Gibbs weight integral.
double log_stable_beta_integral(const StableDensity& sd, double c, double y);

// Convenience wrappers with a process-wide per-alpha cache.
const StableDensity& stable_density(Alpha alpha);
double stable_pdf(Alpha alpha, double t);
double stable_log_pdf(Alpha alpha, double t);
double stable_cdf(Alpha alpha, double t);
double sample_stable(Alpha alpha, Pcg64& rng);
double ml_pdf(Alpha alpha, double s);
double tilted_ml_pdf(Alpha alpha, double c, double y);
double tilted_stable_pdf(Alpha alpha, double c, double t);

} // namespace gibbsdiv
