#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "gibbsdiv/common.hpp"
#include "gibbsdiv/rng.hpp"

namespace gibbsdiv {

// Tabulated density on a positive grid with its cumulative-trapezoid CDF.
// Serves evaluation, inverse-CDF sampling and KS comparisons.  The grid is
// log-spaced over an automatically expanded hull and midpoint-refined until
// the trapezoid error estimate is far below the mass tolerance.
class DensityGrid {
  public:
    struct BuildOptions {
        int base_points = 500;
        int max_points = 24000;
        double mass_tol = 1e-6;       // |total mass - 1| accepted
        double target_abs_err = 1e-9; // summed trapezoid error target
        // Hull expansion stops once pdf(s) * s * max(1, s^3) drops below this
        // (keeps moments up to r = 3 accurate).
        double tail_weight_cut = 1e-11;
        // Drop the s^3 factor for targets with polynomial tails whose higher
        // moments diverge.
        bool moment_safety = true;
        bool check_mass = true;
    };

    static DensityGrid build(const std::function<double(double)>& log_pdf, double lo_hint,
                             double hi_hint, const BuildOptions& opts);
    static DensityGrid build(const std::function<double(double)>& log_pdf, double lo_hint,
                             double hi_hint) {
        return build(log_pdf, lo_hint, hi_hint, BuildOptions());
    }

    // Tabulates exactly the given abscissae (no hull expansion or refinement);
    // the mass check is skipped since the caller owns the grid choice.
    static DensityGrid from_points(const std::function<double(double)>& log_pdf,
                                   std::vector<double> s);

    const std::vector<double>& grid() const { return s_; }
    const std::vector<double>& pdf() const { return pdf_; }
    const std::vector<double>& cdf() const { return cdf_; }
    double total_mass() const { return cdf_.back(); }

    double pdf_at(double s) const; // linear interpolation, 0 outside the hull
    double cdf_at(double s) const; // piecewise linear, clamped to [0, total]
    double quantile(double u) const;
    double sample(Pcg64& rng) const { return quantile(rng.uniform() * total_mass()); }

    // Trapezoid integral of s^r * pdf over the hull.
    double moment(double r) const;

    // CSV schema: "s,pdf,cdf" with 17 significant digits.
    void write_csv(std::ostream& os) const;

  private:
    std::vector<double> s_, pdf_, cdf_;
};

} // namespace gibbsdiv
