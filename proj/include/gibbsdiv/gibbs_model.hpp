#pragma once

#include <variant>
#include <vector>

#include "gibbsdiv/common.hpp"
#include "gibbsdiv/stable.hpp"

namespace gibbsdiv {

// Tilt function h on (0, inf) given as a table, interpolated monotone-cubic
// in (log t, log h).  Outside the declared support the log-log curve is
// extended with the boundary slope (a power law); `clamp_left/right` freeze
// the boundary value instead, and `zero_*` truncate the tilt to 0.
class TabulatedTilt {
  public:
    enum class Tail { power, clamp, zero };

    TabulatedTilt(std::vector<double> t, std::vector<double> h, Tail left = Tail::power,
                  Tail right = Tail::power);

    double log_h(double t) const;
    double t_min() const { return t_min_; }
    double t_max() const { return t_max_; }

  private:
    std::vector<double> x_; // log t
    std::vector<double> y_; // log h
    std::vector<double> slope_;
    double t_min_ = 0.0, t_max_ = 0.0;
    Tail left_, right_;
};

struct PdMixing {
    double theta;
};
struct GenGammaMixing {
    double beta;
};

enum class MixingKind { poisson_dirichlet, generalized_gamma, tabulated };

// One Gibbs partition model of type alpha: the stability index plus a mixing
// specification, i.e. the tilt h against the stable density.
class GibbsModel {
  public:
    static GibbsModel poisson_dirichlet(Alpha alpha, double theta);
    static GibbsModel generalized_gamma(Alpha alpha, double beta);
    // Validates that h * f_alpha integrates to 1 within mass_tol.
    static GibbsModel tabulated(Alpha alpha, TabulatedTilt tilt, double mass_tol = 1e-6);

    MixingKind kind() const;
    double alpha() const { return alpha_.value(); }
    Alpha alpha_index() const { return alpha_; }
    double theta() const; // PD only
    double beta() const;  // GG only
    const TabulatedTilt& tilt() const;

    // log h(t), constants included so that h(t) f_alpha(t) is a density.
    double log_h(double t) const;

    const StableDensity& density() const { return stable_density(alpha_); }

  private:
    GibbsModel(Alpha alpha, std::variant<PdMixing, GenGammaMixing, TabulatedTilt> mixing)
        : alpha_(alpha), mixing_(std::move(mixing)) {}

    Alpha alpha_;
    std::variant<PdMixing, GenGammaMixing, TabulatedTilt> mixing_;
};

// Block sizes (n_1, ..., n_k) of a partition of [n].
class Composition {
  public:
    explicit Composition(std::vector<long> parts);
    const std::vector<long>& parts() const { return parts_; }
    long n() const { return n_; }
    long k() const { return static_cast<long>(parts_.size()); }

  private:
    std::vector<long> parts_;
    long n_ = 0;
};

} // namespace gibbsdiv
