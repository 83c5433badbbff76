#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace gibbsdiv {

// Thrown when a quadrature or iteration fails to reach its target accuracy.
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when an alternating sum has lost too many digits to be trusted.
// Callers are expected to fall back to an integral-based route.
struct precision_error : numeric_error {
    using numeric_error::numeric_error;
};

// Stability index, restricted to the strictly stable regime (0, 1).
class Alpha {
  public:
    explicit Alpha(double value) : value_(value) {
        if (!(value > 0.0) || !(value < 1.0))
            throw std::domain_error("Alpha: stability index must lie strictly in (0, 1), got " +
                                    std::to_string(value));
    }
    double value() const { return value_; }

  private:
    double value_;
};

// Scale convention for the one-sided stable law: the Laplace exponent is
// (scale * lambda)^alpha.  scale = 1 is the standard convention used as the
// base everywhere in this library.
class StableConvention {
  public:
    explicit StableConvention(double scale = 1.0) : scale_(scale) {
        if (!(scale > 0.0) || !std::isfinite(scale))
            throw std::domain_error("StableConvention: scale must be positive and finite");
    }
    double scale() const { return scale_; }

  private:
    double scale_;
};

// Identifies one reproducible random stream.  Identical (seed, stream)
// pairs yield identical sequences on every platform; distinct stream ids
// yield statistically independent substreams of the same seed.
struct RandomStream {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;

    RandomStream substream(std::uint64_t offset) const { return {seed, stream + offset}; }
};

inline double require_positive(double x, const char* what) {
    if (!std::isfinite(x) || x <= 0.0)
        throw std::domain_error(std::string(what) + " must be positive and finite, got " +
                                std::to_string(x));
    return x;
}

} // namespace gibbsdiv
