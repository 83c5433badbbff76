#pragma once

#include <cstdint>

#include "gibbsdiv/common.hpp"

namespace gibbsdiv {

// PCG64 (XSL-RR 128/64).  Hand-rolled so that sequences are bit-identical
// across standard libraries and platforms; std::uniform_real_distribution
// gives no such guarantee.  The stream id selects the LCG increment, which
// is the intended substream mechanism of the generator family.
class Pcg64 {
  public:
    explicit Pcg64(RandomStream rs) {
        const unsigned __int128 init_state =
            (static_cast<unsigned __int128>(splitmix(rs.seed)) << 64) |
            splitmix(rs.seed ^ 0xda3e39cb94b95bdbULL);
        const unsigned __int128 init_seq =
            (static_cast<unsigned __int128>(splitmix(rs.stream ^ 0x6a09e667f3bcc909ULL)) << 64) |
            splitmix(rs.stream + 0x9e3779b97f4a7c15ULL);
        inc_ = (init_seq << 1) | 1u;
        state_ = 0u;
        next();
        state_ += init_state;
        next();
    }

    std::uint64_t next() {
        state_ = state_ * kMul + inc_;
        const std::uint64_t xored =
            static_cast<std::uint64_t>(state_ >> 64) ^ static_cast<std::uint64_t>(state_);
        const unsigned rot = static_cast<unsigned>(state_ >> 122);
        return (xored >> rot) | (xored << ((64u - rot) & 63u));
    }

    // Uniform on the open interval (0, 1).
    double uniform() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

    // Uniform on (0, hi).
    double uniform(double hi) { return uniform() * hi; }

    double exponential() { return -std::log(uniform()); }

    // Standard normal via the polar method.
    double normal() {
        for (;;) {
            const double u = 2.0 * uniform() - 1.0;
            const double v = 2.0 * uniform() - 1.0;
            const double s = u * u + v * v;
            if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
        }
    }

    // Marsaglia-Tsang, with the u^(1/a) boost for shape < 1.
    double gamma(double shape) {
        if (shape < 1.0) return gamma(shape + 1.0) * std::pow(uniform(), 1.0 / shape);
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform();
            if (u < 1.0 - 0.0331 * (x * x) * (x * x)) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    double beta(double a, double b) {
        const double x = gamma(a);
        const double y = gamma(b);
        return x / (x + y);
    }

  private:
    static std::uint64_t splitmix(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    static constexpr unsigned __int128 kMul =
        (static_cast<unsigned __int128>(0x2360ed051fc65da4ULL) << 64) | 0x4385df649fccf645ULL;

    unsigned __int128 state_ = 0;
    unsigned __int128 inc_ = 0;
};

} // namespace gibbsdiv
