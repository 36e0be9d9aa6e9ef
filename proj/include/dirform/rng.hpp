#pragma once

#include <cstdint>
#include <cmath>
#include <stdexcept>

namespace dirform {

// Counter-based stream: output depends only on (seed, stream, counter), so
// sub-streams for parallel chunks are cheap and the merged result does not
// depend on scheduling.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0)
        : key_(mix(mix(seed) ^ (0x9E3779B97F4A7C15ULL * (stream + 1)))) {}

    RngStream substream(std::uint64_t index) const {
        RngStream s(0);
        s.key_ = mix(key_ ^ mix(0x6A09E667F3BCC909ULL + index));
        return s;
    }

    std::uint64_t next_u64() {
        return mix(key_ + 0x9E3779B97F4A7C15ULL * ++counter_);
    }

    // uniform on (0,1), never returns an endpoint
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Box-Muller; second deviate cached
    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = uniform();
        double u2 = uniform();
        double rad = std::sqrt(-2.0 * std::log(u1));
        double ang = 6.283185307179586476925286766559 * u2;
        cached_ = rad * std::sin(ang);
        have_cached_ = true;
        return rad * std::cos(ang);
    }

    // Marsaglia-Tsang; exact for all shape > 0 (boost step for shape < 1)
    double gamma(double shape) {
        if (shape <= 0.0)
            throw std::invalid_argument("gamma: shape must be positive");
        if (shape < 1.0) {
            double g = gamma(shape + 1.0);
            return g * std::pow(uniform(), 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double t = 1.0 + c * x;
            if (t <= 0.0) continue;
            double v = t * t * t;
            double u = uniform();
            double x2 = x * x;
            if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
            if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

private:
    // splitmix64 finalizer
    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30; z *= 0xBF58476D1CE4E5B9ULL;
        z ^= z >> 27; z *= 0x94D049BB133111EBULL;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

} // namespace dirform
