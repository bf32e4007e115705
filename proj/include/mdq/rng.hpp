#pragma once

#include <cmath>
#include <cstdint>

namespace mdq {

// Counter-based random stream keyed by (seed, stream_id). Every draw is a
// pure function of (key, t, lane), so encoder and decoder regenerate the
// same dither without transmission and trials are order-independent.
// Two finalizer rounds (splitmix64 + murmur3) over an affine counter.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint32_t stream_id)
        : key_(init_key(seed, stream_id)) {}

    std::uint64_t word(std::uint64_t t, std::uint32_t lane = 0) const {
        std::uint64_t z = key_ + t * 0x9E3779B97F4A7C15ull +
                          (std::uint64_t(lane) + 1) * 0xC2B2AE3D27D4EB4Full;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        z ^= z >> 31;
        z = (z ^ (z >> 33)) * 0xFF51AFD7ED558CCDull;
        z = (z ^ (z >> 33)) * 0xC4CEB9FE1A85EC53ull;
        return z ^ (z >> 33);
    }

    // uniform on (0, 1]
    double uniform_half_open(std::uint64_t t, std::uint32_t lane = 0) const {
        return double((word(t, lane) >> 11) + 1) * 0x1.0p-53;
    }

    // uniform on (0, 1), symmetric about 1/2
    double uniform_open(std::uint64_t t, std::uint32_t lane = 0) const {
        return (double(word(t, lane) >> 12) + 0.5) * 0x1.0p-52;
    }

    double gaussian(std::uint64_t t) const {
        double u1 = uniform_open(t, 0);
        double u2 = uniform_open(t, 1);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

    // unit-variance Laplacian via inverse CDF
    double laplacian(std::uint64_t t) const {
        double u = uniform_open(t, 0) - 0.5;
        double b = 0.7071067811865475244008444;
        return (u < 0.0 ? b : -b) * std::log(1.0 - 2.0 * std::fabs(u));
    }

    // unit-variance uniform on (-sqrt(3), sqrt(3))
    double uniform_source(std::uint64_t t) const {
        return 3.4641016151377545870548926 * (uniform_open(t, 0) - 0.5);
    }

private:
    static std::uint64_t init_key(std::uint64_t seed, std::uint32_t stream_id) {
        std::uint64_t z = seed ^ 0x243F6A8885A308D3ull;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        z ^= z >> 31;
        return z + std::uint64_t(stream_id) * 0xD1342543DE82EF95ull;
    }

    std::uint64_t key_;
};

} // namespace mdq
