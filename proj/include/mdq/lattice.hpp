#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mdq/rng.hpp"

namespace mdq {

// Normalized second moments of the best known lattices, for reporting
// theoretical rate budgets. Only the cubic lattice is constructed here.
inline double gn_opt(int n) {
    switch (n) {
    case 1: return 1.0 / 12.0;
    case 2: return 5.0 / (36.0 * std::sqrt(3.0)); // hexagonal, ~0.080188
    default: throw std::invalid_argument("gn_opt: no tabulated constant for n=" + std::to_string(n));
    }
}

// limit as n -> infinity
inline double gn_opt_limit() { return 1.0 / (2.0 * M_PI * M_E); }

struct QuantizedSample {
    std::vector<std::int64_t> index;
    std::vector<double> w; // reproduction, w = Q(x+z) - z (times the shaping gain)
};

// Z^n lattice quantizer with subtractive dither, step `delta` per axis.
// A nonunit `gain` represents shaping: quantize(x) == gain * base(x / gain)
// with the base dither stream, so shaped and base quantizers emit identical
// indices when they share (seed, stream_id).
class DitheredLattice {
public:
    DitheredLattice(int dim, double step, std::uint64_t seed, std::uint32_t stream_id,
                    double gain = 1.0)
        : dim_(dim), step_(step), gain_(gain), seed_(seed), stream_id_(stream_id),
          rng_(seed, stream_id) {
        if (dim < 1) throw std::invalid_argument("DitheredLattice: dimension must be positive");
        if (!(step > 0.0) || !std::isfinite(step))
            throw std::invalid_argument("DitheredLattice: step must be positive and finite");
        if (gain == 0.0 || !std::isfinite(gain))
            throw std::invalid_argument("DitheredLattice: degenerate shaping gain");
    }

    static DitheredLattice for_noise_variance(double var, std::uint64_t seed,
                                              std::uint32_t stream_id, int dim = 1) {
        auto step = step_for_noise_variance(var);
        if (!step) throw std::invalid_argument("for_noise_variance: zero variance is a pass-through stage");
        return DitheredLattice(dim, *step, seed, stream_id);
    }

    // Delta = sqrt(12 var); nullopt signals a pass-through stage (no
    // quantization needed when the innovation vanishes).
    static std::optional<double> step_for_noise_variance(double var) {
        if (var < 0.0 || !std::isfinite(var))
            throw std::invalid_argument("step_for_noise_variance: variance must be >= 0");
        if (var == 0.0) return std::nullopt;
        return std::sqrt(12.0 * var);
    }

    DitheredLattice shaped(double a) const {
        if (a == 0.0 || !std::isfinite(a))
            throw std::invalid_argument("shape: zero gain makes a degenerate lattice");
        return DitheredLattice(dim_, step_, seed_, stream_id_, gain_ * a);
    }

    int dim() const { return dim_; }
    double base_step() const { return step_; }
    double gain() const { return gain_; }
    double effective_step() const { return std::fabs(gain_) * step_; }
    double second_moment() const { return gain_ * gain_ * step_ * step_ / 12.0; }
    std::uint64_t seed() const { return seed_; }
    std::uint32_t stream_id() const { return stream_id_; }

    // base-cell dither component, uniform on (-step/2, step/2]
    double dither_component(std::uint64_t t, int axis = 0) const {
        return step_ * (rng_.uniform_half_open(t, std::uint32_t(axis)) - 0.5);
    }

    // dither position on (0, 1]; entropy coding conditions on this
    double dither_unit(std::uint64_t t, int axis = 0) const {
        return rng_.uniform_half_open(t, std::uint32_t(axis));
    }

    struct Scalar {
        std::int64_t index;
        double w;
    };

    Scalar quantize1(double x, std::uint64_t t, int axis = 0) const {
        if (!std::isfinite(x))
            throw std::invalid_argument("quantize: non-finite input at coordinate " + std::to_string(axis));
        return quantize1_with_base_dither(x, dither_component(t, axis), axis);
    }

    // Test hook: force the base-cell dither.
    Scalar quantize1_with_base_dither(double x, double z, int axis = 0) const {
        double q = (x / gain_ + z) / step_;
        // half-open cells (k-1/2, k+1/2]
        double kd = std::ceil(q - 0.5);
        if (std::fabs(kd) > 2147483648.0)
            throw std::domain_error("quantize: index overflow at coordinate " + std::to_string(axis) +
                                    " (|index| > 2^31); pre-scale the source");
        std::int64_t k = std::int64_t(kd);
        return Scalar{k, gain_ * (double(k) * step_ - z)};
    }

    // decoder path: rebuild the reproduction from the index alone
    double reproduce1(std::int64_t index, std::uint64_t t, int axis = 0) const {
        return gain_ * (double(index) * step_ - dither_component(t, axis));
    }

    QuantizedSample quantize(std::span<const double> x, std::uint64_t t) const {
        check_dim(x.size());
        QuantizedSample out;
        out.index.resize(dim_);
        out.w.resize(dim_);
        for (int a = 0; a < dim_; ++a) {
            Scalar s = quantize1(x[std::size_t(a)], t, a);
            out.index[std::size_t(a)] = s.index;
            out.w[std::size_t(a)] = s.w;
        }
        return out;
    }

    QuantizedSample quantize_with_dither(std::span<const double> x, std::span<const double> z) const {
        check_dim(x.size());
        check_dim(z.size());
        QuantizedSample out;
        out.index.resize(dim_);
        out.w.resize(dim_);
        for (int a = 0; a < dim_; ++a) {
            Scalar s = quantize1_with_base_dither(x[std::size_t(a)], z[std::size_t(a)], a);
            out.index[std::size_t(a)] = s.index;
            out.w[std::size_t(a)] = s.w;
        }
        return out;
    }

    std::vector<double> reproduce(std::span<const std::int64_t> index, std::uint64_t t) const {
        check_dim(index.size());
        auto w = std::vector<double>(std::size_t(dim_));
        for (int a = 0; a < dim_; ++a) w[std::size_t(a)] = reproduce1(index[std::size_t(a)], t, a);
        return w;
    }

private:
    void check_dim(std::size_t n) const {
        if (n != std::size_t(dim_)) throw std::invalid_argument("lattice: dimension mismatch");
    }

    int dim_;
    double step_;
    double gain_;
    std::uint64_t seed_;
    std::uint32_t stream_id_;
    CounterRng rng_;
};

} // namespace mdq
