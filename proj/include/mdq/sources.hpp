#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mdq/rng.hpp"

namespace mdq {

enum class SourceFamily { gaussian, uniform, laplacian, file };

std::string to_string(SourceFamily f);

struct SourceSpec {
    SourceFamily family = SourceFamily::gaussian;
    double variance = 1.0; // original scale; samples are normalized to unit variance
    std::uint64_t seed = 1;
    std::string path; // file family: raw little-endian f64 stream
};

SourceSpec parse_source(const std::string& text, std::uint64_t seed);

// Unit-variance sampler. File sources are loaded once and normalized by
// their empirical standard deviation (the original scale is recorded).
class SourceSampler {
public:
    SourceSampler(const SourceSpec& spec, std::uint32_t stream_id = 0);

    double sample(std::uint64_t t) const;
    std::vector<double> samples(std::size_t n, std::uint64_t t0 = 0) const;

    // entropy power of the unit-variance source: closed form per family,
    // spacing-estimated for files (tolerance ~0.05 bits on h)
    double entropy_power() const { return entropy_power_; }
    double original_scale() const { return scale_; }
    SourceFamily family() const { return spec_.family; }

private:
    SourceSpec spec_;
    CounterRng rng_;
    std::vector<double> file_data_;
    double scale_ = 1.0;
    double entropy_power_ = 1.0;
};

// closed-form entropy power of a unit-variance member of the family
double entropy_power_unit_variance(SourceFamily f);

// Vasicek spacing estimator of differential entropy, in bits
double differential_entropy_estimate(std::span<const double> samples);

void write_raw_f64(const std::string& path, std::span<const double> samples);
std::vector<double> read_raw_f64(const std::string& path);

} // namespace mdq
