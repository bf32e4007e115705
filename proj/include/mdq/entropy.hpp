#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace mdq {

// Plug-in conditional entropy H(index | dither bin) in bits per sample,
// Miller-Madow corrected per bin. `dither_unit` holds the base-cell dither
// position mapped to (0, 1]; it is discretized into `bins` equal bins.
struct ConditionalEntropyEstimate {
    double bits;
    double tolerance; // stated estimator tolerance at this sample count
    std::size_t samples;
};

struct EntropyEstimatorConfig {
    int bins = 64;
    std::size_t min_samples = 100000;
    double tolerance_at_1e6 = 0.02; // bits
};

ConditionalEntropyEstimate conditional_entropy(std::span<const std::int64_t> index,
                                               std::span<const double> dither_unit,
                                               const EntropyEstimatorConfig& cfg = {});

// Joint entropy of an index pair given both dither bins (coarser binning to
// keep the contingency table populated). Used only for reporting the
// recombined-stream rate of the splitting codec.
ConditionalEntropyEstimate joint_conditional_entropy(std::span<const std::int64_t> index_a,
                                                     std::span<const double> dither_unit_a,
                                                     std::span<const std::int64_t> index_b,
                                                     std::span<const double> dither_unit_b,
                                                     int bins_per_axis = 8);

// One-sample Kolmogorov-Smirnov test statistic against U(lo, hi].
// Returns the scaled statistic D * (sqrt(n) + 0.12 + 0.11/sqrt(n));
// compare against 1.628 for significance 0.01.
double ks_statistic_uniform(std::span<const double> samples, double lo, double hi);
double ks_critical(double alpha);

struct BatchStats {
    double mean;
    double std_error; // batch-means standard error of the mean
    int batches;
};
BatchStats batch_means(std::span<const double> values, int batches = 20);

double correlation(std::span<const double> a, std::span<const double> b);

} // namespace mdq
