#include "mdq/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace mdq {

namespace {

constexpr double kLog2e = 1.4426950408889634074;

// H per bin with Miller-Madow correction, from an index->count map
template <class Map>
double entropy_mm_bits(const Map& counts, std::size_t n) {
    double h = 0.0;
    std::size_t support = 0;
    for (const auto& [k, c] : counts) {
        if (c == 0) continue;
        ++support;
        const double p = double(c) / double(n);
        h -= p * std::log2(p);
    }
    if (support > 1) h += kLog2e * double(support - 1) / (2.0 * double(n));
    return h;
}

} // namespace

ConditionalEntropyEstimate conditional_entropy(std::span<const std::int64_t> index,
                                               std::span<const double> dither_unit,
                                               const EntropyEstimatorConfig& cfg) {
    const std::size_t n = index.size();
    if (n != dither_unit.size()) throw std::invalid_argument("conditional_entropy: length mismatch");
    if (n < cfg.min_samples)
        throw std::invalid_argument("conditional_entropy: need at least " +
                                    std::to_string(cfg.min_samples) + " samples, got " +
                                    std::to_string(n));

    auto [lo_it, hi_it] = std::minmax_element(index.begin(), index.end());
    const std::int64_t lo = *lo_it;
    const std::size_t range = std::size_t(*hi_it - lo) + 1;

    const int bins = cfg.bins;
    std::vector<std::uint32_t> table; // dense (bin x index) histogram
    std::vector<std::size_t> bin_n(std::size_t(bins), 0);
    table.assign(std::size_t(bins) * range, 0);
    for (std::size_t i = 0; i < n; ++i) {
        double u = dither_unit[i];
        int b = std::min(bins - 1, std::max(0, int(u * bins)));
        ++table[std::size_t(b) * range + std::size_t(index[i] - lo)];
        ++bin_n[std::size_t(b)];
    }

    double h = 0.0;
    for (int b = 0; b < bins; ++b) {
        const std::size_t nb = bin_n[std::size_t(b)];
        if (nb == 0) continue;
        double hb = 0.0;
        std::size_t support = 0;
        for (std::size_t k = 0; k < range; ++k) {
            const std::uint32_t c = table[std::size_t(b) * range + k];
            if (c == 0) continue;
            ++support;
            const double p = double(c) / double(nb);
            hb -= p * std::log2(p);
        }
        if (support > 1) hb += kLog2e * double(support - 1) / (2.0 * double(nb));
        h += double(nb) / double(n) * hb;
    }

    ConditionalEntropyEstimate out;
    out.bits = h;
    out.samples = n;
    out.tolerance = cfg.tolerance_at_1e6 * std::max(1.0, std::sqrt(1e6 / double(n)));
    return out;
}

ConditionalEntropyEstimate joint_conditional_entropy(std::span<const std::int64_t> index_a,
                                                     std::span<const double> dither_unit_a,
                                                     std::span<const std::int64_t> index_b,
                                                     std::span<const double> dither_unit_b,
                                                     int bins_per_axis) {
    const std::size_t n = index_a.size();
    if (n != index_b.size() || n != dither_unit_a.size() || n != dither_unit_b.size())
        throw std::invalid_argument("joint_conditional_entropy: length mismatch");
    if (n < 100000) throw std::invalid_argument("joint_conditional_entropy: need at least 100000 samples");

    const int nb = bins_per_axis;
    std::vector<std::unordered_map<std::uint64_t, std::uint32_t>> maps(std::size_t(nb) * nb);
    std::vector<std::size_t> ctx_n(std::size_t(nb) * nb, 0);
    for (std::size_t i = 0; i < n; ++i) {
        int ba = std::min(nb - 1, std::max(0, int(dither_unit_a[i] * nb)));
        int bb = std::min(nb - 1, std::max(0, int(dither_unit_b[i] * nb)));
        const std::size_t ctx = std::size_t(ba) * nb + std::size_t(bb);
        const std::uint64_t key =
            (std::uint64_t(std::uint32_t(index_a[i])) << 32) ^ std::uint64_t(std::uint32_t(index_b[i]));
        ++maps[ctx][key];
        ++ctx_n[ctx];
    }
    double h = 0.0;
    for (std::size_t c = 0; c < maps.size(); ++c) {
        if (ctx_n[c] == 0) continue;
        h += double(ctx_n[c]) / double(n) * entropy_mm_bits(maps[c], ctx_n[c]);
    }
    ConditionalEntropyEstimate out;
    out.bits = h;
    out.samples = n;
    out.tolerance = 0.05 * std::max(1.0, std::sqrt(1e6 / double(n)));
    return out;
}

double ks_statistic_uniform(std::span<const double> samples, double lo, double hi) {
    if (samples.size() < 2) throw std::invalid_argument("ks: too few samples");
    if (!(hi > lo)) throw std::invalid_argument("ks: empty support");
    std::vector<double> s(samples.begin(), samples.end());
    std::sort(s.begin(), s.end());
    const std::size_t n = s.size();
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double f = std::clamp((s[i] - lo) / (hi - lo), 0.0, 1.0);
        d = std::max(d, std::fabs(f - double(i) / double(n)));
        d = std::max(d, std::fabs(double(i + 1) / double(n) - f));
    }
    const double rn = std::sqrt(double(n));
    return d * (rn + 0.12 + 0.11 / rn);
}

double ks_critical(double alpha) {
    if (std::fabs(alpha - 0.01) < 1e-12) return 1.628;
    if (std::fabs(alpha - 0.05) < 1e-12) return 1.358;
    throw std::invalid_argument("ks_critical: only alpha = 0.01 or 0.05 tabulated");
}

BatchStats batch_means(std::span<const double> values, int batches) {
    if (batches < 2) throw std::invalid_argument("batch_means: need >= 2 batches");
    const std::size_t n = values.size();
    if (n < std::size_t(batches)) throw std::invalid_argument("batch_means: too few values");
    const std::size_t per = n / std::size_t(batches);
    std::vector<double> m(std::size_t(batches), 0.0);
    for (int b = 0; b < batches; ++b) {
        double acc = 0.0;
        for (std::size_t i = 0; i < per; ++i) acc += values[std::size_t(b) * per + i];
        m[std::size_t(b)] = acc / double(per);
    }
    double mean = 0.0;
    for (double v : m) mean += v;
    mean /= double(batches);
    double var = 0.0;
    for (double v : m) var += (v - mean) * (v - mean);
    var /= double(batches - 1);
    BatchStats out;
    out.mean = mean;
    out.std_error = std::sqrt(var / double(batches));
    out.batches = batches;
    return out;
}

double correlation(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.empty()) throw std::invalid_argument("correlation: length mismatch");
    const double n = double(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma, db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

} // namespace mdq
