#include "mdq/sources.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace mdq {

std::string to_string(SourceFamily f) {
    switch (f) {
    case SourceFamily::gaussian: return "gaussian";
    case SourceFamily::uniform: return "uniform";
    case SourceFamily::laplacian: return "laplacian";
    case SourceFamily::file: return "file";
    }
    return "?";
}

SourceSpec parse_source(const std::string& text, std::uint64_t seed) {
    SourceSpec s;
    s.seed = seed;
    if (text == "gaussian")
        s.family = SourceFamily::gaussian;
    else if (text == "uniform")
        s.family = SourceFamily::uniform;
    else if (text == "laplacian")
        s.family = SourceFamily::laplacian;
    else if (text.rfind("file:", 0) == 0) {
        s.family = SourceFamily::file;
        s.path = text.substr(5);
    } else
        throw std::invalid_argument("unknown source: " + text);
    return s;
}

double entropy_power_unit_variance(SourceFamily f) {
    switch (f) {
    case SourceFamily::gaussian: return 1.0;
    case SourceFamily::uniform: return 6.0 / (M_PI * M_E); // ~0.702510
    case SourceFamily::laplacian: return M_E / M_PI;       // ~0.865256
    case SourceFamily::file:
        throw std::invalid_argument("file sources need an estimated entropy power");
    }
    return 1.0;
}

double differential_entropy_estimate(std::span<const double> samples) {
    const std::size_t n = samples.size();
    if (n < 1000) throw std::invalid_argument("entropy estimate: need at least 1000 samples");
    std::vector<double> s(samples.begin(), samples.end());
    std::sort(s.begin(), s.end());
    const std::size_t m = std::size_t(std::sqrt(double(n)));
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t hi = std::min(n - 1, i + m);
        const std::size_t lo = i >= m ? i - m : 0;
        const double gap = std::max(s[hi] - s[lo], 1e-300);
        acc += std::log2(double(n) / (2.0 * double(m)) * gap);
    }
    return acc / double(n);
}

SourceSampler::SourceSampler(const SourceSpec& spec, std::uint32_t stream_id)
    : spec_(spec), rng_(spec.seed, stream_id) {
    scale_ = std::sqrt(spec.variance);
    if (spec.family == SourceFamily::file) {
        file_data_ = read_raw_f64(spec.path);
        if (file_data_.size() < 1000)
            throw std::invalid_argument("file source: need at least 1000 samples");
        double mean = 0.0;
        for (double v : file_data_) mean += v;
        mean /= double(file_data_.size());
        double var = 0.0;
        for (double v : file_data_) var += (v - mean) * (v - mean);
        var /= double(file_data_.size());
        if (!(var > 0.0)) throw std::invalid_argument("file source: zero variance");
        scale_ = std::sqrt(var);
        for (double& v : file_data_) v = (v - mean) / scale_;
        const double h = differential_entropy_estimate(file_data_);
        entropy_power_ = std::exp2(2.0 * h) / (2.0 * M_PI * M_E);
    } else {
        entropy_power_ = entropy_power_unit_variance(spec.family);
    }
}

double SourceSampler::sample(std::uint64_t t) const {
    switch (spec_.family) {
    case SourceFamily::gaussian: return rng_.gaussian(t);
    case SourceFamily::uniform: return rng_.uniform_source(t);
    case SourceFamily::laplacian: return rng_.laplacian(t);
    case SourceFamily::file: return file_data_[std::size_t(t % file_data_.size())];
    }
    return 0.0;
}

std::vector<double> SourceSampler::samples(std::size_t n, std::uint64_t t0) const {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = sample(t0 + i);
    return out;
}

void write_raw_f64(const std::string& path, std::span<const double> samples) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f.write(reinterpret_cast<const char*>(samples.data()),
            std::streamsize(samples.size() * sizeof(double)));
}

std::vector<double> read_raw_f64(const std::string& path) {
    std::ifstream f(path, std::ios::binary | std::ios::ate);
    if (!f) throw std::runtime_error("cannot open " + path);
    const std::streamsize bytes = f.tellg();
    f.seekg(0);
    std::vector<double> out(std::size_t(bytes) / sizeof(double));
    f.read(reinterpret_cast<char*>(out.data()), std::streamsize(out.size() * sizeof(double)));
    return out;
}

} // namespace mdq
