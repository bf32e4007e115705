#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mdq/entropy.hpp"
#include "mdq/lattice.hpp"
#include "mdq/region.hpp"

namespace mdq {

enum class TopologyKind { successive, splitting, separate, reuse };

std::string to_string(TopologyKind k);
TopologyKind topology_from_string(const std::string& s);

// One ECDQ stage: quantizes tap_x * X + sum taps[j] * W_j. A zero innovation
// variance makes the stage a deterministic predictor (no quantizer, no index
// stream, no rate).
struct Stage {
    double tap_x = 0.0;
    std::vector<std::pair<int, double>> taps; // (earlier stage, coefficient)
    double noise_var = 0.0;
    bool pass_through = false;
    std::optional<DitheredLattice> quantizer;
};

// Fig. 9 pre/post-filter view of the reuse topology (report only; the
// shaping gains live inside the stage quantizers).
struct ReuseFilters {
    double base_step = 0.0;
    double a2 = 1.0, a3 = 1.0; // shaping gains of stages 1 and 2
    double b1p = 0.0, b2p = 0.0, b3p = 0.0, b4p = 0.0, b5p = 0.0, b6p = 0.0;
    double alpha1p = 0.0, alpha2p = 0.0, beta1p = 0.0, beta2p = 0.0;
};

struct CodecTopology {
    TopologyKind kind;
    int dim = 1;
    std::uint64_t seed = 0;
    GaussMDParams params;
    std::vector<Stage> stages;
    std::vector<int> desc1_stages, desc2_stages;
    double alpha1 = 0.0, alpha2 = 0.0, beta1 = 0.0, beta2 = 0.0;
    double recombine_gain = 0.0; // b*_6; W2 = Delta + b*_6 W2' for splitting/reuse
    int u1_stage = 0;            // stage whose output plays U_1
    int u2_stage = 0;            // stage whose output plays U_2 (or Delta before recombination)
    int coarse_stage = -1;       // U_2' stage for splitting/reuse
    std::optional<ReuseFilters> reuse;

    std::uint64_t fingerprint() const;
};

CodecTopology build(TopologyKind kind, const GaussMDParams& params, std::uint64_t seed, int dim = 1);

struct DescriptionStreams {
    std::size_t samples = 0;
    int dim = 1;
    // per stage; empty for pass-through stages
    std::vector<std::vector<std::int64_t>> stage_indices;
};

DescriptionStreams encode(const CodecTopology& t, std::span<const double> x);

// Reconstructions for whichever channels arrived; absent channels yield
// absent reconstructions rather than an error.
struct Reconstruction {
    std::optional<std::vector<double>> x1, x2, x3;
};

Reconstruction decode(const CodecTopology& t, const DescriptionStreams& s, bool channel1 = true,
                      bool channel2 = true);

std::vector<double> decode_side1(const CodecTopology& t, const DescriptionStreams& s);
std::vector<double> decode_side2(const CodecTopology& t, const DescriptionStreams& s);
std::vector<double> decode_central(const CodecTopology& t, const DescriptionStreams& s);

struct RateReport {
    std::vector<ConditionalEntropyEstimate> per_stage; // indexed like stages; 0 bits for pass-through
    double desc1_bits = 0.0, desc2_bits = 0.0;
    double tolerance = 0.0; // per-description estimator tolerance
    // recombined-stream alternative for splitting (paper leaves the
    // operational choice open; both are reported)
    std::optional<ConditionalEntropyEstimate> desc2_joint;
};

RateReport measure_rate(const CodecTopology& t, const DescriptionStreams& s,
                        const EntropyEstimatorConfig& cfg = {});

// Second-moment matrix of the codec's observable variables:
// (X, W1, W2) for successive/separate, (X, W1~, W2~, W2~', Delta) for
// splitting/reuse. Theory side comes from the Gaussian test channel.
Eigen::MatrixXd theory_second_moments(const CodecTopology& t);
std::vector<std::string> second_moment_labels(const CodecTopology& t);
Eigen::MatrixXd empirical_second_moments(const CodecTopology& t, std::span<const double> x,
                                         const DescriptionStreams& s);

struct SimBatch {
    std::vector<double> x;
    std::vector<double> x1, x2, x3;
    double d1 = 0.0, d2 = 0.0, d3 = 0.0;
};

SimBatch run_batch(const CodecTopology& t, std::span<const double> x);

} // namespace mdq
