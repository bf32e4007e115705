#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mdq/codec.hpp"
#include "mdq/entropy.hpp"
#include "mdq/region.hpp"
#include "mdq/sources.hpp"

namespace mdq {

struct RateTarget {
    enum class Kind { vertex1, vertex2, balanced, r1 } kind = Kind::balanced;
    double r1 = 0.0;

    static RateTarget vertex(int which) {
        return RateTarget{which == 1 ? Kind::vertex1 : Kind::vertex2, 0.0};
    }
    static RateTarget balanced() { return RateTarget{Kind::balanced, 0.0}; }
    static RateTarget at_r1(double r) { return RateTarget{Kind::r1, r}; }
    std::string describe() const;
};

// distortions -> full parameter set for one operating point
GaussMDParams resolve_params(const DistortionTriple& d, const RateTarget& target);

// redundancy of one scalar ECDQ stage, 0.5 log2(2 pi e G_1) ~ 0.2546 bits
double scalar_stage_redundancy();

struct SimReport {
    // configuration echo
    std::string source;
    TopologyKind kind = TopologyKind::successive;
    DistortionTriple d{1.0, 0.0, 0.0, 0.0};
    RateTarget target;
    std::size_t samples = 0;
    std::uint64_t seed = 0;
    std::uint64_t fingerprint = 0;
    bool mirrored = false; // successive run at vertex 2 (descriptions swapped)
    ClampBound clamp_fired = ClampBound::none;

    GaussMDParams params;
    double entropy_power = 1.0;

    // empirical
    double rate1 = 0.0, rate2 = 0.0, rate_tolerance = 0.0;
    std::optional<double> rate2_joint;
    BatchStats d1{0, 0, 0}, d2{0, 0, 0}, d3{0, 0, 0};
    double cov_max_delta = 0.0;

    // theory and budgets (Gaussian reference)
    double theory_r1 = 0.0, theory_r2 = 0.0;
    double budget_r1 = 0.0, budget_r2 = 0.0;
    double outer_sum_rate = 0.0; // entropy-power outer bound for this source

    bool pass_rates = false, pass_distortions = false, pass_covariance = false;
    bool pass() const { return pass_rates && pass_distortions && pass_covariance; }

    std::string to_json(int indent = 2) const;
    std::string batches_csv() const; // per-batch distortion table
    std::vector<double> batch_d1, batch_d2, batch_d3;
};

SimReport run_experiment(const SourceSpec& source, DistortionTriple d, const RateTarget& target,
                         TopologyKind kind, std::size_t n_samples, std::uint64_t seed);

struct SweepRow {
    bool t3_infinite = false;
    double var_t3 = 0.0;
    double r1_theory = 0.0, r2_theory = 0.0;
    double r1_measured = 0.0, r2_measured = 0.0; // NaN when not measured
};

// dominant-face sweep over S equally spaced R1 targets between the vertices;
// n_samples = 0 skips the measurement columns
std::vector<SweepRow> sweep_dominant_face(const DistortionTriple& d, int steps,
                                          std::size_t n_samples, std::uint64_t seed);
std::string sweep_to_csv(const std::vector<SweepRow>& rows);

struct HighresRow {
    double scale = 1.0;
    DistortionTriple d{1.0, 0.0, 0.0, 0.0};
    double measured_sum = 0.0;
    double theory_sum = 0.0;
    double outer_sum = 0.0; // phi-based outer bound
    double redundancy = 0.0;
    double budget = 0.0; // 3 * scalar_stage_redundancy()
};

std::vector<HighresRow> highres_acceptance(const DistortionTriple& base,
                                           const std::vector<double>& scales,
                                           std::size_t n_samples, std::uint64_t seed);
std::string highres_to_csv(const std::vector<HighresRow>& rows);

} // namespace mdq
