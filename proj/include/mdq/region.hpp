#pragma once

#include <optional>
#include <string>

namespace mdq {

struct DistortionTriple {
    double var_x; // source variance
    double d1, d2, d3;
};

enum class ClampBound { none, low, high };

struct ClampResult {
    DistortionTriple d;
    ClampBound fired;
};

struct RatePair {
    double r1, r2; // bits per sample
};

// sigma^2_T3 for the quantization-splitting stage; infinite marks the
// degeneration to plain successive quantization (vertex V1 ordering).
struct SigmaT3 {
    bool infinite = false;
    double value = 0.0; // ignored when infinite
    bool free_choice = false; // symmetric degenerate case: rates independent of T3
};

// Every closed-form quantity of the Gaussian MD test channel for one
// distortion triple, plus (optionally) the splitting stage for one rate
// split. Variances carry source-variance units; rates are bits/sample.
struct GaussMDParams {
    double var_x = 0.0, d1 = 0.0, d2 = 0.0, d3 = 0.0;

    double var_t0 = 0.0, var_t1 = 0.0, var_t2 = 0.0;
    double alpha1 = 0.0, alpha2 = 0.0, beta1 = 0.0, beta2 = 0.0;
    double psi = 1.0;

    // successive quantization (vertex V1 ordering)
    double a1 = 0.0, a2 = 0.0;
    double eb2 = 0.0, eb3 = 0.0; // E B_2^2, E B_3^2

    RatePair vertex1{0.0, 0.0}, vertex2{0.0, 0.0};
    double sum_rate = 0.0;

    bool harmonic_bound = false;  // d3 at the no-excess-marginal-rate bound
    bool no_excess_sum = false;   // d3 at d1 + d2 - var_x

    // splitting stage (populated by apply_split)
    bool has_split = false;
    SigmaT3 t3;
    double b1 = 0.0, b2 = 0.0, b3 = 0.0, b4 = 0.0, b5 = 0.0, b6 = 0.0, b7 = 0.0, b8 = 0.0;
    double bs1 = 0.0, bs2 = 0.0, bs3 = 0.0, bs4 = 0.0, bs5 = 0.0, bs6 = 0.0;
    double eb2_tilde = 0.0, eb3_tilde = 0.0;            // E Btilde_2^2, E Btilde_3^2
    double eb2_bar = 0.0, eb3_bar = 0.0, eb4_bar = 0.0; // E Bbar_{2,3,4}^2
    double r1_split = 0.0, r2_split = 0.0;              // R_1^G, R_2^G on the dominant face
    double r21 = 0.0, r22 = 0.0;                        // encoder-2 stage rates

    // error correlation E(U1-X)(U2-X) = var_t0 - sigma_t1 sigma_t2
    double error_correlation() const;
    // E(U1 U2); zero exactly in the no-excess-sum-rate case
    double eu1u2() const;
};

ClampResult clamp_degenerate(const DistortionTriple& d);

// excess-sum-rate factor; rejects triples outside the non-degenerate band
double psi(const DistortionTriple& d);

// same factor with the variance replaced by an entropy power (outer bound)
double outer_bound_phi(const DistortionTriple& d, double entropy_power);
RatePair outer_bound_rates(const DistortionTriple& d, double entropy_power);
double outer_bound_sum_rate(const DistortionTriple& d, double entropy_power);

GaussMDParams test_channel_params(const DistortionTriple& d);

// R1 must lie in [R1(V1), R1(V2)]; endpoints map to the infinite sentinel
// and zero respectively. Closed form with a bisection fallback near V1.
SigmaT3 split_sigma_t3(const GaussMDParams& p, double r1_target);
SigmaT3 split_sigma_t3_balanced(const GaussMDParams& p);

// splitting coefficients and rates for a fixed sigma^2_T3
void apply_split(GaussMDParams& p, const SigmaT3& t3);

// rate split R1^G as a function of sigma^2_T3 (finite)
double r1_of_sigma_t3(const GaussMDParams& p, double var_t3);

// timesharing report for the no-excess-sum-rate case, gamma in [0, 1]
struct TimeshareRow {
    double gamma;
    double r1, r2, d1, d2, d3;
};
TimeshareRow timeshare_point(const DistortionTriple& d, double gamma);

std::string params_to_json(const GaussMDParams& p, int indent = 2);

} // namespace mdq
