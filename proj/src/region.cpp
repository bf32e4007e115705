#include "mdq/region.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace mdq {

namespace {

constexpr double kBandTol = 1e-12;

double log2_(double x) { return std::log2(x); }

void check_triple(const DistortionTriple& d) {
    if (!(d.var_x > 0.0) || !std::isfinite(d.var_x))
        throw std::invalid_argument("distortions: source variance must be positive");
    auto bad = [&](double v) { return !(v > 0.0) || v > d.var_x || !std::isfinite(v); };
    if (bad(d.d1) || bad(d.d2) || bad(d.d3))
        throw std::invalid_argument("distortions: each D_i must satisfy 0 < D_i <= var_x");
}

double harmonic_bound(const DistortionTriple& d) {
    return 1.0 / (1.0 / d.d1 + 1.0 / d.d2 - 1.0 / d.var_x);
}

void check_band(const DistortionTriple& d) {
    check_triple(d);
    const double lo = d.d1 + d.d2 - d.var_x;
    const double hi = harmonic_bound(d);
    const double tol = kBandTol * d.var_x;
    if (d.d3 < lo - tol || d.d3 > hi + tol)
        throw std::invalid_argument("distortions: D3 outside the non-degenerate band [" +
                                    std::to_string(lo) + ", " + std::to_string(hi) + "]");
}

} // namespace

double GaussMDParams::error_correlation() const {
    return var_t0 - std::sqrt(var_t1) * std::sqrt(var_t2);
}

double GaussMDParams::eu1u2() const { return var_x + error_correlation(); }

ClampResult clamp_degenerate(const DistortionTriple& d) {
    check_triple(d);
    ClampResult out{d, ClampBound::none};
    const double lo = d.d1 + d.d2 - d.var_x;
    const double hi = harmonic_bound(d);
    if (d.d3 > hi) {
        // excess D3 is free: the harmonic point already achieves it
        out.d.d3 = hi;
        out.fired = ClampBound::high;
    } else if (d.d3 < lo) {
        // reported only; tightening D1, D2 instead is the caller's call
        out.d.d3 = lo;
        out.fired = ClampBound::low;
    }
    return out;
}

double psi(const DistortionTriple& d) {
    check_band(d);
    const double s = d.var_x;
    const double num = (s - d.d3) * (s - d.d3);
    const double g = std::sqrt(std::max(0.0, (s - d.d1) * (s - d.d2))) -
                     std::sqrt(std::max(0.0, (d.d1 - d.d3) * (d.d2 - d.d3)));
    const double den = num - g * g;
    if (den <= 0.0) // harmonic endpoint, where the branch meets s*D3/(D1*D2)
        return s * d.d3 / (d.d1 * d.d2);
    return num / den;
}

double outer_bound_phi(const DistortionTriple& d, double entropy_power) {
    if (!(entropy_power > 0.0)) throw std::invalid_argument("entropy power must be positive");
    DistortionTriple e = d;
    e.var_x = entropy_power;
    const double lo = e.d1 + e.d2 - e.var_x;
    const double hi = 1.0 / (1.0 / e.d1 + 1.0 / e.d2 - 1.0 / e.var_x);
    if (e.d3 < lo) return 1.0;
    if (e.d3 > hi) return e.var_x * e.d3 / (e.d1 * e.d2);
    return psi(e);
}

RatePair outer_bound_rates(const DistortionTriple& d, double entropy_power) {
    return RatePair{0.5 * log2_(entropy_power / d.d1), 0.5 * log2_(entropy_power / d.d2)};
}

double outer_bound_sum_rate(const DistortionTriple& d, double entropy_power) {
    return 0.5 * log2_(entropy_power / d.d3) + 0.5 * log2_(outer_bound_phi(d, entropy_power));
}

GaussMDParams test_channel_params(const DistortionTriple& d) {
    check_band(d);
    GaussMDParams p;
    p.var_x = d.var_x;
    p.d1 = d.d1;
    p.d2 = d.d2;
    p.d3 = d.d3;

    const double s = d.var_x;
    p.var_t0 = d.d3 * s / (s - d.d3);
    p.var_t1 = d.d1 * s / (s - d.d1) - p.var_t0;
    p.var_t2 = d.d2 * s / (s - d.d2) - p.var_t0;
    const double neg_tol = 1e-12 * s;
    if (p.var_t1 < -neg_tol || p.var_t2 < -neg_tol)
        throw std::invalid_argument("distortions: negative test-channel variance (band violation)");
    p.var_t1 = std::max(p.var_t1, 0.0);
    p.var_t2 = std::max(p.var_t2, 0.0);

    const double st1 = std::sqrt(p.var_t1), st2 = std::sqrt(p.var_t2);
    p.alpha1 = s / (s + p.var_t0 + p.var_t1);
    p.alpha2 = s / (s + p.var_t0 + p.var_t2);
    p.beta1 = s * st2 / ((st1 + st2) * (s + p.var_t0));
    p.beta2 = s * st1 / ((st1 + st2) * (s + p.var_t0));

    p.psi = psi(d);

    p.a1 = (p.var_t1 + st1 * st2) / (p.var_t0 + p.var_t1);
    p.a2 = (p.var_t0 - st1 * st2) / (p.var_t0 + p.var_t1);
    p.eb2 = p.var_t0 + p.var_t1;
    p.eb3 = p.var_t0 * (st1 + st2) * (st1 + st2) / (p.var_t0 + p.var_t1);

    const double half_log_psi = 0.5 * log2_(p.psi);
    p.vertex1 = RatePair{0.5 * log2_(s / d.d1), 0.5 * log2_(d.d1 / d.d3) + half_log_psi};
    p.vertex2 = RatePair{0.5 * log2_(d.d2 / d.d3) + half_log_psi, 0.5 * log2_(s / d.d2)};
    p.sum_rate = 0.5 * log2_(s / d.d3) + half_log_psi;

    const double band_tol = 1e-9 * s;
    p.harmonic_bound = std::fabs(d.d3 - harmonic_bound(d)) <= band_tol;
    p.no_excess_sum = std::fabs(d.d3 - (d.d1 + d.d2 - s)) <= band_tol;

    // self-check: the channel must reproduce the requested distortions
    const double r1 = s * (p.var_t0 + p.var_t1) / (s + p.var_t0 + p.var_t1);
    const double r2 = s * (p.var_t0 + p.var_t2) / (s + p.var_t0 + p.var_t2);
    const double r3 = s * p.var_t0 / (s + p.var_t0);
    const double self_tol = 1e-12 * s;
    if (std::fabs(r1 - d.d1) > self_tol || std::fabs(r2 - d.d2) > self_tol ||
        std::fabs(r3 - d.d3) > self_tol)
        throw std::logic_error("test_channel_params: distortion round-trip failed");

    return p;
}

double r1_of_sigma_t3(const GaussMDParams& p, double var_t3) {
    const double s = p.var_x, u = p.var_t0, v1 = p.var_t1, v2 = p.var_t2;
    const double sum12 = std::sqrt(v1) + std::sqrt(v2);
    const double num = (s + u + v1) * (u + v2 + var_t3);
    const double den = u * sum12 * sum12 + var_t3 * (u + v1);
    return 0.5 * log2_(num / den);
}

SigmaT3 split_sigma_t3(const GaussMDParams& p, double r1_target) {
    const double r1_lo = p.vertex1.r1; // sigma_T3 = inf
    const double r1_hi = p.vertex2.r1; // sigma_T3 = 0
    const double tol = 1e-12 * std::max(1.0, r1_hi);
    if (r1_target < r1_lo - tol || r1_target > r1_hi + tol)
        throw std::invalid_argument("split: R1 target outside the dominant-face interval [" +
                                    std::to_string(r1_lo) + ", " + std::to_string(r1_hi) + "]");

    if (r1_target >= r1_hi - tol) return SigmaT3{false, 0.0, false};
    if (r1_target <= r1_lo + tol) return SigmaT3{true, 0.0, false};

    const double s = p.var_x, u = p.var_t0, v1 = p.var_t1, v2 = p.var_t2;
    const double sum12 = std::sqrt(v1) + std::sqrt(v2);
    const double x = std::exp2(2.0 * r1_target);
    const double num = u * sum12 * sum12 * x - (u + v2) * (s + u + v1);
    const double den = s + u + v1 - x * (u + v1);

    SigmaT3 out;
    if (std::fabs(den) > 1e-10 * (s + u + v1)) {
        out.value = num / den;
        // closed form is cancellation-prone near the vertices
        if (out.value >= 0.0 && std::fabs(r1_of_sigma_t3(p, out.value) - r1_target) <= 1e-10)
            return out;
    }

    // bisection on the strictly decreasing map T3 -> R1
    double lo = 0.0, hi = 1.0;
    while (r1_of_sigma_t3(p, hi) > r1_target) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (r1_of_sigma_t3(p, mid) > r1_target)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= 1e-15 * std::max(1.0, hi)) break;
    }
    out.value = 0.5 * (lo + hi);
    return out;
}

SigmaT3 split_sigma_t3_balanced(const GaussMDParams& p) {
    const double st0 = std::sqrt(p.var_t0);
    if (std::fabs(p.var_t1 - p.var_t2) <= 1e-12 * p.var_x) {
        const double st12 = std::sqrt(p.var_t1);
        if (std::fabs(st0 - st12) <= 1e-9 * std::max(st0, st12)) {
            // rates do not depend on T3 here; report the free choice
            return SigmaT3{false, 0.0, true};
        }
        return SigmaT3{false, 2.0 * st0 * st12, false};
    }
    const double target = 0.5 * p.sum_rate;
    return split_sigma_t3(p, target);
}

void apply_split(GaussMDParams& p, const SigmaT3& t3) {
    p.has_split = true;
    p.t3 = t3;
    if (t3.infinite) {
        // vertex V1: the coarse stage of encoder 2 carries everything and the
        // refinement vanishes; codec falls back to plain successive order.
        p.r1_split = p.vertex1.r1;
        p.r2_split = p.vertex1.r2;
        p.r21 = p.vertex1.r2;
        p.r22 = 0.0;
        return;
    }

    const double s = p.var_x, u = p.var_t0, v1 = p.var_t1, v2 = p.var_t2, w = t3.value;
    const double st1 = std::sqrt(v1), st2 = std::sqrt(v2);
    const double sum12 = st1 + st2;
    const double c = u + v2 + w;

    p.b1 = (v2 + w + st1 * st2) / c;
    p.b2 = (u - st1 * st2) / c;
    p.b3 = s / (s + c);
    p.b4 = (s + u - st1 * st2) / (s + c);
    p.b5 = (v2 + w + st1 * st2) / c;
    p.b6 = (s + u + v2) / (s + c);
    p.b7 = w / c;
    p.b8 = w * (u - st1 * st2) / (u * sum12 * sum12 + w * (u + v1));

    p.bs1 = p.b1;
    p.bs2 = p.b2;
    p.bs3 = p.b7 - p.b5 * p.b8;
    p.bs4 = p.b8;
    p.bs5 = p.b3 * p.b5 * p.b8 - p.b3 * p.b7 - p.b4 * p.b8;
    p.bs6 = p.b6;

    p.eb2_tilde = c;
    p.eb3_tilde = (u * sum12 * sum12 + w * (u + v1)) / c;
    p.eb2_bar = s * c / (s + c);
    p.eb3_bar = p.eb3_tilde;
    p.eb4_bar = w * (s + u + v2) / (s + c) - p.b7 * p.b7 * p.eb2_bar - p.b8 * p.b8 * p.eb3_bar;
    p.eb4_bar = std::max(p.eb4_bar, 0.0);

    p.r1_split = r1_of_sigma_t3(p, w);
    p.r2_split = 0.5 * log2_((u * sum12 * sum12 + w * (u + v1)) * (s + u + v2) /
                             (u * c * sum12 * sum12));
    p.r21 = 0.5 * log2_((s + p.eb2_tilde) / p.eb2_tilde);
    p.r22 = p.r2_split - p.r21;
}

TimeshareRow timeshare_point(const DistortionTriple& d, double gamma) {
    check_triple(d);
    if (gamma < 0.0 || gamma > 1.0) throw std::invalid_argument("timeshare: gamma in [0,1]");
    const double r = 0.5 * log2_(d.var_x / d.d3);
    return TimeshareRow{gamma,
                        gamma * r,
                        (1.0 - gamma) * r,
                        gamma * d.d3 + (1.0 - gamma) * d.var_x,
                        (1.0 - gamma) * d.d3 + gamma * d.var_x,
                        d.d3};
}

std::string params_to_json(const GaussMDParams& p, int indent) {
    nlohmann::ordered_json j;
    j["var_x"] = p.var_x;
    j["D1"] = p.d1;
    j["D2"] = p.d2;
    j["D3"] = p.d3;
    j["psi"] = p.psi;
    j["sigma2_T0"] = p.var_t0;
    j["sigma2_T1"] = p.var_t1;
    j["sigma2_T2"] = p.var_t2;
    j["alpha1"] = p.alpha1;
    j["alpha2"] = p.alpha2;
    j["beta1"] = p.beta1;
    j["beta2"] = p.beta2;
    j["a1"] = p.a1;
    j["a2"] = p.a2;
    j["EB2^2"] = p.eb2;
    j["EB3^2"] = p.eb3;
    j["R1_V1"] = p.vertex1.r1;
    j["R2_V1"] = p.vertex1.r2;
    j["R1_V2"] = p.vertex2.r1;
    j["R2_V2"] = p.vertex2.r2;
    j["sum_rate"] = p.sum_rate;
    j["harmonic_bound"] = p.harmonic_bound;
    j["no_excess_sum"] = p.no_excess_sum;
    if (p.has_split) {
        j["sigma2_T3"] = p.t3.infinite ? "inf" : nlohmann::ordered_json(p.t3.value);
        j["sigma2_T3_free"] = p.t3.free_choice;
        if (!p.t3.infinite) {
            j["b"] = {p.b1, p.b2, p.b3, p.b4, p.b5, p.b6, p.b7, p.b8};
            j["b_star"] = {p.bs1, p.bs2, p.bs3, p.bs4, p.bs5, p.bs6};
            j["EBtilde2^2"] = p.eb2_tilde;
            j["EBtilde3^2"] = p.eb3_tilde;
            j["EBbar2^2"] = p.eb2_bar;
            j["EBbar3^2"] = p.eb3_bar;
            j["EBbar4^2"] = p.eb4_bar;
        }
        j["R1_G"] = p.r1_split;
        j["R2_G"] = p.r2_split;
        j["R2_G_coarse"] = p.r21;
        j["R2_G_refine"] = p.r22;
    }
    return j.dump(indent);
}

} // namespace mdq
