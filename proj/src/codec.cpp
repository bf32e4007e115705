#include "mdq/codec.hpp"

#include <cmath>
#include <stdexcept>

namespace mdq {

namespace {

constexpr std::uint32_t kStageStreamBase = 1; // stream 0 belongs to the source

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

Stage make_stage(double tap_x, std::vector<std::pair<int, double>> taps, double noise_var,
                 std::uint64_t seed, std::uint32_t stream, int dim) {
    Stage st;
    st.tap_x = tap_x;
    st.taps = std::move(taps);
    st.noise_var = noise_var;
    auto step = DitheredLattice::step_for_noise_variance(noise_var);
    if (step) {
        st.quantizer.emplace(dim, *step, seed, stream);
    } else {
        st.pass_through = true;
        if (tap_x != 0.0)
            throw std::invalid_argument("build: pass-through stage with a direct source tap is undecodable");
    }
    return st;
}

void require_consistent(const GaussMDParams& p) {
    if (!(p.var_x > 0.0) || !(p.eb2 >= 0.0) || !(p.eb3 >= 0.0) || !std::isfinite(p.var_t0))
        throw std::invalid_argument("build: inconsistent test-channel parameters");
}

} // namespace

std::string to_string(TopologyKind k) {
    switch (k) {
    case TopologyKind::successive: return "successive";
    case TopologyKind::splitting: return "splitting";
    case TopologyKind::separate: return "separate";
    case TopologyKind::reuse: return "reuse";
    }
    return "?";
}

TopologyKind topology_from_string(const std::string& s) {
    if (s == "successive") return TopologyKind::successive;
    if (s == "splitting") return TopologyKind::splitting;
    if (s == "separate") return TopologyKind::separate;
    if (s == "reuse") return TopologyKind::reuse;
    throw std::invalid_argument("unknown topology kind: " + s);
}

std::uint64_t CodecTopology::fingerprint() const {
    std::string s = to_string(kind) + "|" + std::to_string(dim) + "|" + std::to_string(seed);
    s += "|" + std::to_string(params.var_x) + "," + std::to_string(params.d1) + "," +
         std::to_string(params.d2) + "," + std::to_string(params.d3);
    if (params.has_split)
        s += "|t3=" + (params.t3.infinite ? std::string("inf") : std::to_string(params.t3.value));
    return fnv1a(s);
}

CodecTopology build(TopologyKind kind, const GaussMDParams& params, std::uint64_t seed, int dim) {
    require_consistent(params);
    CodecTopology t;
    t.kind = kind;
    t.dim = dim;
    t.seed = seed;
    t.params = params;
    t.alpha1 = params.alpha1;
    t.alpha2 = params.alpha2;
    t.beta1 = params.beta1;
    t.beta2 = params.beta2;

    const GaussMDParams& p = params;
    switch (kind) {
    case TopologyKind::successive: {
        t.stages.push_back(make_stage(1.0, {}, p.eb2, seed, kStageStreamBase + 0, dim));
        t.stages.push_back(make_stage(p.a1, {{0, p.a2}}, p.eb3, seed, kStageStreamBase + 1, dim));
        t.desc1_stages = {0};
        t.desc2_stages = {1};
        t.u1_stage = 0;
        t.u2_stage = 1;
        break;
    }
    case TopologyKind::separate: {
        if (!p.harmonic_bound)
            throw std::invalid_argument(
                "build: separate quantization misses D3 unless D3 sits at the harmonic bound");
        t.stages.push_back(make_stage(1.0, {}, p.var_t0 + p.var_t1, seed, kStageStreamBase + 0, dim));
        t.stages.push_back(make_stage(1.0, {}, p.var_t0 + p.var_t2, seed, kStageStreamBase + 1, dim));
        t.desc1_stages = {0};
        t.desc2_stages = {1};
        t.u1_stage = 0;
        t.u2_stage = 1;
        break;
    }
    case TopologyKind::splitting:
    case TopologyKind::reuse: {
        if (!p.has_split)
            throw std::invalid_argument("build: splitting topology needs apply_split() parameters");
        if (p.t3.infinite) {
            // coarse stage vanishes; fall back to the successive wiring
            CodecTopology s = build(TopologyKind::successive, params, seed, dim);
            s.kind = kind;
            return s;
        }
        if (kind == TopologyKind::splitting) {
            t.stages.push_back(make_stage(1.0, {}, p.eb2_tilde, seed, kStageStreamBase + 0, dim));
            t.stages.push_back(
                make_stage(p.bs1, {{0, p.bs2}}, p.eb3_tilde, seed, kStageStreamBase + 1, dim));
            t.stages.push_back(make_stage(p.bs3, {{1, p.bs4}, {0, p.bs5}}, p.eb4_bar, seed,
                                          kStageStreamBase + 2, dim));
        } else {
            // one base quantizer, shaped per stage; matched dither streams make
            // the index sequences bit-identical to the splitting topology
            const double base_step = std::sqrt(12.0 * p.eb2_tilde);
            ReuseFilters f;
            f.base_step = base_step;
            f.a2 = std::sqrt(p.eb3_tilde / p.eb2_tilde);
            f.a3 = p.eb4_bar > 0.0 ? std::sqrt(p.eb4_bar / p.eb2_tilde) : 0.0;

            Stage s0 = make_stage(1.0, {}, p.eb2_tilde, seed, kStageStreamBase + 0, dim);
            Stage s1;
            s1.tap_x = p.bs1;
            s1.taps = {{0, p.bs2}};
            s1.noise_var = p.eb3_tilde;
            s1.quantizer = DitheredLattice(dim, base_step, seed, kStageStreamBase + 1).shaped(f.a2);
            Stage s2;
            s2.tap_x = p.bs3;
            s2.taps = {{1, p.bs4}, {0, p.bs5}};
            s2.noise_var = p.eb4_bar;
            if (p.eb4_bar > 0.0) {
                s2.quantizer =
                    DitheredLattice(dim, base_step, seed, kStageStreamBase + 2).shaped(f.a3);
            } else {
                s2.pass_through = true;
                if (s2.tap_x != 0.0)
                    throw std::invalid_argument("build: pass-through stage with a source tap");
            }
            if (f.a3 > 0.0) {
                f.b1p = p.bs1 / f.a2;
                f.b2p = p.bs2 / f.a2;
                f.b3p = p.bs3 / f.a3;
                f.b4p = p.bs4 * f.a2 / f.a3;
                f.b5p = p.bs5 / f.a3;
                f.b6p = p.bs6 / f.a3;
            }
            f.alpha1p = p.alpha1 * f.a2;
            f.alpha2p = p.alpha2 * f.a3;
            f.beta1p = p.beta1 * f.a2;
            f.beta2p = p.beta2 * f.a3;
            t.reuse = f;
            t.stages = {std::move(s0), std::move(s1), std::move(s2)};
        }
        t.desc1_stages = {1};
        t.desc2_stages = {0, 2};
        t.u1_stage = 1;
        t.u2_stage = 2; // Delta; recombined with the coarse stage
        t.coarse_stage = 0;
        t.recombine_gain = p.bs6;
        break;
    }
    }
    return t;
}

DescriptionStreams encode(const CodecTopology& t, std::span<const double> x) {
    DescriptionStreams out;
    out.samples = x.size();
    out.dim = t.dim;
    out.stage_indices.resize(t.stages.size());
    for (std::size_t si = 0; si < t.stages.size(); ++si)
        if (!t.stages[si].pass_through) out.stage_indices[si].resize(x.size());

    std::vector<double> w(t.stages.size());
    const int dim = t.dim;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]))
            throw std::invalid_argument("encode: non-finite sample at index " + std::to_string(i));
        const std::uint64_t block = i / std::size_t(dim);
        const int axis = int(i % std::size_t(dim));
        for (std::size_t si = 0; si < t.stages.size(); ++si) {
            const Stage& st = t.stages[si];
            double in = st.tap_x * x[i];
            for (const auto& [j, c] : st.taps) in += c * w[std::size_t(j)];
            if (st.pass_through) {
                w[si] = in;
            } else {
                auto q = st.quantizer->quantize1(in, block, axis);
                out.stage_indices[si][i] = q.index;
                w[si] = q.w;
            }
        }
    }
    return out;
}

namespace {

// rebuild one stage's output stream from its index stream + dither
std::vector<double> stage_values(const CodecTopology& t, const DescriptionStreams& s, int stage,
                                 const std::vector<const std::vector<double>*>& earlier) {
    const Stage& st = t.stages[std::size_t(stage)];
    std::vector<double> w(s.samples);
    if (st.pass_through) {
        for (std::size_t i = 0; i < s.samples; ++i) {
            double v = 0.0;
            for (const auto& [j, c] : st.taps) {
                if (c == 0.0) continue;
                const auto* src = earlier[std::size_t(j)];
                if (!src)
                    throw std::invalid_argument("decode: pass-through stage taps an unavailable stream");
                v += c * (*src)[i];
            }
            w[i] = v;
        }
        return w;
    }
    const auto& idx = s.stage_indices[std::size_t(stage)];
    if (idx.size() != s.samples) throw std::invalid_argument("decode: missing index stream");
    for (std::size_t i = 0; i < s.samples; ++i) {
        const std::uint64_t block = i / std::size_t(s.dim);
        const int axis = int(i % std::size_t(s.dim));
        w[i] = st.quantizer->reproduce1(idx[i], block, axis);
    }
    return w;
}

} // namespace

std::vector<double> decode_side1(const CodecTopology& t, const DescriptionStreams& s) {
    std::vector<const std::vector<double>*> earlier(t.stages.size(), nullptr);
    std::vector<double> w1 = stage_values(t, s, t.u1_stage, earlier);
    for (double& v : w1) v *= t.alpha1;
    return w1;
}

std::vector<double> decode_side2(const CodecTopology& t, const DescriptionStreams& s) {
    std::vector<const std::vector<double>*> earlier(t.stages.size(), nullptr);
    if (t.coarse_stage < 0) {
        std::vector<double> w2 = stage_values(t, s, t.u2_stage, earlier);
        for (double& v : w2) v *= t.alpha2;
        return w2;
    }
    std::vector<double> coarse = stage_values(t, s, t.coarse_stage, earlier);
    earlier[std::size_t(t.coarse_stage)] = &coarse;
    std::vector<double> delta = stage_values(t, s, t.u2_stage, earlier);
    for (std::size_t i = 0; i < delta.size(); ++i)
        delta[i] = t.alpha2 * (delta[i] + t.recombine_gain * coarse[i]);
    return delta;
}

std::vector<double> decode_central(const CodecTopology& t, const DescriptionStreams& s) {
    std::vector<const std::vector<double>*> earlier(t.stages.size(), nullptr);
    std::vector<double> w1 = stage_values(t, s, t.u1_stage, earlier);
    std::vector<double> w2;
    if (t.coarse_stage < 0) {
        w2 = stage_values(t, s, t.u2_stage, earlier);
    } else {
        std::vector<double> coarse = stage_values(t, s, t.coarse_stage, earlier);
        earlier[std::size_t(t.coarse_stage)] = &coarse;
        earlier[std::size_t(t.u1_stage)] = &w1;
        w2 = stage_values(t, s, t.u2_stage, earlier);
        for (std::size_t i = 0; i < w2.size(); ++i) w2[i] += t.recombine_gain * coarse[i];
    }
    std::vector<double> out(s.samples);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = t.beta1 * w1[i] + t.beta2 * w2[i];
    return out;
}

Reconstruction decode(const CodecTopology& t, const DescriptionStreams& s, bool channel1,
                      bool channel2) {
    Reconstruction r;
    if (channel1) r.x1 = decode_side1(t, s);
    if (channel2) r.x2 = decode_side2(t, s);
    if (channel1 && channel2) r.x3 = decode_central(t, s);
    return r;
}

RateReport measure_rate(const CodecTopology& t, const DescriptionStreams& s,
                        const EntropyEstimatorConfig& cfg) {
    RateReport out;
    out.per_stage.resize(t.stages.size());
    for (std::size_t si = 0; si < t.stages.size(); ++si) {
        const Stage& st = t.stages[si];
        if (st.pass_through) {
            out.per_stage[si] = ConditionalEntropyEstimate{0.0, 0.0, s.samples};
            continue;
        }
        std::vector<double> u(s.samples);
        for (std::size_t i = 0; i < s.samples; ++i)
            u[i] = st.quantizer->dither_unit(i / std::size_t(s.dim), int(i % std::size_t(s.dim)));
        out.per_stage[si] = conditional_entropy(s.stage_indices[si], u, cfg);
        out.tolerance = std::max(out.tolerance, out.per_stage[si].tolerance);
    }
    for (int si : t.desc1_stages) out.desc1_bits += out.per_stage[std::size_t(si)].bits;
    for (int si : t.desc2_stages) out.desc2_bits += out.per_stage[std::size_t(si)].bits;

    if (t.coarse_stage >= 0 && !t.stages[std::size_t(t.u2_stage)].pass_through) {
        const Stage& a = t.stages[std::size_t(t.coarse_stage)];
        const Stage& b = t.stages[std::size_t(t.u2_stage)];
        std::vector<double> ua(s.samples), ub(s.samples);
        for (std::size_t i = 0; i < s.samples; ++i) {
            const std::uint64_t block = i / std::size_t(s.dim);
            const int axis = int(i % std::size_t(s.dim));
            ua[i] = a.quantizer->dither_unit(block, axis);
            ub[i] = b.quantizer->dither_unit(block, axis);
        }
        out.desc2_joint =
            joint_conditional_entropy(s.stage_indices[std::size_t(t.coarse_stage)], ua,
                                      s.stage_indices[std::size_t(t.u2_stage)], ub);
    }
    return out;
}

std::vector<std::string> second_moment_labels(const CodecTopology& t) {
    if (t.coarse_stage < 0) return {"X", "W1", "W2"};
    return {"X", "W1~", "W2~", "W2'~", "Delta"};
}

Eigen::MatrixXd theory_second_moments(const CodecTopology& t) {
    const GaussMDParams& p = t.params;
    const double s = p.var_x, u = p.var_t0, v1 = p.var_t1, v2 = p.var_t2;
    const double cross = s + u - std::sqrt(v1) * std::sqrt(v2); // E U1 U2
    if (t.coarse_stage < 0) {
        Eigen::MatrixXd k(3, 3);
        k << s, s, s, s, s + u + v1, cross, s, cross, s + u + v2;
        return k;
    }
    const double w = p.t3.value;
    // base variables (X, U1, U2, U2'); Delta = U2 - b6 U2'
    Eigen::MatrixXd k4(4, 4);
    k4 << s, s, s, s,                                     //
        s, s + u + v1, cross, cross,                      //
        s, cross, s + u + v2, s + u + v2,                 //
        s, cross, s + u + v2, s + u + v2 + w;             //
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(5, 4);
    a.topLeftCorner(4, 4).setIdentity();
    a(4, 2) = 1.0;
    a(4, 3) = -p.bs6;
    return a * k4 * a.transpose();
}

Eigen::MatrixXd empirical_second_moments(const CodecTopology& t, std::span<const double> x,
                                         const DescriptionStreams& s) {
    std::vector<const std::vector<double>*> earlier(t.stages.size(), nullptr);
    std::vector<std::vector<double>> vars;
    vars.emplace_back(x.begin(), x.end());
    if (t.coarse_stage < 0) {
        vars.push_back(stage_values(t, s, t.u1_stage, earlier));
        vars.push_back(stage_values(t, s, t.u2_stage, earlier));
    } else {
        std::vector<double> w1 = stage_values(t, s, t.u1_stage, earlier);
        std::vector<double> coarse = stage_values(t, s, t.coarse_stage, earlier);
        earlier[std::size_t(t.coarse_stage)] = &coarse;
        earlier[std::size_t(t.u1_stage)] = &w1;
        std::vector<double> delta = stage_values(t, s, t.u2_stage, earlier);
        std::vector<double> w2(delta.size());
        for (std::size_t i = 0; i < delta.size(); ++i)
            w2[i] = delta[i] + t.recombine_gain * coarse[i];
        vars.push_back(std::move(w1));
        vars.push_back(std::move(w2));
        vars.push_back(std::move(coarse));
        vars.push_back(std::move(delta));
    }
    const std::size_t m = vars.size(), n = x.size();
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(Eigen::Index(m), Eigen::Index(m));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i; j < m; ++j) {
            double acc = 0.0;
            for (std::size_t q = 0; q < n; ++q) acc += vars[i][q] * vars[j][q];
            k(Eigen::Index(i), Eigen::Index(j)) = k(Eigen::Index(j), Eigen::Index(i)) = acc / double(n);
        }
    return k;
}

SimBatch run_batch(const CodecTopology& t, std::span<const double> x) {
    SimBatch b;
    b.x.assign(x.begin(), x.end());
    DescriptionStreams s = encode(t, x);
    b.x1 = decode_side1(t, s);
    b.x2 = decode_side2(t, s);
    b.x3 = decode_central(t, s);
    auto mse = [&](const std::vector<double>& r) {
        double acc = 0.0;
        for (std::size_t i = 0; i < r.size(); ++i) acc += (r[i] - x[i]) * (r[i] - x[i]);
        return acc / double(r.size());
    };
    b.d1 = mse(b.x1);
    b.d2 = mse(b.x2);
    b.d3 = mse(b.x3);
    return b;
}

} // namespace mdq
